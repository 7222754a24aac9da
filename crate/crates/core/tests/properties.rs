use gagliardo::verify::{hardy_check, StepFunction};
use gagliardo::*;
use proptest::prelude::*;

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        (0.5..3.0f64).prop_map(|c| Weight::constant(c).unwrap()),
        (0.1..3.0f64, -4.0..4.0f64).prop_map(|(a, b)| Weight::new(WeightPreset::Sigmoid { a, b }).unwrap()),
        (0.0..1.5f64, 0.0..6.0f64, 0.3..2.0f64)
            .prop_map(|(a, omega, width)| Weight::new(WeightPreset::CosTaper { a, omega, width }).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifts_compose_in_one_direction(vals in values(24), a in 0i64..5, b in 0i64..5, neg in any::<bool>()) {
        let g = Grid::cube(1, 0.0, 6.0, 24).unwrap();
        let u = GridFunction::from_values(&g, &g.bounding_box(), vals).unwrap();
        let sign = if neg { -1.0 } else { 1.0 };
        let h = 0.25;
        let ab = shift(&shift(&u, &[sign * a as f64 * h]).unwrap(), &[sign * b as f64 * h]).unwrap();
        let direct = shift(&u, &[sign * (a + b) as f64 * h]).unwrap();
        prop_assert_eq!(ab.values(), direct.values());
    }

    #[test]
    fn shifts_compose_when_support_stays_inside(vals in values(64), a in -3i64..=3, b in -3i64..=3) {
        let g = Grid::cube(2, 0.0, 2.0, 16).unwrap();
        let d = Domain::boxed(&[0.75, 0.75], &[0.5, 0.5]).unwrap();
        let mut full = vec![0.0; g.len()];
        for (slot, x) in full.iter_mut().zip(vals.iter().cycle()) {
            *slot = *x;
        }
        let u = GridFunction::zeros(&g, &d).unwrap().with_values(full);
        let h = 0.125;
        let first = shift(&u, &[a as f64 * h, b as f64 * h]).unwrap();
        let ab = shift(&first, &[b as f64 * h, -a as f64 * h]).unwrap();
        let direct = shift(&u, &[(a + b) as f64 * h, (b - a) as f64 * h]).unwrap();
        prop_assert_eq!(ab.values(), direct.values());
        prop_assert!((weighted_lp_norm(&first, 2.0, &Weight::one()).unwrap() - weighted_lp_norm(&u, 2.0, &Weight::one()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_extension(vals in values(20), x in -10.0..10.0f64) {
        let g = Grid::cube(1, -1.0, 1.0, 20).unwrap();
        let u = GridFunction::from_values(&g, &g.bounding_box(), vals).unwrap();
        if !(-1.0..=1.0).contains(&x) {
            prop_assert_eq!(u.eval(&[x]), 0.0);
        }
    }

    #[test]
    fn lp_norm_sandwich(vals in values(30), f in weight(), p in 1.0..4.0f64) {
        let g = Grid::cube(1, -1.0, 2.0, 30).unwrap();
        let u = GridFunction::from_values(&g, &g.bounding_box(), vals).unwrap();
        let plain = weighted_lp_norm(&u, p, &Weight::one()).unwrap().powf(p);
        let weighted = weighted_lp_norm(&u, p, &f).unwrap().powf(p);
        prop_assert!(f.inf_bound() * plain <= weighted * (1.0 + 1e-12) + 1e-300);
        prop_assert!(weighted <= f.sup_bound() * plain * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn seminorm_sandwich(vals in values(24), f in weight(), s in 0.05..0.95f64, p in 1.0..3.0f64) {
        let g = Grid::cube(1, -1.0, 1.0, 24).unwrap();
        let u = GridFunction::from_values(&g, &g.bounding_box(), vals).unwrap();
        let params = FractionalParams::new(s, p).unwrap();
        let plain = fractional_seminorm(&u, &params, &Weight::one()).unwrap().value_p;
        let weighted = fractional_seminorm(&u, &params, &f).unwrap().value_p;
        prop_assert!(plain >= 0.0);
        prop_assert!(f.inf_bound().powi(2) * plain <= weighted * (1.0 + 1e-12));
        prop_assert!(weighted <= f.sup_bound().powi(2) * plain * (1.0 + 1e-12));
    }

    #[test]
    fn operators_are_symmetric_and_nonnegative(u in values(36), v in values(36), f in weight(), s in 0.05..0.95f64) {
        let g = Grid::cube(2, -1.0, 1.0, 6).unwrap();
        let d = g.bounding_box();
        let u = GridFunction::from_values(&g, &d, u).unwrap();
        let v = GridFunction::from_values(&g, &d, v).unwrap();
        let params = FractionalParams::new(s, 2.0).unwrap();
        for op in [
            OperatorHandle::fractional(&u, &params, &f).unwrap(),
            OperatorHandle::local(&u, &f),
        ] {
            let auv = op.apply(&u).unwrap().inner(&v).unwrap();
            let uav = u.inner(&op.apply(&v).unwrap()).unwrap();
            let scale = op.apply(&u).unwrap().l2_norm() * v.l2_norm() + u.l2_norm() * op.apply(&v).unwrap().l2_norm();
            prop_assert!((auv - uav).abs() <= 1e-12 * scale.max(1e-300));
            prop_assert!(op.apply(&u).unwrap().inner(&u).unwrap() >= -1e-14 * scale);
        }
    }

    #[test]
    fn hardy_holds(
        breaks in prop::collection::btree_set(1u32..1000, 2..8),
        heights in prop::collection::vec(0.0..5.0f64, 7),
        d in 1usize..=3,
        l in 0.0..3.0f64,
        r in 0.1..2.0f64,
    ) {
        let breaks: Vec<f64> = breaks.into_iter().map(|b| b as f64 / 500.0).collect();
        let values = heights[..breaks.len() - 1].to_vec();
        let phi = StepFunction::new(breaks, values).unwrap();
        let res = hardy_check(&phi, d, l, r).unwrap();
        prop_assert!(res.holds());
    }
}
