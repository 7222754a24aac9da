use gagliardo::verify::*;
use gagliardo::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bump(t: f64) -> f64 {
    let v = 1.0 - t * t;
    if v > 0.0 {
        v * v
    } else {
        0.0
    }
}

fn random_step(rng: &mut ChaCha8Rng, r: f64) -> StepFunction {
    let pieces = rng.gen_range(1..6);
    let mut breaks: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(0.01 * r..1.2 * r)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let values = (1..breaks.len()).map(|_| rng.gen_range(0.0..3.0)).collect();
    StepFunction::new(breaks, values).unwrap()
}

#[test]
fn hardy_inequality_on_random_step_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let d = rng.gen_range(1..=3);
        let l = rng.gen_range(0.0..3.0);
        let r = rng.gen_range(0.5..4.0);
        let phi = random_step(&mut rng, r);
        let res = hardy_check(&phi, d, l, r).unwrap();
        assert!(res.holds(), "{res:?}");
        // Fubini: rhs - lhs = r^{-m} / m * int_0^r phi exactly
        let m = d as f64 + l;
        let slack = r.powf(-m) / m * phi.integral(r);
        assert!((res.rhs - res.lhs - slack).abs() <= 1e-11 * res.rhs.max(1e-300), "{res:?} {slack}");
    }
}

#[test]
fn translation_ratio_is_stable_under_refinement() {
    let mut maxima = Vec::new();
    for n in [200, 400] {
        let g = Grid::cube(1, -2.0, 2.0, n).unwrap();
        let u = GridFunction::from_fn(&g, &g.bounding_box(), |x| bump(x[0])).unwrap();
        let h = 4.0 / n as f64;
        let e = Domain::boxed(&[-1.0], &[2.0]).unwrap();
        let shifts: Vec<Vec<f64>> = [1.0, 2.0, 4.0].iter().map(|k| vec![k * h]).collect();
        let f = Weight::new(WeightPreset::Sigmoid { a: 2.0, b: 2.0 }).unwrap();
        let r = translation_estimate_check(&u, &f, 0.5, 2.0, &e, &shifts).unwrap();
        let doubled = translation_estimate_check(&u.scaled(2.0), &f, 0.5, 2.0, &e, &shifts).unwrap();
        for (a, b) in r.rows.iter().zip(&doubled.rows) {
            assert!((a.ratio - b.ratio).abs() < 1e-12 * a.ratio);
        }
        assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
        maxima.push(r.max_ratio);
    }
    let q = maxima[0] / maxima[1];
    assert!((0.5..=2.0).contains(&q), "{maxima:?}");
}

#[test]
fn translation_of_zero_and_unaligned_shifts() {
    let g = Grid::cube(1, -1.0, 1.0, 40).unwrap();
    let zero = GridFunction::zeros(&g, &g.bounding_box()).unwrap();
    let e = Domain::boxed(&[-0.5], &[1.0]).unwrap();
    let r = translation_estimate_check(&zero, &Weight::one(), 0.5, 2.0, &e, &[vec![0.05], vec![0.1]]).unwrap();
    assert!(r.rows.iter().all(|row| row.ratio == 0.0));
    assert!(matches!(
        translation_estimate_check(&zero, &Weight::one(), 0.5, 2.0, &e, &[vec![0.03]]),
        Err(Error::UnalignedShift { .. })
    ));
}

#[test]
fn weight_gap_bound_and_rate() {
    let g = Grid::cube(1, -2.0, 2.0, 300).unwrap();
    let u = GridFunction::from_fn(&g, &g.bounding_box(), |x| bump(x[0])).unwrap();
    let limit = Weight::new(WeightPreset::Sigmoid { a: 2.0, b: 2.0 }).unwrap();
    let family = WeightFamily::new(limit.clone(), Perturbation::Sine { amplitude: 0.5, frequency: 3.0 });
    let n_list = [1, 2, 4, 8, 16];
    for p in [1.0, 2.0] {
        let r = weight_stability_gap(&u, 0.6, p, &family, &n_list).unwrap();
        assert!(r.all_hold);
        // gap_n / eps_n stays bounded: the sequence decays at the rate of eps_n
        let ratios: Vec<f64> = r.rows.iter().map(|row| row.gap / row.eps).collect();
        let first = ratios[0];
        assert!(ratios.iter().all(|&q| q <= 1.5 * first), "{ratios:?}");
        assert!(r.rows.windows(2).all(|w| w[1].gap < w[0].gap));
    }
    let still = WeightFamily::new(limit, Perturbation::Constant { value: 0.0 });
    let r = weight_stability_gap(&u, 0.6, 2.0, &still, &n_list).unwrap();
    assert!(r.rows.iter().all(|row| row.gap == 0.0));
    let zero = GridFunction::zeros(&g, &g.bounding_box()).unwrap();
    let r = weight_stability_gap(&zero, 0.6, 2.0, &family, &n_list).unwrap();
    assert!(r.rows.iter().all(|row| row.gap == 0.0));
}

#[test]
fn mollifier_preserves_mass_and_converges() {
    let g = Grid::cube(1, -2.0, 2.0, 400).unwrap();
    let d = Domain::boxed(&[-1.0], &[2.0]).unwrap();
    let u = GridFunction::from_fn(&g, &d, |x| bump(x[0])).unwrap();
    let errs: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let m = mollify(&u, eps).unwrap();
            assert!((m.integral() - u.integral()).abs() < 1e-12);
            let sq: f64 = m.values().iter().zip(u.values()).map(|(a, b)| (a - b).powi(2)).sum();
            (sq * g.cell_volume()).sqrt()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn mollified_energy_on_shrunken_box_is_smaller() {
    let g = Grid::cube(1, -2.0, 2.0, 300).unwrap();
    let u = GridFunction::from_fn(&g, &g.bounding_box(), |x| bump(x[0]) + 0.2 * (4.0 * x[0]).sin()).unwrap();
    let f = Weight::new(WeightPreset::Sigmoid { a: 2.0, b: 2.0 }).unwrap();
    let cube = Domain::boxed(&[-1.2], &[2.4]).unwrap();
    for s in [0.3, 0.8] {
        for p in [1.0, 2.0] {
            let params = FractionalParams::new(s, p).unwrap();
            for eps in [0.05, 0.2] {
                let c = mollification_inequality(&u, eps, &params, &f, &cube).unwrap();
                assert!(c.holds(), "s={s} p={p} eps={eps}: {c:?}");
            }
        }
    }
}

#[test]
fn bbm_limit_for_the_bump() {
    let g = Grid::cube(1, -2.0, 2.0, 800).unwrap();
    let u = GridFunction::from_fn(&g, &g.bounding_box(), |x| bump(x[0])).unwrap();
    let s_list = [0.8, 0.9, 0.95, 0.99];
    let r = bbm_sweep(&u, 2.0, &Weight::one(), &s_list).unwrap();
    // K_{1,2} int |b'|^2 = 256/105
    assert!((r.extrapolated / (256.0 / 105.0) - 1.0).abs() < 0.05, "{r:?}");
    assert!(r.rel_gaps[1..].windows(2).all(|w| w[1] < w[0]), "{:?}", r.rel_gaps);
    let c = bbm_sweep(&u, 2.0, &Weight::constant(1.5).unwrap(), &s_list).unwrap();
    for (a, b) in r.scaled.iter().zip(&c.scaled) {
        assert!((b / a - 2.25).abs() < 1e-12);
    }
    assert!((c.target / r.target - 2.25).abs() < 1e-12);
    assert!(bbm_sweep(&u, 2.0, &Weight::one(), &[0.9, 0.8]).is_err());
}

#[test]
fn bbm_limit_for_an_indicator() {
    let g = Grid::cube(1, -1.0, 1.0, 400).unwrap();
    let d = Domain::boxed(&[-0.5], &[1.0]).unwrap();
    let u = GridFunction::from_fn(&g, &d, |_| 1.0).unwrap();
    let r = bbm_sweep(&u, 1.0, &Weight::one(), &[0.8, 0.9, 0.95, 0.99]).unwrap();
    assert!((r.target - 4.0).abs() < 1e-12);
    assert!((r.extrapolated / 4.0 - 1.0).abs() < 0.1, "{r:?}");
}

#[test]
fn recovery_gaps_shrink_along_the_diagonal() {
    let g = Grid::cube(1, -2.0, 2.0, 400).unwrap();
    let u = GridFunction::from_fn(&g, &g.bounding_box(), |x| bump(x[0])).unwrap();
    let s_list = [0.8, 0.9, 0.95, 0.99];
    let r = recovery_sequence(&u, 2.0, &Weight::one(), &[0.2, 0.1], &s_list).unwrap();
    assert!(r.diagonal_decreasing);
    assert!(r.rows[1].diagonal_gap < r.rows[0].diagonal_gap);
    let one = recovery_sequence(&u, 2.0, &Weight::constant(1.0).unwrap(), &[0.2, 0.1], &s_list).unwrap();
    assert_eq!(one, r);
    let zero = GridFunction::zeros(&g, &g.bounding_box()).unwrap();
    let z = recovery_sequence(&zero, 2.0, &Weight::one(), &[0.2, 0.1], &s_list).unwrap();
    assert!(z.target == 0.0 && z.rows.iter().all(|row| row.sweep.scaled.iter().all(|&v| v == 0.0)));
    // mass near the edge of the grid would be clipped by the mollifier
    let edge = GridFunction::from_fn(&g, &g.bounding_box(), |_| 1.0).unwrap();
    assert!(recovery_sequence(&edge, 2.0, &Weight::one(), &[0.2], &s_list).is_err());
}
