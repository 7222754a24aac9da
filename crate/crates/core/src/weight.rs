//! Bounded Lipschitz positive weights and uniformly converging weight families.

use crate::error::{invalid, Result};

/// Analytic weight families. Every preset depends on the first coordinate only.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightPreset {
    /// `f(x) = value`.
    Constant { value: f64 },
    /// `f(x) = clamp(offset + slope * x1, lo, hi)`.
    AffineClamped {
        offset: f64,
        slope: f64,
        lo: f64,
        hi: f64,
    },
    /// `f(x) = 1 + a * sigmoid(b * x1)`.
    Sigmoid { a: f64, b: f64 },
    /// `f(x) = 2 + a * cos(omega * x1) * exp(-(x1 / width)^2)`.
    CosTaper { a: f64, omega: f64, width: f64 },
}

/// Bounded perturbation fields `g` used to build weight families.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    Constant { value: f64 },
    /// `g(x) = amplitude * sin(frequency * x1)`.
    Sine { amplitude: f64, frequency: f64 },
}

impl Perturbation {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Perturbation::Constant { value } => value,
            Perturbation::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * x[0]).sin(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match *self {
            Perturbation::Constant { value } => value.abs(),
            Perturbation::Sine { amplitude, .. } => amplitude.abs(),
        }
    }

    pub fn lip_const(&self) -> f64 {
        match *self {
            Perturbation::Constant { .. } => 0.0,
            Perturbation::Sine {
                amplitude,
                frequency,
            } => (amplitude * frequency).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Preset(WeightPreset),
    Perturbed {
        base: Box<Weight>,
        perturbation: Perturbation,
        eps: f64,
        floor: f64,
    },
    Squared(Box<Weight>),
}

/// Strictly positive, bounded, Lipschitz scalar field with certified bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    kind: Kind,
    lip_const: f64,
    inf_bound: f64,
    sup_bound: f64,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Weight {
    pub fn new(preset: WeightPreset) -> Result<Self> {
        let finite = |v: f64| v.is_finite();
        let (lip, inf, sup) = match preset {
            WeightPreset::Constant { value } => {
                if !(finite(value) && value > 0.0) {
                    return Err(invalid("weight.value", "must be finite and > 0"));
                }
                (0.0, value, value)
            }
            WeightPreset::AffineClamped {
                offset,
                slope,
                lo,
                hi,
            } => {
                if ![offset, slope, lo, hi].iter().all(|v| v.is_finite()) {
                    return Err(invalid("weight", "affine-clamped parameters must be finite"));
                }
                if !(lo > 0.0 && hi >= lo) {
                    return Err(invalid("weight.lo", "need 0 < lo <= hi"));
                }
                (slope.abs(), lo, hi)
            }
            WeightPreset::Sigmoid { a, b } => {
                if !(finite(a) && finite(b) && a > -1.0) {
                    return Err(invalid("weight.a", "need a > -1 so that 1 + a*sigmoid > 0"));
                }
                ((a * b).abs() / 4.0, 1.0f64.min(1.0 + a), 1.0f64.max(1.0 + a))
            }
            WeightPreset::CosTaper { a, omega, width } => {
                if !(finite(a) && finite(omega) && finite(width) && a.abs() < 2.0 && width > 0.0)
                {
                    return Err(invalid("weight.a", "need |a| < 2 and width > 0"));
                }
                let lip = a.abs() * (omega.abs() + (2.0 / std::f64::consts::E).sqrt() / width);
                (lip, 2.0 - a.abs(), 2.0 + a.abs())
            }
        };
        Ok(Weight {
            kind: Kind::Preset(preset),
            lip_const: lip,
            inf_bound: inf,
            sup_bound: sup,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Weight::new(WeightPreset::Constant { value })
    }

    pub fn one() -> Self {
        Weight::constant(1.0).expect("unit weight")
    }

    /// `max(base + eps * g, floor)`; the floor keeps the field positive.
    pub fn perturbed(base: &Weight, perturbation: Perturbation, eps: f64, floor: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(invalid("eps", "must be finite and >= 0"));
        }
        if !(floor > 0.0) {
            return Err(invalid("floor", "must be > 0"));
        }
        let shift = eps * perturbation.sup_abs();
        Ok(Weight {
            lip_const: base.lip_const + eps * perturbation.lip_const(),
            inf_bound: (base.inf_bound - shift).max(floor),
            sup_bound: (base.sup_bound + shift).max(floor),
            kind: Kind::Perturbed {
                base: Box::new(base.clone()),
                perturbation,
                eps,
                floor,
            },
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Preset(p) => match *p {
                WeightPreset::Constant { value } => value,
                WeightPreset::AffineClamped {
                    offset,
                    slope,
                    lo,
                    hi,
                } => (offset + slope * x[0]).clamp(lo, hi),
                WeightPreset::Sigmoid { a, b } => 1.0 + a * sigmoid(b * x[0]),
                WeightPreset::CosTaper { a, omega, width } => {
                    let t = x[0] / width;
                    2.0 + a * (omega * x[0]).cos() * (-t * t).exp()
                }
            },
            Kind::Perturbed {
                base,
                perturbation,
                eps,
                floor,
            } => (base.eval(x) + eps * perturbation.eval(x)).max(*floor),
            Kind::Squared(w) => {
                let v = w.eval(x);
                v * v
            }
        }
    }

    /// Value of the weight when it is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match &self.kind {
            Kind::Preset(WeightPreset::Constant { value }) => Some(*value),
            Kind::Perturbed {
                base,
                perturbation: Perturbation::Constant { value },
                eps,
                floor,
            } => base
                .as_constant()
                .map(|b| (b + eps * value).max(*floor)),
            Kind::Squared(w) => w.as_constant().map(|c| c * c),
            _ => None,
        }
    }

    pub fn lip_const(&self) -> f64 {
        self.lip_const
    }

    pub fn inf_bound(&self) -> f64 {
        self.inf_bound
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// The pointwise square `f^2`, the density of the local limit energy.
    pub fn squared(&self) -> Weight {
        Weight {
            lip_const: 2.0 * self.sup_bound * self.lip_const,
            inf_bound: self.inf_bound * self.inf_bound,
            sup_bound: self.sup_bound * self.sup_bound,
            kind: Kind::Squared(Box::new(self.clone())),
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::Preset(p) => format!("{p:?}"),
            Kind::Perturbed {
                base,
                perturbation,
                eps,
                floor,
            } => format!(
                "Perturbed {{ base: {}, g: {perturbation:?}, eps: {eps}, floor: {floor} }}",
                base.describe()
            ),
            Kind::Squared(w) => format!("Squared({})", w.describe()),
        }
    }
}

/// Decay of the perturbation size along a weight family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// `eps_n = 1 / n`.
    Inverse,
    /// `eps_n = n^(-q)`.
    Power(f64),
}

impl Rate {
    pub fn eps(&self, n: u32) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            Rate::Inverse => 1.0 / n,
            Rate::Power(q) => n.powf(-q),
        }
    }
}

/// `f_n = max(f + eps_n g, inf(f)/2)`, converging uniformly to `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFamily {
    pub limit: Weight,
    pub perturbation: Perturbation,
    pub rate: Rate,
}

impl WeightFamily {
    pub fn new(limit: Weight, perturbation: Perturbation) -> Self {
        WeightFamily {
            limit,
            perturbation,
            rate: Rate::Inverse,
        }
    }

    pub fn with_rate(mut self, rate: Rate) -> Self {
        self.rate = rate;
        self
    }

    pub fn eps(&self, n: u32) -> f64 {
        self.rate.eps(n)
    }

    pub fn member(&self, n: u32) -> Weight {
        Weight::perturbed(
            &self.limit,
            self.perturbation.clone(),
            self.eps(n),
            self.limit.inf_bound() / 2.0,
        )
        .expect("family members are valid by construction")
    }

    /// Certified upper bound on `||f_n - f||_inf`.
    pub fn distance_bound(&self, n: u32) -> f64 {
        self.eps(n) * self.perturbation.sup_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn presets() -> Vec<Weight> {
        vec![
            Weight::constant(1.5).unwrap(),
            Weight::new(WeightPreset::AffineClamped {
                offset: 1.0,
                slope: 0.7,
                lo: 0.5,
                hi: 2.0,
            })
            .unwrap(),
            Weight::new(WeightPreset::Sigmoid { a: 2.0, b: 2.0 }).unwrap(),
            Weight::new(WeightPreset::CosTaper {
                a: 0.8,
                omega: 3.0,
                width: 1.5,
            })
            .unwrap(),
        ]
    }

    #[test]
    fn sigmoid_preset_is_two_plus_tanh() {
        let f = Weight::new(WeightPreset::Sigmoid { a: 2.0, b: 2.0 }).unwrap();
        for &x in &[-3.0, -0.4, 0.0, 0.9, 5.0] {
            assert!((f.eval(&[x]) - (2.0 + f64::tanh(x))).abs() < 1e-14);
        }
    }

    #[test]
    fn certified_bounds_hold_on_random_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = Perturbation::Sine {
            amplitude: 0.6,
            frequency: 2.0,
        };
        let mut all = presets();
        all.push(Weight::perturbed(&all[2], g, 0.5, all[2].inf_bound() / 2.0).unwrap());
        for f in &all {
            for _ in 0..2000 {
                let x: f64 = rng.gen_range(-6.0..6.0);
                let y: f64 = rng.gen_range(-6.0..6.0);
                let (fx, fy) = (f.eval(&[x]), f.eval(&[y]));
                assert!(fx >= f.inf_bound() - 1e-14 && fx <= f.sup_bound() + 1e-14);
                assert!((fx - fy).abs() <= f.lip_const() * (x - y).abs() + 1e-12);
            }
        }
    }

    #[test]
    fn family_converges_uniformly() {
        let fam = WeightFamily::new(
            presets()[2].clone(),
            Perturbation::Sine {
                amplitude: 0.5,
                frequency: 3.0,
            },
        );
        for n in [1, 2, 4, 8, 16] {
            let m = fam.member(n);
            let worst = (-400..=400)
                .map(|k| {
                    let x = [k as f64 * 0.01];
                    (m.eval(&x) - fam.limit.eval(&x)).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst <= fam.distance_bound(n) + 1e-15);
            assert!(m.inf_bound() >= fam.limit.inf_bound() / 2.0);
        }
    }

    #[test]
    fn invalid_presets_rejected() {
        assert!(Weight::constant(0.0).is_err());
        assert!(Weight::new(WeightPreset::Sigmoid { a: -1.0, b: 1.0 }).is_err());
        assert!(Weight::new(WeightPreset::CosTaper {
            a: 2.5,
            omega: 1.0,
            width: 1.0
        })
        .is_err());
    }
}
