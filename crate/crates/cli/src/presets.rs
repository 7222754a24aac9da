//! Turns the parsed config into library objects.

use gagliardo::{Domain, Grid, GridFunction, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, FunctionPreset, FunctionSpec};

pub fn grid(cfg: &ExperimentConfig) -> Result<Grid> {
    let g = &cfg.grid;
    let extent: Vec<f64> = g.lo.iter().zip(&g.hi).map(|(a, b)| b - a).collect();
    Grid::new(&g.lo, &extent, &g.cells)
}

pub fn domain(cfg: &ExperimentConfig) -> Result<Domain> {
    let d = &cfg.domain;
    let extent: Vec<f64> = d.lo.iter().zip(&d.hi).map(|(a, b)| b - a).collect();
    Domain::boxed(&d.lo, &extent)
}

fn eval(spec: &FunctionSpec, x: &[f64]) -> f64 {
    let a = spec.amplitude;
    match spec.preset {
        FunctionPreset::Bump => {
            let r2: f64 = x.iter().zip(&spec.center).map(|(x, c)| (x - c).powi(2)).sum::<f64>() / spec.radius.powi(2);
            a * (1.0 - r2).max(0.0).powi(2)
        }
        FunctionPreset::Indicator => {
            let inside = x.iter().zip(&spec.center).all(|(x, c)| (x - c).abs() < spec.radius);
            if inside {
                a
            } else {
                0.0
            }
        }
        FunctionPreset::Sine => a * x.iter().map(|x| (spec.frequency * x + spec.phase).sin()).product::<f64>(),
        FunctionPreset::Cosine => a * x.iter().map(|x| (spec.frequency * x + spec.phase).cos()).product::<f64>(),
        FunctionPreset::Random => unreachable!("sampled separately"),
    }
}

/// The configured function on the configured grid and domain.
pub fn function(cfg: &ExperimentConfig) -> Result<GridFunction> {
    let g = grid(cfg)?;
    let d = domain(cfg)?;
    let spec = &cfg.function;
    if spec.preset == FunctionPreset::Random {
        let z = GridFunction::zeros(&g, &d)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let a = spec.amplitude.abs();
        let vals = z
            .support_mask()
            .iter()
            .map(|&inside| {
                let v = if a > 0.0 { rng.gen_range(-a..=a) } else { 0.0 };
                if inside {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        return Ok(z.with_values(vals));
    }
    GridFunction::from_fn(&g, &d, |x| eval(spec, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn random_preset_is_reproducible() {
        let text = "[experiment]\nkind = seminorm\nseed = 5\n[grid]\ncells = 30\n[domain]\nlo = -0.5\nhi = 0.5\n\
                    [function]\npreset = random\n[fractional]\n";
        let cfg = parse_config(text).unwrap();
        let a = function(&cfg).unwrap();
        let b = function(&cfg).unwrap();
        assert_eq!(a.values(), b.values());
        let mask = a.support_mask();
        assert!(a.values().iter().zip(mask).all(|(v, &m)| m || *v == 0.0));
        assert!(a.values().iter().any(|v| *v != 0.0));
    }

    #[test]
    fn indicator_counts_cells_inside() {
        let text = "[experiment]\nkind = seminorm\n[grid]\ncells = 40\n[function]\npreset = indicator\nradius = 0.5\n[fractional]\n";
        let u = function(&parse_config(text).unwrap()).unwrap();
        assert!((u.integral() - 1.0).abs() < 1e-12);
    }
}
