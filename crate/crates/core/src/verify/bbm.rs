use rayon::prelude::*;

use crate::energy::{dirichlet_energy, fractional_seminorm, kdp_closed_form};
use crate::error::{invalid, Result};
use crate::function::{weighted_total_variation, GridFunction};
use crate::params::FractionalParams;
use crate::weight::Weight;

/// How many of the largest `s` values enter the extrapolation.
pub const EXTRAPOLATION_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub p: f64,
    pub s_values: Vec<f64>,
    /// `(1 - s)[u]^p_{s,p,f}` per `s`.
    pub scaled: Vec<f64>,
    /// `K_{d,p}` times the local energy with weight `f^2`.
    pub target: f64,
    /// `|scaled - target| / target` (absolute gap when the target is 0).
    pub rel_gaps: Vec<f64>,
    /// Intercept of the least-squares line through the last points in `1 - s`.
    pub extrapolated: f64,
    pub extrapolated_rel_gap: f64,
}

fn rel_gap(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        value.abs()
    } else {
        (value - target).abs() / target.abs()
    }
}

/// Intercept at `x = 0` of the least-squares line through `(x_i, y_i)`.
/// A single point is returned as is.
pub(crate) fn linear_intercept(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return y.first().copied().unwrap_or(0.0);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    my - sxy / sxx * mx
}

/// Local limit `K_{d,p} |grad u|^p_{p, f^2}`, with the weighted total
/// variation standing in for `p = 1`.
pub fn local_target(u: &GridFunction, p: f64, f: &Weight) -> Result<f64> {
    let k = kdp_closed_form(u.grid().dim(), p)?;
    if p == 1.0 {
        Ok(k * weighted_total_variation(u, &f.squared()))
    } else {
        Ok(k * dirichlet_energy(u, p, f)?)
    }
}

pub(crate) fn check_s_list(s_list: &[f64]) -> Result<()> {
    if s_list.is_empty() {
        return Err(invalid("s_list", "must not be empty"));
    }
    if !s_list.iter().all(|&s| s > 0.0 && s < 1.0) {
        return Err(invalid("s_list", "values must lie in (0, 1)"));
    }
    if !s_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(invalid("s_list", "values must be strictly increasing"));
    }
    Ok(())
}

/// Scaled energies `(1 - s)[u]^p_{s,p,f}` over `s_list` against their local
/// limit.
pub fn bbm_sweep(u: &GridFunction, p: f64, f: &Weight, s_list: &[f64]) -> Result<SweepResult> {
    check_s_list(s_list)?;
    let scaled: Vec<f64> = s_list
        .par_iter()
        .map(|&s| {
            let params = FractionalParams::new(s, p)?;
            Ok((1.0 - s) * fractional_seminorm(u, &params, f)?.value_p)
        })
        .collect::<Result<_>>()?;
    let target = local_target(u, p, f)?;
    Ok(summarize(p, s_list.to_vec(), scaled, target))
}

pub(crate) fn summarize(p: f64, s_values: Vec<f64>, scaled: Vec<f64>, target: f64) -> SweepResult {
    let tail = s_values.len().saturating_sub(EXTRAPOLATION_POINTS);
    let x: Vec<f64> = s_values[tail..].iter().map(|s| 1.0 - s).collect();
    let extrapolated = linear_intercept(&x, &scaled[tail..]);
    SweepResult {
        p,
        rel_gaps: scaled.iter().map(|&v| rel_gap(v, target)).collect(),
        extrapolated_rel_gap: rel_gap(extrapolated, target),
        extrapolated,
        target,
        s_values,
        scaled,
    }
}
