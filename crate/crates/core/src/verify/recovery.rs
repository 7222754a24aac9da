use crate::error::{invalid, Result};
use crate::flows::strictly_decreasing;
use crate::function::GridFunction;
use crate::weight::Weight;

use super::bbm::{bbm_sweep, check_s_list, local_target, SweepResult};
use super::mollify::mollify;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryRow {
    pub eps: f64,
    /// Sweep of the mollified function `mollify(u, eps)`.
    pub sweep: SweepResult,
    /// `|extrapolated - target(u)|`.
    pub limit_gap: f64,
    /// The `s` paired with this `eps` on the diagonal.
    pub diagonal_s: f64,
    /// `|(1 - s)[v]^p - target(u)|` at the diagonal pair.
    pub diagonal_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    /// `K_{d,p}` times the local energy of `u` itself.
    pub target: f64,
    pub rows: Vec<RecoveryRow>,
    pub diagonal_decreasing: bool,
}

/// Mollified approximants along a strictly decreasing `eps_list`, each swept
/// over `s_list`. The `k`-th mollifier is paired with the `k`-th of the last
/// `eps_list.len()` values of `s`, so both parameters move towards their
/// limits together.
pub fn recovery_sequence(
    u: &GridFunction,
    p: f64,
    f: &Weight,
    eps_list: &[f64],
    s_list: &[f64],
) -> Result<RecoveryReport> {
    check_s_list(s_list)?;
    if eps_list.is_empty() || !eps_list.windows(2).all(|w| w[0] > w[1]) {
        return Err(invalid("eps_list", "must be nonempty and strictly decreasing"));
    }
    if eps_list.len() > s_list.len() {
        return Err(invalid("eps_list", "needs at most as many entries as s_list"));
    }
    let g = u.grid();
    let dim = g.dim();
    let frame = g.bounding_box();
    let reach = eps_list[0];
    for i in u.support_indices() {
        let x = g.center(i);
        if u.values()[i] != 0.0 && frame.depth(&x[..dim]) < reach {
            return Err(invalid(
                "u",
                format!("must vanish within {reach} of the grid boundary"),
            ));
        }
    }

    let target = local_target(u, p, f)?;
    let offset = s_list.len() - eps_list.len();
    let mut rows = Vec::with_capacity(eps_list.len());
    for (k, &eps) in eps_list.iter().enumerate() {
        let v = mollify(u, eps)?;
        let sweep = bbm_sweep(&v, p, f, s_list)?;
        let j = offset + k;
        rows.push(RecoveryRow {
            eps,
            limit_gap: (sweep.extrapolated - target).abs(),
            diagonal_s: s_list[j],
            diagonal_gap: (sweep.scaled[j] - target).abs(),
            sweep,
        });
    }
    let diag: Vec<f64> = rows.iter().map(|r| r.diagonal_gap).collect();
    Ok(RecoveryReport {
        target,
        diagonal_decreasing: strictly_decreasing(&diag),
        rows,
    })
}
