use crate::energy::fractional_seminorm;
use crate::error::Result;
use crate::function::GridFunction;
use crate::params::FractionalParams;
use crate::weight::{Weight, WeightFamily};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightGapRow {
    pub n: u32,
    pub eps: f64,
    /// `|[u]^p_{s,p,f_n} - [u]^p_{s,p,f}|`.
    pub gap: f64,
    /// `2 [u]^p_{s,p} max(|f_n|_inf, |f|_inf) |f_n - f|_inf`.
    pub bound: f64,
}

impl WeightGapRow {
    pub fn holds(&self) -> bool {
        self.gap <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightGapReport {
    /// Unweighted `[u]^p_{s,p}`.
    pub unweighted: f64,
    pub rows: Vec<WeightGapRow>,
    pub all_hold: bool,
    /// `max_n gap_n / eps_n`.
    pub max_gap_over_eps: f64,
}

/// Compares the seminorm under each family member with the limit weight
/// against the termwise bound `|f_n f_n - f f| <= 2 max |f|_inf |f_n - f|_inf`.
/// The sup norms use the certified bounds of the weights.
pub fn weight_stability_gap(
    u: &GridFunction,
    s: f64,
    p: f64,
    family: &WeightFamily,
    n_list: &[u32],
) -> Result<WeightGapReport> {
    let params = &FractionalParams::new(s, p)?;
    let unweighted = fractional_seminorm(u, params, &Weight::one())?.value_p;
    let limit = fractional_seminorm(u, params, &family.limit)?.value_p;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let member = family.member(n);
        let value = fractional_seminorm(u, params, &member)?.value_p;
        let sup = member.sup_bound().max(family.limit.sup_bound());
        rows.push(WeightGapRow {
            n,
            eps: family.eps(n),
            gap: (value - limit).abs(),
            bound: 2.0 * unweighted * sup * family.distance_bound(n),
        });
    }
    Ok(WeightGapReport {
        unweighted,
        all_hold: rows.iter().all(WeightGapRow::holds),
        max_gap_over_eps: rows
            .iter()
            .filter(|r| r.eps > 0.0)
            .map(|r| r.gap / r.eps)
            .fold(0.0, f64::max),
        rows,
    })
}
