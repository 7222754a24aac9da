use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::function::GridFunction;
use crate::weight::WeightFamily;

use super::{Flow, FlowProblem, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub n: u32,
    pub s: f64,
    pub t: f64,
    /// `|u_n(t) - u_inf(t)|_2`.
    pub l2_error: f64,
    /// `|(1 - s_n)[u_n(t)]^2_{s_n,2,f_n} - K_{d,2} E_f(u_inf(t))|`.
    pub energy_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// `(1 - s_n)[u_0^n]^2_{s_n,2,f_n}` per schedule entry.
    pub initial_energies: Vec<f64>,
    /// Values at the horizon, one per schedule entry.
    pub final_errors: Vec<f64>,
    pub final_gaps: Vec<f64>,
    pub errors_decreasing: bool,
    pub gaps_decreasing: bool,
}

pub(crate) fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Runs the fractional flow for every `(n, s_n)` in `schedule` with initial
/// datum `u0_family(n)` and weight `weights.member(n)`, and the local flow
/// from `limit_initial` with the limit weight. States are compared at
/// `samples` evenly spaced times (always including the horizon).
pub fn stability_experiment<U>(
    u0_family: U,
    limit_initial: &GridFunction,
    weights: &WeightFamily,
    schedule: &[(u32, f64)],
    horizon: f64,
    dt: f64,
    samples: usize,
) -> Result<StabilityReport>
where
    U: Fn(u32) -> GridFunction + Sync,
{
    if schedule.is_empty() {
        return Err(invalid("s_list", "must not be empty"));
    }
    if !schedule.windows(2).all(|w| w[0].1 < w[1].1 && w[0].0 < w[1].0) {
        return Err(invalid("s_list", "s and n must both increase along the schedule"));
    }
    let initials: Vec<GridFunction> = schedule.iter().map(|&(n, _)| u0_family(n)).collect();
    for u in &initials {
        if !u.same_layout(limit_initial) {
            return Err(Error::GridMismatch);
        }
    }
    let dist: Vec<f64> = initials
        .iter()
        .map(|u| u.sub(limit_initial).map(|d| d.l2_norm()))
        .collect::<Result<_>>()?;
    if !dist.windows(2).all(|w| w[1] <= w[0]) {
        return Err(invalid(
            "u0_family",
            "initial data must approach the limit datum along the schedule",
        ));
    }

    let limit = FlowProblem::local(limit_initial.clone(), weights.limit.clone(), horizon)?.with_dt(dt)?;
    let steps = limit.steps();
    let every = (steps / samples.max(1)).max(1);
    let reference = Flow::new(limit)?;
    let ref_traj = reference.run_sampled(every)?;

    let runs: Vec<(f64, Trajectory)> = schedule
        .par_iter()
        .zip(initials.into_par_iter())
        .map(|(&(n, s), u0)| {
            let p = FlowProblem::fractional(u0, s, weights.member(n), horizon)?.with_dt(dt)?;
            let flow = Flow::new(p)?;
            let traj = flow.run_sampled(every)?;
            Ok((traj.energies[0], traj))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut initial_energies = Vec::new();
    let mut final_errors = Vec::new();
    let mut final_gaps = Vec::new();
    for (&(n, s), (e0, traj)) in schedule.iter().zip(&runs) {
        initial_energies.push(*e0);
        for k in 0..traj.times.len() {
            let l2_error = traj.states[k].sub(&ref_traj.states[k])?.l2_norm();
            let energy_gap = (traj.energies[k] - ref_traj.energies[k]).abs();
            rows.push(StabilityRow {
                n,
                s,
                t: traj.times[k],
                l2_error,
                energy_gap,
            });
        }
        let last = traj.times.len() - 1;
        final_errors.push(traj.states[last].sub(&ref_traj.states[last])?.l2_norm());
        final_gaps.push((traj.energies[last] - ref_traj.energies[last]).abs());
    }
    Ok(StabilityReport {
        errors_decreasing: strictly_decreasing(&final_errors),
        gaps_decreasing: strictly_decreasing(&final_gaps),
        rows,
        initial_energies,
        final_errors,
        final_gaps,
    })
}
