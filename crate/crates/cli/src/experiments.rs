//! One runner per experiment kind. Each returns the table that becomes the CSV.

use gagliardo::verify::{
    hardy_check, local_target, mollification_inequality, translation_estimate_check, weight_stability_gap, StepFunction,
};
use gagliardo::{
    bbm_sweep, first_variation_check, fractional_seminorm, kdp_closed_form, kdp_quadrature, seminorm_bilinear, stability_experiment,
    Domain, Flow, FlowProblem, FractionalParams, Grid, GridFunction, OperatorHandle, WeightFamily,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ExperimentKind, FlowKindSpec};
use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::presets;

/// Outcome of a run: the table and whether every built-in check passed.
pub struct Outcome {
    pub table: Table,
    pub failed_checks: usize,
    pub total_checks: usize,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self {
            table,
            failed_checks: 0,
            total_checks: 0,
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    Ok(match cfg.kind {
        ExperimentKind::Kdp => kdp(cfg)?.into(),
        ExperimentKind::Seminorm => seminorm(cfg)?.into(),
        ExperimentKind::BbmSweep => sweep(cfg)?.into(),
        ExperimentKind::Flow => flow(cfg)?.into(),
        ExperimentKind::Stability => stability(cfg)?.into(),
        ExperimentKind::VerifySuite => verify_suite(cfg)?,
    })
}

fn kdp(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&["d", "p", "s", "closed_form", "quadrature", "rel_gap"]);
    let mut worst: f64 = 0.0;
    for &d in &cfg.kdp.dims {
        for &p in &cfg.kdp.p_list {
            let exact = kdp_closed_form(d, p)?;
            for &s in &cfg.kdp.s_list {
                let quad = kdp_quadrature(d, p, s, None)?;
                let gap = (quad - exact).abs() / exact;
                worst = worst.max(gap);
                t.push(vec![d.into(), p.into(), s.into(), exact.into(), quad.into(), gap.into()]);
            }
        }
    }
    t.note_real("max_rel_gap", worst);
    Ok(t)
}

fn seminorm(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let u = presets::function(cfg)?;
    let fr = &cfg.fractional;
    let params = FractionalParams::new(fr.s, fr.p)?
        .with_refine(fr.refine)
        .with_diag_mode(fr.diag_mode);
    let f = cfg.weight();
    let r = fractional_seminorm(&u, &params, &f)?;
    let target = local_target(&u, fr.p, &f)?;
    let mut t = Table::new(&[
        "s", "p", "value_p", "scaled", "near", "far", "exterior", "diagonal", "local_target",
    ]);
    let b = r.breakdown;
    t.push(vec![
        fr.s.into(),
        fr.p.into(),
        r.value_p.into(),
        r.scaled.into(),
        b.near.into(),
        b.far.into(),
        b.exterior.into(),
        b.diagonal.into(),
        target.into(),
    ]);
    Ok(t)
}

fn sweep(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let u = presets::function(cfg)?;
    let r = bbm_sweep(&u, cfg.sweep.p, &cfg.weight(), &cfg.sweep.s_list)?;
    let mut t = Table::new(&["s", "scaled_energy", "target", "rel_gap", "extrapolated"]);
    for k in 0..r.s_values.len() {
        t.push(vec![
            r.s_values[k].into(),
            r.scaled[k].into(),
            r.target.into(),
            r.rel_gaps[k].into(),
            r.extrapolated.into(),
        ]);
    }
    t.note_real("extrapolated_rel_gap", r.extrapolated_rel_gap);
    Ok(t)
}

fn flow(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let u0 = presets::function(cfg)?;
    let fl = &cfg.flow;
    let problem = match fl.kind {
        FlowKindSpec::Fractional => FlowProblem::fractional(u0, fl.s, cfg.weight(), fl.horizon)?,
        FlowKindSpec::Local => FlowProblem::local(u0, cfg.weight(), fl.horizon)?,
    }
    .with_dt(fl.dt)?
    .with_solver(fl.tol, fl.max_iter)?;
    let steps = problem.steps();
    let every = steps.div_ceil(fl.samples).max(1);
    let flow = Flow::new(problem)?;
    let traj = flow.run_sampled(every)?;
    let mut t = Table::new(&["t", "energy", "l2_norm", "cg_iterations"]);
    for (k, state) in traj.states.iter().enumerate() {
        let step = if k == traj.states.len() - 1 { steps } else { k * every };
        let iters: usize = traj.solver_iterations[..step].iter().sum();
        t.push(vec![traj.times[k].into(), traj.energies[k].into(), state.l2_norm().into(), iters.into()]);
    }
    t.note("steps", steps.to_string());
    t.note_real("effective_dt", flow.problem().effective_dt());
    Ok(t)
}

fn stability(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let limit = presets::function(cfg)?;
    let st = &cfg.stability;
    let wobble = limit.with_values(
        limit
            .grid()
            .centers()
            .iter()
            .map(|x| (st.u_frequency * x[0]).sin())
            .collect(),
    );
    let family = WeightFamily::new(cfg.weight(), cfg.weight_perturbation());
    let schedule: Vec<(u32, f64)> = st.n_list.iter().copied().zip(st.s_list.iter().copied()).collect();
    let u0 = |n: u32| {
        limit
            .axpy(st.u_amplitude / n as f64, &wobble)
            .expect("same layout")
    };
    let report = stability_experiment(u0, &limit, &family, &schedule, st.horizon, st.dt, st.samples)?;
    let mut t = Table::new(&["n", "s_n", "t", "l2_error", "energy_gap"]);
    for row in &report.rows {
        t.push(vec![row.n.into(), row.s.into(), row.t.into(), row.l2_error.into(), row.energy_gap.into()]);
    }
    t.note("errors_decreasing", report.errors_decreasing.to_string());
    t.note("gaps_decreasing", report.gaps_decreasing.to_string());
    Ok(t)
}

fn bump(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).powi(2)
}

struct Check {
    name: &'static str,
    passed: bool,
    value: f64,
    limit: f64,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            passed: value <= limit,
            value,
            limit,
        }
    }
}

fn random_step(rng: &mut ChaCha8Rng, r: f64) -> Result<StepFunction, CliError> {
    let pieces = rng.gen_range(1..6);
    let mut breaks: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(0.01 * r..1.2 * r)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    if breaks.len() < 2 {
        return Ok(StepFunction::zero());
    }
    let values = (1..breaks.len()).map(|_| rng.gen_range(0.0..3.0)).collect();
    Ok(StepFunction::new(breaks, values)?)
}

fn random_on(g: &Grid, d: &Domain, rng: &mut ChaCha8Rng) -> Result<GridFunction, CliError> {
    let z = GridFunction::zeros(g, d)?;
    let vals = z.values().iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    Ok(z.with_values(vals))
}

fn verify_suite(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let v = &cfg.verify;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = cfg.weight();
    let g = Grid::cube(1, -2.0, 2.0, v.cells)?;
    let whole = g.bounding_box();
    let u = GridFunction::from_fn(&g, &whole, |x| bump(x[0]) + 0.2 * (3.0 * x[0]).sin() * bump(x[0] / 1.5))?;
    let mut checks = Vec::new();

    let mut worst: f64 = 0.0;
    for d in 1..=3 {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let exact = kdp_closed_form(d, p)?;
            for s in [0.1, 0.5, 0.9] {
                worst = worst.max((kdp_quadrature(d, p, s, None)? / exact - 1.0).abs());
            }
        }
    }
    checks.push(Check::at_most("kdp_closed_form", worst, 1e-6));

    let mut ratio: f64 = 0.0;
    for _ in 0..v.hardy_instances {
        let d = rng.gen_range(1..=3);
        let l = rng.gen_range(0.0..3.0);
        let r = rng.gen_range(0.5..4.0);
        let res = hardy_check(&random_step(&mut rng, r)?, d, l, r)?;
        if res.rhs > 0.0 {
            ratio = ratio.max(res.lhs / res.rhs);
        }
    }
    checks.push(Check::at_most("hardy_lhs_over_rhs", ratio, 1.0));

    let inner = Domain::boxed(&[-1.0], &[2.0])?;
    let mut var_err: f64 = 0.0;
    let mut pairing_err: f64 = 0.0;
    for _ in 0..v.variation_instances {
        let s = rng.gen_range(0.1..0.9);
        let w = random_on(&g, &whole, &mut rng)?;
        let phi = random_on(&g, &inner, &mut rng)?;
        var_err = var_err.max(first_variation_check(&w, &phi, s, &f, &[1e-1, 1e-2, 1e-3])?.max_rel_error);
        let params = FractionalParams::new(s, 2.0)?;
        // the bilinear form pairs functions on a shared support
        let phi = w.with_values(phi.values().to_vec());
        let b = seminorm_bilinear(&w, &phi, s, &f)?;
        let op = OperatorHandle::fractional(&w, &params, &f)?;
        let pairing = op.apply(&w)?.inner(&phi)?;
        pairing_err = pairing_err.max((pairing - 2.0 * b).abs() / b.abs().max(1e-300));
    }
    checks.push(Check::at_most("first_variation_rel_error", var_err, 1e-12));
    checks.push(Check::at_most("operator_pairing_rel_error", pairing_err, 1e-11));

    let family = WeightFamily::new(f.clone(), cfg.weight_perturbation());
    let gap = weight_stability_gap(&u, 0.6, 2.0, &family, &[1, 2, 4, 8, 16])?;
    let excess = gap
        .rows
        .iter()
        .map(|row| if row.bound > 0.0 { row.gap / row.bound } else { 0.0 })
        .fold(0.0, f64::max);
    checks.push(Check::at_most("weight_gap_over_bound", excess, 1.0));

    let cube = Domain::boxed(&[-1.2], &[2.4])?;
    let mut moll: f64 = 0.0;
    for s in [0.3, 0.8] {
        let c = mollification_inequality(&u, 0.2, &FractionalParams::new(s, 2.0)?, &f, &cube)?;
        moll = moll.max(c.mollified / c.original);
    }
    checks.push(Check::at_most("mollified_over_original", moll, 1.0));

    let problem = FlowProblem::fractional(u.clone(), 0.5, f.clone(), 0.05)?.with_dt(0.005)?;
    let other = problem.clone().with_initial(GridFunction::from_fn(&g, &whole, |x| bump(x[0] / 1.8))?);
    let (a, b) = (Flow::new(problem.clone())?.run()?, Flow::new(other)?.run()?);
    let rise = a
        .energies
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].max(1e-300))
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("flow_energy_rise", rise, problem.solver_tol));
    let dist: Vec<f64> = a.states.iter().zip(&b.states).map(|(x, y)| x.sub(y).map(|z| z.l2_norm())).collect::<Result<_, _>>()?;
    let growth = dist.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    checks.push(Check::at_most("flow_distance_growth", growth, 1.0 + 1e-9));

    let sweep = bbm_sweep(&u, 2.0, &f, &[0.8, 0.9, 0.95, 0.99])?;
    checks.push(Check::at_most("bbm_extrapolated_rel_gap", sweep.extrapolated_rel_gap, 0.05));

    let h = 4.0 / v.cells as f64;
    let shifts: Vec<Vec<f64>> = [1.0, 2.0, 4.0].iter().map(|k| vec![k * h]).collect();
    let tr = translation_estimate_check(&u, &f, 0.5, 2.0, &inner, &shifts)?;
    let coarse = {
        let gc = Grid::cube(1, -2.0, 2.0, v.cells / 2)?;
        let uc = GridFunction::from_fn(&gc, &gc.bounding_box(), |x| bump(x[0]) + 0.2 * (3.0 * x[0]).sin() * bump(x[0] / 1.5))?;
        let shifts: Vec<Vec<f64>> = [1.0, 2.0, 4.0].iter().map(|k| vec![2.0 * k * h]).collect();
        translation_estimate_check(&uc, &f, 0.5, 2.0, &inner, &shifts)?
    };
    let drift = (tr.max_ratio / coarse.max_ratio).ln().abs();
    checks.push(Check::at_most("translation_ratio_log_drift", drift, 2f64.ln()));

    let mut t = Table::new(&["check", "passed", "value", "limit"]);
    for c in &checks {
        t.push(vec![
            c.name.into(),
            Cell::Text(if c.passed { "pass" } else { "fail" }.into()),
            c.value.into(),
            c.limit.into(),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    t.note("passed", format!("{}/{}", checks.len() - failed, checks.len()));
    Ok(Outcome {
        table: t,
        failed_checks: failed,
        total_checks: checks.len(),
    })
}

/// `(name, passed)` for each row of a verify-suite table.
pub fn summary(table: &Table) -> Vec<(String, bool)> {
    table
        .rows
        .iter()
        .filter_map(|row| match (&row[0], &row[1]) {
            (Cell::Text(name), Cell::Text(status)) => Some((name.clone(), status == "pass")),
            _ => None,
        })
        .collect()
}

