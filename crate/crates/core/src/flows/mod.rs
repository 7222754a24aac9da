//! Implicit Euler integration of the fractional and local gradient flows.
//!
//! Both flows are taken with the dissipative sign `du/dt = -c A u`, where `A`
//! is the positive semidefinite operator and `c` is `1 - s` for the
//! fractional flow and `K_{d,2}` for the local one.

mod cg;
mod stability;

pub use cg::{conjugate_gradient, CgOutcome};
pub use stability::{stability_experiment, StabilityReport, StabilityRow};
pub(crate) use stability::strictly_decreasing;

use crate::energy::kdp_closed_form;
use crate::error::{invalid, Result};
use crate::function::GridFunction;
use crate::operators::OperatorHandle;
use crate::params::FractionalParams;
use crate::weight::Weight;

pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Default number of steps over the horizon.
pub const DEFAULT_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum FlowKind {
    Fractional { params: FractionalParams, f: Weight },
    Local { f: Weight },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowProblem {
    pub kind: FlowKind,
    pub initial: GridFunction,
    pub horizon: f64,
    pub dt: f64,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl FlowProblem {
    /// `du/dt = -(1 - s) A_{s,f} u` with the default step `T / 200`.
    pub fn fractional(initial: GridFunction, s: f64, f: Weight, horizon: f64) -> Result<Self> {
        let params = FractionalParams::new(s, 2.0)?;
        Self::build(FlowKind::Fractional { params, f }, initial, horizon)
    }

    /// `du/dt = -K_{d,2} L_f u` with the default step `T / 200`.
    pub fn local(initial: GridFunction, f: Weight, horizon: f64) -> Result<Self> {
        Self::build(FlowKind::Local { f }, initial, horizon)
    }

    fn build(kind: FlowKind, initial: GridFunction, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", "must be finite and > 0"));
        }
        Ok(FlowProblem {
            kind,
            initial,
            horizon,
            dt: horizon / DEFAULT_STEPS as f64,
            solver_tol: DEFAULT_SOLVER_TOL,
            solver_max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= self.horizon) {
            return Err(invalid("dt", format!("need 0 < dt <= T = {}", self.horizon)));
        }
        self.dt = dt;
        Ok(self)
    }

    pub fn with_solver(mut self, tol: f64, max_iter: usize) -> Result<Self> {
        if !(tol > 0.0) || max_iter == 0 {
            return Err(invalid("solver_tol", "need tol > 0 and max_iter >= 1"));
        }
        self.solver_tol = tol;
        self.solver_max_iter = max_iter;
        Ok(self)
    }

    pub fn with_initial(mut self, initial: GridFunction) -> Self {
        self.initial = initial;
        self
    }

    /// Number of steps `ceil(T / dt)`.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    /// The step actually taken, `T / steps`, so the last state lands on `T`.
    pub fn effective_dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    /// `1 - s` or `K_{d,2}`.
    pub fn prefactor(&self) -> Result<f64> {
        match &self.kind {
            FlowKind::Fractional { params, .. } => Ok(1.0 - params.s()),
            FlowKind::Local { .. } => kdp_closed_form(self.initial.grid().dim(), 2.0),
        }
    }
}

/// A flow with its operator assembled once.
#[derive(Debug, Clone)]
pub struct Flow {
    problem: FlowProblem,
    op: OperatorHandle,
    c: f64,
}

/// Time-indexed states with their energies.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
    pub energies: Vec<f64>,
    /// CG iterations per step (none for the initial state).
    pub solver_iterations: Vec<usize>,
}

impl Trajectory {
    pub fn last(&self) -> &GridFunction {
        self.states.last().expect("trajectories hold at least the initial state")
    }
}

impl Flow {
    pub fn new(problem: FlowProblem) -> Result<Self> {
        let op = match &problem.kind {
            FlowKind::Fractional { params, f } => OperatorHandle::fractional(&problem.initial, params, f)?,
            FlowKind::Local { f } => OperatorHandle::local(&problem.initial, f),
        };
        let c = problem.prefactor()?;
        Ok(Flow { problem, op, c })
    }

    pub fn problem(&self) -> &FlowProblem {
        &self.problem
    }

    pub fn operator(&self) -> &OperatorHandle {
        &self.op
    }

    /// `F(u) = c/2 <A u, u> h^d`, i.e. `(1-s)[u]^2_{s,2,f}` or
    /// `K_{d,2} dirichlet_energy(u, 2, f)`.
    pub fn energy(&self, u: &GridFunction) -> Result<f64> {
        let x = self.op.gather(u)?;
        Ok(self.energy_reduced(&x))
    }

    fn energy_reduced(&self, x: &[f64]) -> f64 {
        let ax = self.op.apply_reduced(x);
        0.5 * self.c * cg::dot(&ax, x) * self.op.grid().cell_volume()
    }

    /// One implicit step of size `dt`: solves `(I + dt c A) u+ = u`.
    pub fn step_with(&self, u: &GridFunction, dt: f64) -> Result<(GridFunction, usize)> {
        let b = self.op.gather(u)?;
        let out = self.solve(&b, dt)?;
        Ok((self.op.scatter(&out.x), out.iterations))
    }

    fn solve(&self, b: &[f64], dt: f64) -> Result<CgOutcome> {
        let tau = dt * self.c;
        let diag: Vec<f64> = self.op.diagonal().iter().map(|d| 1.0 + tau * d).collect();
        conjugate_gradient(
            |x| {
                let ax = self.op.apply_reduced(x);
                x.iter().zip(ax).map(|(a, b)| a + tau * b).collect()
            },
            &diag,
            b,
            b,
            self.problem.solver_tol,
            self.problem.solver_max_iter,
        )
    }

    /// `ceil(T / dt)` steps of size `T / steps`, recording every state.
    pub fn run(&self) -> Result<Trajectory> {
        self.run_sampled(1)
    }

    /// Like [`Flow::run`] but keeps only every `every`-th state (and the last).
    pub fn run_sampled(&self, every: usize) -> Result<Trajectory> {
        let every = every.max(1);
        let steps = self.problem.steps();
        let dt = self.problem.effective_dt();
        let mut x = self.op.gather(&self.problem.initial)?;
        let mut traj = Trajectory {
            times: vec![0.0],
            states: vec![self.problem.initial.clone()],
            energies: vec![self.energy_reduced(&x)],
            solver_iterations: Vec::new(),
        };
        for k in 1..=steps {
            let out = self.solve(&x, dt)?;
            x = out.x;
            traj.solver_iterations.push(out.iterations);
            if k % every == 0 || k == steps {
                traj.times.push(if k == steps { self.problem.horizon } else { k as f64 * dt });
                traj.states.push(self.op.scatter(&x));
                traj.energies.push(self.energy_reduced(&x));
            }
        }
        Ok(traj)
    }
}

/// One implicit Euler step of size `problem.dt` from `u`.
pub fn step(u: &GridFunction, problem: &FlowProblem) -> Result<GridFunction> {
    Ok(Flow::new(problem.clone())?.step_with(u, problem.dt)?.0)
}

/// Full trajectory of `problem`.
pub fn run(problem: &FlowProblem) -> Result<Trajectory> {
    Flow::new(problem.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain, Grid};
    use std::f64::consts::PI;

    fn sine(n: usize) -> GridFunction {
        let g = Grid::cube(1, 0.0, 1.0, n).unwrap();
        GridFunction::from_fn(&g, &g.bounding_box(), |x| (PI * x[0]).sin()).unwrap()
    }

    #[test]
    fn step_counts() {
        let p = FlowProblem::local(sine(16), Weight::one(), 0.05).unwrap();
        assert_eq!(p.steps(), 200);
        let p = p.with_dt(0.003).unwrap();
        assert_eq!(p.steps(), 17);
        assert!((p.effective_dt() * 17.0 - 0.05).abs() < 1e-15);
        assert!(p.clone().with_dt(0.1).is_err());
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::cube(1, -1.0, 1.0, 32).unwrap();
        let d = Domain::boxed(&[-0.5], &[1.0]).unwrap();
        let z = GridFunction::zeros(&g, &d).unwrap();
        let p = FlowProblem::fractional(z.clone(), 0.7, Weight::one(), 0.01).unwrap();
        let traj = run(&p).unwrap();
        assert!(traj.states.iter().all(|u| u.is_zero()));
        assert!(step(&z, &p).unwrap().is_zero());
    }

    #[test]
    fn implicit_step_decreases_energy_and_is_first_order() {
        let u = sine(64);
        let p = FlowProblem::fractional(u.clone(), 0.6, Weight::constant(1.3).unwrap(), 0.1).unwrap();
        let flow = Flow::new(p).unwrap();
        let e0 = flow.energy(&u).unwrap();
        let mut prev = f64::INFINITY;
        for dt in [1e-2, 1e-3, 1e-4] {
            let (v, _) = flow.step_with(&u, dt).unwrap();
            assert!(flow.energy(&v).unwrap() <= e0);
            let moved = v.sub(&u).unwrap().l2_norm();
            assert!(moved < prev);
            prev = moved;
        }
        // O(dt): ten times smaller step moves about ten times less
        let (a, _) = flow.step_with(&u, 1e-5).unwrap();
        let (b, _) = flow.step_with(&u, 1e-6).unwrap();
        let ratio = a.sub(&u).unwrap().l2_norm() / b.sub(&u).unwrap().l2_norm();
        assert!((ratio - 10.0).abs() < 0.1, "{ratio}");
    }
}
