//! Weighted fractional seminorms, local Dirichlet energies and `K_{d,p}`.

mod dirichlet;
mod kdp;
mod kernel;

use rayon::prelude::*;

pub use dirichlet::dirichlet_energy;
pub(crate) use dirichlet::face_form;
pub use kdp::{kdp_closed_form, kdp_quadrature};
pub(crate) use kernel::{exterior_coefficients, KernelTable};

use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{Domain, Grid};
use crate::params::{DiagMode, FractionalParams};
use crate::quadrature::CompensatedSum;
use crate::weight::Weight;

/// Partial sums of the discrete double integral.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Breakdown {
    /// Pairs of distinct cells closer than `2 h_max`.
    pub near: f64,
    /// Remaining pairs of grid cells.
    pub far: f64,
    /// Pairs with one point outside the grid's bounding box.
    pub exterior: f64,
    /// Self-pair correction.
    pub diagonal: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        ((self.near + self.far) + self.exterior) + self.diagonal
    }
}

/// `[u]^p_{s,p,f}` together with its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeminormResult {
    pub value_p: f64,
    /// `(1 - s) * value_p`.
    pub scaled: f64,
    pub breakdown: Breakdown,
    pub params: FractionalParams,
}

/// Self-pair coefficient `K_{d,p} (h_min/2)^{p(1-s)} / (1-s)`: the integral of
/// `|z . nu|^p / |z|^{d+sp}` over the ball of radius `h_min/2`.
pub fn diagonal_coefficient(grid: &Grid, params: &FractionalParams) -> Result<f64> {
    match params.diag_mode {
        DiagMode::Exclude => Ok(0.0),
        DiagMode::GradientCorrect => {
            let (s, p) = (params.s(), params.p());
            let k = kdp_closed_form(grid.dim(), p)?;
            Ok(k * (0.5 * grid.h_min()).powf(p * (1.0 - s)) / (1.0 - s))
        }
    }
}

/// Everything the discrete double sum needs for one grid, support mask,
/// weight and parameter set.
#[derive(Clone)]
pub(crate) struct PairSystem {
    pub grid: Grid,
    pub mask: Vec<bool>,
    pub table: KernelTable,
    pub f_vals: Vec<f64>,
    pub kappa: Vec<f64>,
    pub diag: f64,
    pub params: FractionalParams,
}

impl PairSystem {
    pub fn new(grid: &Grid, mask: &[bool], params: &FractionalParams, f: &Weight) -> Result<Self> {
        let dim = grid.dim();
        let f_vals: Vec<f64> = (0..grid.len()).map(|i| f.eval(&grid.center(i)[..dim])).collect();
        let floor = 0.5 * f.inf_bound();
        if let Some(i) = f_vals.iter().position(|&v| !(v >= floor)) {
            return Err(Error::CorruptedWeight {
                value: f_vals[i],
                point: grid.center(i)[..dim].to_vec(),
                inf_bound: f.inf_bound(),
            });
        }
        Ok(PairSystem {
            grid: grid.clone(),
            mask: mask.to_vec(),
            table: KernelTable::new(grid, params),
            kappa: exterior_coefficients(grid, params, f, mask),
            diag: diagonal_coefficient(grid, params)?,
            f_vals,
            params: *params,
        })
    }

    /// Ordered double sum over grid cells of `numer(i, j) W f_i f_j`, split
    /// into near and far parts. Rows run over the support; a pair with both
    /// cells in the support is met twice (once per row), a pair with one cell
    /// outside is met once and counted twice.
    pub fn pair_sums<N>(&self, numer: N) -> (f64, f64)
    where
        N: Fn(usize, usize) -> f64 + Sync,
    {
        let g = &self.grid;
        let n = g.padded_cells();
        let rows: Vec<(f64, f64)> = (0..g.len())
            .into_par_iter()
            .map(|i| {
                if !self.mask[i] {
                    return (0.0, 0.0);
                }
                let mi = g.multi_index(i);
                let fi = self.f_vals[i];
                let mut near = CompensatedSum::default();
                let mut far = CompensatedSum::default();
                for j0 in 0..n[0] {
                    for j1 in 0..n[1] {
                        let base = g.index([j0, j1, 0]);
                        let tbase = self.table.index(mi, [j0, j1, 0]);
                        for j2 in 0..n[2] {
                            let j = base + j2;
                            if j == i {
                                continue;
                            }
                            let t = tbase + j2;
                            let num = numer(i, j);
                            if num == 0.0 {
                                continue;
                            }
                            let mult = if self.mask[j] { 1.0 } else { 2.0 };
                            let term = mult * (num * (self.table.weight(t) * (fi * self.f_vals[j])));
                            if self.table.is_near(t) {
                                near.add(term);
                            } else {
                                far.add(term);
                            }
                        }
                    }
                }
                (near.value(), far.value())
            })
            .collect();
        let mut near = CompensatedSum::default();
        let mut far = CompensatedSum::default();
        for (a, b) in rows {
            near.add(a);
            far.add(b);
        }
        (near.value(), far.value())
    }

    /// `2 sum_i numer(i) f_i kappa_i h^d` over the support.
    pub fn exterior_sum<N: Fn(usize) -> f64>(&self, numer: N) -> f64 {
        let acc: CompensatedSum = (0..self.grid.len())
            .filter(|&i| self.mask[i])
            .map(|i| numer(i) * (self.f_vals[i] * self.kappa[i]))
            .collect();
        2.0 * acc.value() * self.grid.cell_volume()
    }
}

#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x.abs()
    } else {
        x.abs().powf(p)
    }
}

/// Discrete `[u]^p_{s,p,f}` over `R^d x R^d` for the zero extension of `u`.
///
/// Pairs of grid cells use the kernel table, pairs with one point beyond the
/// bounding box use the exterior tail coefficients, and the self-pair is
/// dropped or replaced by the ball correction depending on the diagonal mode.
pub fn fractional_seminorm(u: &GridFunction, params: &FractionalParams, f: &Weight) -> Result<SeminormResult> {
    let sys = PairSystem::new(u.grid(), u.support_mask(), params, f)?;
    seminorm_with(&sys, u, f)
}

pub(crate) fn seminorm_with(sys: &PairSystem, u: &GridFunction, f: &Weight) -> Result<SeminormResult> {
    let p = sys.params.p();
    let vals = u.values();
    let (near, far) = sys.pair_sums(|i, j| pow_abs(vals[i] - vals[j], p));
    let exterior = sys.exterior_sum(|i| pow_abs(vals[i], p));
    let diagonal = if sys.diag == 0.0 {
        0.0
    } else {
        sys.diag * dirichlet_energy(u, p, f)?
    };
    let breakdown = Breakdown {
        near,
        far,
        exterior,
        diagonal,
    };
    let value_p = breakdown.total();
    if !value_p.is_finite() {
        return Err(Error::NonFinite("seminorm value".into()));
    }
    Ok(SeminormResult {
        value_p,
        scaled: (1.0 - sys.params.s()) * value_p,
        breakdown,
        params: sys.params,
    })
}

/// Symmetric bilinear form `B(u, v)` with `B(u, u) = [u]^2_{s,2,f}`, built
/// from the same quadrature and summation order as [`fractional_seminorm`]
/// at `p = 2` with default quadrature controls.
pub fn seminorm_bilinear(u: &GridFunction, v: &GridFunction, s: f64, f: &Weight) -> Result<f64> {
    seminorm_bilinear_with(u, v, &FractionalParams::new(s, 2.0)?, f)
}

/// [`seminorm_bilinear`] with explicit quadrature controls; `params.p()` must be 2.
pub fn seminorm_bilinear_with(u: &GridFunction, v: &GridFunction, params: &FractionalParams, f: &Weight) -> Result<f64> {
    if params.p() != 2.0 {
        return Err(crate::error::invalid("p", "the bilinear form requires p = 2"));
    }
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    // both functions must be seen on a common support
    let mask: Vec<bool> = u
        .support_mask()
        .iter()
        .zip(v.support_mask())
        .map(|(a, b)| *a || *b)
        .collect();
    let sys = PairSystem::new(u.grid(), &mask, params, f)?;
    Ok(bilinear_with(&sys, u.values(), v.values(), f))
}

pub(crate) fn bilinear_with(sys: &PairSystem, u: &[f64], v: &[f64], f: &Weight) -> f64 {
    let (near, far) = sys.pair_sums(|i, j| (u[i] - u[j]) * (v[i] - v[j]));
    let exterior = sys.exterior_sum(|i| u[i] * v[i]);
    let diagonal = if sys.diag == 0.0 {
        0.0
    } else {
        sys.diag * face_form(&sys.grid, u, v, f)
    };
    Breakdown {
        near,
        far,
        exterior,
        diagonal,
    }
    .total()
}

/// Double sum over ordered pairs of distinct cells whose centers both lie in
/// `region`, with no exterior or self-pair contribution.
pub fn restricted_pair_energy(u: &GridFunction, params: &FractionalParams, f: &Weight, region: &Domain) -> Result<f64> {
    let mask = region.mask(u.grid());
    let sys = PairSystem::new(u.grid(), &mask, &params.with_diag_mode(DiagMode::Exclude), f)?;
    let (p, vals) = (params.p(), u.values());
    let (near, far) = sys.pair_sums(|i, j| if mask[j] { pow_abs(vals[i] - vals[j], p) } else { 0.0 });
    Ok(near + far)
}
