use rayon::prelude::*;

use crate::energy::restricted_pair_energy;
use crate::error::{invalid, Result};
use crate::function::{offset_index, GridFunction};
use crate::grid::{Domain, Grid, MAX_DIM};
use crate::params::FractionalParams;
use crate::quadrature::CompensatedSum;
use crate::weight::Weight;

/// Grid offsets inside the open ball of radius `eps` with the normalised
/// bump weights `exp(-1 / (1 - |z/eps|^2))`.
fn bump_kernel(grid: &Grid, eps: f64) -> Vec<([i64; MAX_DIM], f64)> {
    let h = grid.padded_h();
    let dim = grid.dim();
    let reach: Vec<i64> = (0..MAX_DIM)
        .map(|a| if a < dim { (eps / h[a]).ceil() as i64 } else { 0 })
        .collect();
    let mut out = Vec::new();
    for k0 in -reach[0]..=reach[0] {
        for k1 in -reach[1]..=reach[1] {
            for k2 in -reach[2]..=reach[2] {
                let k = [k0, k1, k2];
                let r2 = (0..dim).map(|a| (k[a] as f64 * h[a] / eps).powi(2)).sum::<f64>();
                if r2 < 1.0 {
                    out.push((k, (-1.0 / (1.0 - r2)).exp()));
                }
            }
        }
    }
    let mass: CompensatedSum = out.iter().map(|(_, w)| *w).collect();
    let mass = mass.value();
    for (_, w) in &mut out {
        *w /= mass;
    }
    out
}

/// Discrete convolution `u * eta_eps` with a bump kernel of unit discrete
/// mass. The result is supported on the support domain inflated by `eps`;
/// mass pushed past the bounding box is lost.
pub fn mollify(u: &GridFunction, eps: f64) -> Result<GridFunction> {
    let g = u.grid();
    if !(eps >= g.h_max() && eps.is_finite()) {
        return Err(invalid("eps", format!("{eps} is below the cell size {}", g.h_max())));
    }
    let kernel = bump_kernel(g, eps);
    let domain = u.domain().inflated(eps);
    let out = GridFunction::zeros(g, &domain)?;
    let mask = out.support_mask();
    let vals: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            if !mask[i] {
                return 0.0;
            }
            let acc: CompensatedSum = kernel
                .iter()
                .filter_map(|(k, w)| {
                    let j = offset_index(g, i, [-k[0], -k[1], -k[2]])?;
                    Some(w * u.values()[j])
                })
                .collect();
            acc.value()
        })
        .collect();
    Ok(out.with_values(vals))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollificationCheck {
    /// Pair energy of `u_eps` on the shrunken box with the box-infimum weight.
    pub mollified: f64,
    /// Pair energy of `u` on the box with the weight `f`.
    pub original: f64,
}

impl MollificationCheck {
    pub fn holds(&self) -> bool {
        self.mollified <= self.original
    }
}

/// Compares the restricted pair energy of `mollify(u, eps)` over the box
/// shrunk by `eps`, weighted by the smallest sample of `f` in the box, with
/// the restricted pair energy of `u` over the box weighted by `f`. Jensen's
/// inequality and translation invariance of the kernel give
/// `mollified <= original` exactly.
pub fn mollification_inequality(
    u: &GridFunction,
    eps: f64,
    params: &FractionalParams,
    f: &Weight,
    cube: &Domain,
) -> Result<MollificationCheck> {
    let [b] = cube.boxes() else {
        return Err(invalid("box", "the mollification inequality is checked on a single box"));
    };
    let g = u.grid();
    let dim = g.dim();
    let origin: Vec<f64> = (0..dim).map(|a| b.origin[a] + eps).collect();
    let extent: Vec<f64> = (0..dim).map(|a| b.extent[a] - 2.0 * eps).collect();
    if extent.iter().any(|&e| e <= 0.0) {
        return Err(invalid("eps", "the box is too small to shrink by eps"));
    }
    let inner = Domain::boxed(&origin, &extent)?;
    let f_inf = cube
        .mask(g)
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| f.eval(&g.center(i)[..dim]))
        .fold(f64::INFINITY, f64::min);
    let smooth = mollify(u, eps)?;
    Ok(MollificationCheck {
        mollified: restricted_pair_energy(&smooth, params, &Weight::constant(f_inf)?, &inner)?,
        original: restricted_pair_energy(u, params, f, cube)?,
    })
}
