//! Translation-invariant pair weights and exterior tail coefficients.

use rayon::prelude::*;

use crate::grid::{Grid, MAX_DIM};
use crate::params::FractionalParams;
use crate::quadrature::{CompensatedSum, GaussLegendre};
use crate::weight::Weight;

/// Pair weights `W(k)` indexed by the integer cell offset `k`, covering every
/// offset that occurs between two cells of the grid.
///
/// Far pairs use the midpoint rule in both variables,
/// `W = h^{2d} |k h|^{-(d+sp)}`. Pairs within `2 h_max` are refined into
/// `r^d x r^d` subcell pairs, with each subcell numerator rescaled by the
/// factor `(|e . D_ab| / |D|)^p` that a locally affine `u` would produce
/// along the pair direction `e`.
#[derive(Debug, Clone)]
pub(crate) struct KernelTable {
    n: [usize; MAX_DIM],
    span: [usize; MAX_DIM],
    weights: Vec<f64>,
    near: Vec<bool>,
}

impl KernelTable {
    pub fn new(grid: &Grid, params: &FractionalParams) -> Self {
        let n = grid.padded_cells();
        let h = grid.padded_h();
        let dim = grid.dim();
        let span = [2 * n[0] - 1, 2 * n[1] - 1, 2 * n[2] - 1];
        let q = params.kernel_exponent(dim);
        let p = params.p();
        let vol = grid.cell_volume();
        let vol2 = vol * vol;
        let reach = 2.0 * grid.h_max() * (1.0 + 1e-12);
        let r = params.near_diag_refine;
        let len = span[0] * span[1] * span[2];
        let entries: Vec<(f64, bool)> = (0..len)
            .into_par_iter()
            .map(|idx| {
                let k = [
                    (idx / (span[1] * span[2])) as i64 - (n[0] as i64 - 1),
                    ((idx / span[2]) % span[1]) as i64 - (n[1] as i64 - 1),
                    (idx % span[2]) as i64 - (n[2] as i64 - 1),
                ];
                if k == [0, 0, 0] {
                    return (0.0, false);
                }
                let mut d = [0.0; MAX_DIM];
                for a in 0..dim {
                    d[a] = k[a] as f64 * h[a];
                }
                let dist = norm(&d);
                if dist > reach || r == 1 {
                    (vol2 * dist.powf(-q), dist <= reach)
                } else {
                    (vol2 * refined(&d, dist, &h, dim, r, p, q), true)
                }
            })
            .collect();
        let (weights, near) = entries.into_iter().unzip();
        KernelTable {
            n,
            span,
            weights,
            near,
        }
    }

    /// Table index of the offset `mj - mi`.
    #[inline]
    pub fn index(&self, mi: [usize; MAX_DIM], mj: [usize; MAX_DIM]) -> usize {
        let c = |a: usize| mj[a] + self.n[a] - 1 - mi[a];
        (c(0) * self.span[1] + c(1)) * self.span[2] + c(2)
    }

    #[inline]
    pub fn weight(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    #[inline]
    pub fn is_near(&self, idx: usize) -> bool {
        self.near[idx]
    }
}

fn norm(x: &[f64; MAX_DIM]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Mean of `(|D . D_m| / |D|^2)^p |D_m|^{-q}` over all subcell pairs, where
/// `D_m = D + m h / r`. The difference of two subcell midpoints along an axis
/// is `m h / r` with multiplicity `r - |m|`.
fn refined(d: &[f64; MAX_DIM], dist: f64, h: &[f64; MAX_DIM], dim: usize, r: usize, p: f64, q: f64) -> f64 {
    let ri = r as i64;
    let range = |a: usize| if a < dim { -(ri - 1)..=(ri - 1) } else { 0..=0 };
    let d2 = dist * dist;
    let mut acc = CompensatedSum::default();
    for m0 in range(0) {
        for m1 in range(1) {
            for m2 in range(2) {
                let m = [m0, m1, m2];
                let mut mult = 1.0;
                let mut dm = [0.0; MAX_DIM];
                for a in 0..dim {
                    mult *= (ri - m[a].abs()) as f64;
                    dm[a] = d[a] + m[a] as f64 * h[a] / r as f64;
                }
                let proj = (0..dim).map(|a| d[a] * dm[a]).sum::<f64>().abs() / d2;
                acc.add(mult * proj.powf(p) * norm(&dm).powf(-q));
            }
        }
    }
    acc.value() / (r as f64).powi(2 * dim as i32)
}

/// `kappa(x) = int_{R^d \ box} |x - y|^{-(d+sp)} f(y) dy` for the centers
/// flagged in `mask`; zero elsewhere.
///
/// Directions are grouped by the box face through which the ray from `x`
/// leaves. Along a ray leaving at distance `rho`, the radial integral is
/// `rho^{-sp} / (sp) * int_0^1 f(x + rho t^{-1/(sp)} theta) dt`.
pub(crate) fn exterior_coefficients(grid: &Grid, params: &FractionalParams, f: &Weight, mask: &[bool]) -> Vec<f64> {
    let sp = params.s() * params.p();
    let ang = GaussLegendre::new(16);
    let rad = GaussLegendre::new(16);
    let constant = f.as_constant();
    let dim = grid.dim();
    let lo = grid.origin().to_vec();
    let hi: Vec<f64> = (0..dim).map(|a| lo[a] + grid.extent()[a]).collect();

    // radial integral along direction theta leaving the box at distance rho
    let ray = |x: &[f64; MAX_DIM], theta: &[f64; MAX_DIM], rho: f64| -> f64 {
        let base = rho.powf(-sp) / sp;
        match constant {
            Some(c) => c * base,
            None => {
                let mean = rad.integrate(0.0, 1.0, |t| {
                    let dist = rho * t.powf(-1.0 / sp);
                    let mut y = *x;
                    for a in 0..dim {
                        y[a] += dist * theta[a];
                    }
                    f.eval(&y[..dim])
                });
                mean * base
            }
        }
    };

    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !mask[i] {
                return 0.0;
            }
            let x = grid.center(i);
            match dim {
                1 => {
                    ray(&x, &[-1.0, 0.0, 0.0], x[0] - lo[0]) + ray(&x, &[1.0, 0.0, 0.0], hi[0] - x[0])
                }
                2 => {
                    let mut acc = CompensatedSum::default();
                    for a in 0..2 {
                        let b = 1 - a;
                        for side in [-1.0, 1.0] {
                            let delta = if side > 0.0 { hi[a] - x[a] } else { x[a] - lo[a] };
                            let t_lo = ((lo[b] - x[b]) / delta).atan();
                            let t_hi = ((hi[b] - x[b]) / delta).atan();
                            acc.add(ang.integrate(t_lo, t_hi, |al| {
                                let mut th = [0.0; MAX_DIM];
                                th[a] = side * al.cos();
                                th[b] = al.sin();
                                ray(&x, &th, delta / al.cos())
                            }));
                        }
                    }
                    acc.value()
                }
                _ => {
                    let mut acc = CompensatedSum::default();
                    for a in 0..3 {
                        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                        for side in [-1.0, 1.0] {
                            let delta = if side > 0.0 { hi[a] - x[a] } else { x[a] - lo[a] };
                            let al_lo = ((lo[b] - x[b]) / delta).atan();
                            let al_hi = ((hi[b] - x[b]) / delta).atan();
                            acc.add(ang.integrate(al_lo, al_hi, |al| {
                                // in-plane distance to the face line at this alpha
                                let r1 = delta / al.cos();
                                let be_lo = ((lo[c] - x[c]) / r1).atan();
                                let be_hi = ((hi[c] - x[c]) / r1).atan();
                                ang.integrate(be_lo, be_hi, |be| {
                                    let mut th = [0.0; MAX_DIM];
                                    th[a] = side * al.cos() * be.cos();
                                    th[b] = al.sin() * be.cos();
                                    th[c] = be.sin();
                                    be.cos() * ray(&x, &th, r1 / be.cos())
                                })
                            }));
                        }
                    }
                    acc.value()
                }
            }
        })
        .collect()
}
