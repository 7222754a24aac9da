//! Weighted Laplacians defined as exact gradients of the discrete energies.
//!
//! Operators act on the unknowns of a support mask: cells outside the mask
//! hold the zero extension and are not updated. For the local operator
//! `<L u, v> h^d = 2 E(u, v)` where `E` is the face form of
//! [`crate::energy::dirichlet_energy`]; for the fractional operator
//! `<A u, v> h^d = 2 B(u, v)` with `B` from [`crate::energy::seminorm_bilinear`].

mod variation;

use rayon::prelude::*;

pub use variation::{first_variation_check, local_first_variation_check, FirstVariationReport, VariationRow};

use crate::energy::PairSystem;
use crate::error::{Error, Result};
use crate::function::{for_each_face, GridFunction};
use crate::grid::Grid;
use crate::params::FractionalParams;
use crate::quadrature::CompensatedSum;
use crate::weight::Weight;

/// Largest number of unknown pairs for which the fractional operator is
/// assembled as a dense matrix.
pub const DENSE_LIMIT: usize = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Local,
    Fractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    Dense,
    MatrixFree,
}

/// Sparse rows of the local operator over the unknowns.
#[derive(Debug, Clone)]
struct Stencil {
    diag: Vec<f64>,
    /// `(unknown index, coefficient)` pairs; the row value is
    /// `diag * u_k - sum coeff * u_nb`.
    off: Vec<Vec<(usize, f64)>>,
}

impl Stencil {
    fn new(grid: &Grid, slot: &[Option<usize>], m: usize, f: &Weight) -> Self {
        let mut diag = vec![0.0; m];
        let mut off = vec![Vec::new(); m];
        let h = grid.h().to_vec();
        for_each_face(grid, |a, lo, hi, mid| {
            let kl = lo.and_then(|i| slot[i]);
            let kh = hi.and_then(|i| slot[i]);
            if kl.is_none() && kh.is_none() {
                return;
            }
            let fm = f.eval(&mid[..grid.dim()]);
            let c = 2.0 * (fm * fm) / (h[a] * h[a]);
            if let Some(k) = kl {
                diag[k] += c;
                if let Some(l) = kh {
                    off[k].push((l, c));
                }
            }
            if let Some(l) = kh {
                diag[l] += c;
                if let Some(k) = kl {
                    off[l].push((k, c));
                }
            }
        });
        Stencil { diag, off }
    }

    fn row(&self, k: usize, x: &[f64]) -> f64 {
        let mut acc = self.diag[k] * x[k];
        for &(l, c) in &self.off[k] {
            acc -= c * x[l];
        }
        acc
    }
}

#[derive(Clone)]
enum Nonlocal {
    Dense(Vec<f64>),
    MatrixFree,
}

/// A symmetric positive semidefinite operator on the unknowns of a support.
#[derive(Clone)]
pub struct OperatorHandle {
    kind: OperatorKind,
    template: GridFunction,
    unknowns: Vec<usize>,
    slot: Vec<Option<usize>>,
    stencil: Stencil,
    /// Scale applied to the stencil: 1 for the local operator, the diagonal
    /// coefficient for the fractional one.
    stencil_scale: f64,
    pairs: Option<(PairSystem, Nonlocal)>,
    diagonal: Vec<f64>,
    s: Option<f64>,
    weight: Weight,
}

impl std::fmt::Debug for OperatorHandle {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("OperatorHandle")
            .field("kind", &self.kind)
            .field("mode", &self.mode())
            .field("unknowns", &self.unknowns.len())
            .field("s", &self.s)
            .finish()
    }
}

impl OperatorHandle {
    /// `-2 div(f^2 grad u)` on the support of `layout`.
    pub fn local(layout: &GridFunction, f: &Weight) -> Self {
        let (unknowns, slot) = unknowns_of(layout);
        let stencil = Stencil::new(layout.grid(), &slot, unknowns.len(), f);
        OperatorHandle {
            kind: OperatorKind::Local,
            template: layout.scaled(0.0),
            diagonal: stencil.diag.clone(),
            unknowns,
            slot,
            stencil,
            stencil_scale: 1.0,
            pairs: None,
            s: None,
            weight: f.clone(),
        }
    }

    /// Gradient of the discrete `[u]^2_{s,2,f}` on the support of `layout`,
    /// dense when the unknown count allows.
    pub fn fractional(layout: &GridFunction, params: &FractionalParams, f: &Weight) -> Result<Self> {
        let m = layout.support_mask().iter().filter(|&&b| b).count();
        let mode = if m.saturating_mul(m) <= DENSE_LIMIT {
            ApplyMode::Dense
        } else {
            ApplyMode::MatrixFree
        };
        Self::fractional_with_mode(layout, params, f, mode)
    }

    pub fn fractional_with_mode(
        layout: &GridFunction,
        params: &FractionalParams,
        f: &Weight,
        mode: ApplyMode,
    ) -> Result<Self> {
        if params.p() != 2.0 {
            return Err(crate::error::invalid("p", "the fractional Laplacian requires p = 2"));
        }
        let grid = layout.grid();
        let sys = PairSystem::new(grid, layout.support_mask(), params, f)?;
        let (unknowns, slot) = unknowns_of(layout);
        let m = unknowns.len();
        let stencil = Stencil::new(grid, &slot, m, f);
        let scale = 4.0 / grid.cell_volume();
        let n = grid.padded_cells();

        // diagonal entries and, in dense mode, the full rows
        let rows: Vec<(f64, Option<Vec<f64>>)> = unknowns
            .par_iter()
            .enumerate()
            .map(|(k, &i)| {
                let mi = grid.multi_index(i);
                let fi = sys.f_vals[i];
                let mut row = (mode == ApplyMode::Dense).then(|| vec![0.0; m]);
                let mut acc = CompensatedSum::default();
                for j0 in 0..n[0] {
                    for j1 in 0..n[1] {
                        let base = grid.index([j0, j1, 0]);
                        let tbase = sys.table.index(mi, [j0, j1, 0]);
                        for j2 in 0..n[2] {
                            let j = base + j2;
                            if j == i {
                                continue;
                            }
                            let w = scale * (sys.table.weight(tbase + j2) * (fi * sys.f_vals[j]));
                            acc.add(w);
                            if let (Some(r), Some(l)) = (row.as_mut(), slot[j]) {
                                r[l] = -w;
                            }
                        }
                    }
                }
                let d = acc.value() + 4.0 * fi * sys.kappa[i] + sys.diag * stencil.diag[k];
                if let Some(r) = row.as_mut() {
                    for &(l, c) in &stencil.off[k] {
                        r[l] -= sys.diag * c;
                    }
                    r[k] = d;
                }
                (d, row)
            })
            .collect();
        let mut diagonal = Vec::with_capacity(m);
        let mut dense = Vec::new();
        for (d, row) in rows {
            diagonal.push(d);
            if let Some(r) = row {
                dense.extend_from_slice(&r);
            }
        }
        let nonlocal = match mode {
            ApplyMode::Dense => Nonlocal::Dense(dense),
            ApplyMode::MatrixFree => Nonlocal::MatrixFree,
        };
        Ok(OperatorHandle {
            kind: OperatorKind::Fractional,
            template: layout.scaled(0.0),
            unknowns,
            slot,
            stencil,
            stencil_scale: sys.diag,
            diagonal,
            s: Some(params.s()),
            weight: f.clone(),
            pairs: Some((sys, nonlocal)),
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn mode(&self) -> ApplyMode {
        match &self.pairs {
            Some((_, Nonlocal::MatrixFree)) => ApplyMode::MatrixFree,
            _ => ApplyMode::Dense,
        }
    }

    pub fn s(&self) -> Option<f64> {
        self.s
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn grid(&self) -> &Grid {
        self.template.grid()
    }

    /// Number of unknowns (support cells).
    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    /// Diagonal of the operator in the unknown ordering.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Values of `u` at the unknowns.
    pub fn gather(&self, u: &GridFunction) -> Result<Vec<f64>> {
        if !u.same_layout(&self.template) {
            return Err(Error::GridMismatch);
        }
        Ok(self.unknowns.iter().map(|&i| u.values()[i]).collect())
    }

    /// Grid function with the given unknown values and zeros elsewhere.
    pub fn scatter(&self, x: &[f64]) -> GridFunction {
        let mut values = vec![0.0; self.grid().len()];
        for (&i, &v) in self.unknowns.iter().zip(x) {
            values[i] = v;
        }
        self.template.with_values(values)
    }

    /// Operator applied to a vector of unknown values.
    pub fn apply_reduced(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.unknowns.len());
        let local = |k: usize| self.stencil_scale * self.stencil.row(k, x);
        match &self.pairs {
            None => (0..x.len()).into_par_iter().map(local).collect(),
            Some((_, Nonlocal::Dense(mat))) => {
                let m = x.len();
                (0..m)
                    .into_par_iter()
                    .map(|k| {
                        let row = &mat[k * m..(k + 1) * m];
                        row.iter().zip(x).map(|(a, b)| a * b).collect::<CompensatedSum>().value()
                    })
                    .collect()
            }
            Some((sys, Nonlocal::MatrixFree)) => {
                let g = &sys.grid;
                let n = g.padded_cells();
                let scale = 4.0 / g.cell_volume();
                (0..x.len())
                    .into_par_iter()
                    .map(|k| {
                        let i = self.unknowns[k];
                        let mi = g.multi_index(i);
                        let mut acc = CompensatedSum::default();
                        for j0 in 0..n[0] {
                            for j1 in 0..n[1] {
                                let base = g.index([j0, j1, 0]);
                                let tbase = sys.table.index(mi, [j0, j1, 0]);
                                for j2 in 0..n[2] {
                                    let j = base + j2;
                                    if j == i {
                                        continue;
                                    }
                                    let xj = self.slot[j].map_or(0.0, |l| x[l]);
                                    acc.add((x[k] - xj) * (sys.table.weight(tbase + j2) * sys.f_vals[j]));
                                }
                            }
                        }
                        let fi = sys.f_vals[i];
                        scale * fi * acc.value() + 4.0 * fi * sys.kappa[i] * x[k] + local(k)
                    })
                    .collect()
            }
        }
    }

    /// Operator applied to a grid function with this operator's layout.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        let x = self.gather(u)?;
        Ok(self.scatter(&self.apply_reduced(&x)))
    }
}

fn unknowns_of(layout: &GridFunction) -> (Vec<usize>, Vec<Option<usize>>) {
    let unknowns = layout.support_indices();
    let mut slot = vec![None; layout.grid().len()];
    for (k, &i) in unknowns.iter().enumerate() {
        slot[i] = Some(k);
    }
    (unknowns, slot)
}

/// Discrete `-2 div(f^2 grad u)` on the support of `u`; the gradient of the
/// face form, so that `<L u, u> h^d = 2 dirichlet_energy(u, 2, f)`.
pub fn weighted_laplacian(u: &GridFunction, f: &Weight) -> GridFunction {
    OperatorHandle::local(u, f)
        .apply(u)
        .expect("operator built from the same layout")
}

/// Gradient of the discrete `[u]^2_{s,2,f}` divided by `h^d`, so that
/// `<A u, v> h^d = 2 B(u, v)`.
pub fn weighted_fractional_laplacian(u: &GridFunction, s: f64, f: &Weight) -> Result<GridFunction> {
    let params = FractionalParams::new(s, 2.0)?;
    OperatorHandle::fractional(u, &params, f)?.apply(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{dirichlet_energy, seminorm_bilinear};
    use crate::grid::Domain;
    use rand::{Rng, SeedableRng};

    fn random_fn(g: &Grid, d: &Domain, seed: u64) -> GridFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let u = GridFunction::zeros(g, d).unwrap();
        u.with_values((0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    #[test]
    fn laplacian_stencil_with_unit_weight() {
        let g = Grid::cube(1, 0.0, 1.0, 10).unwrap();
        let d = g.bounding_box();
        let u = random_fn(&g, &d, 1);
        let lu = weighted_laplacian(&u, &Weight::one());
        let h2 = 0.01;
        let v = u.values();
        for i in 0..10 {
            let l = if i > 0 { v[i - 1] } else { 0.0 };
            let r = if i < 9 { v[i + 1] } else { 0.0 };
            let standard = (l - 2.0 * v[i] + r) / h2;
            assert!((lu.values()[i] + 2.0 * standard).abs() < 1e-10);
        }
        let c = GridFunction::from_fn(&g, &d, |_| 1.0).unwrap();
        let small = Domain::boxed(&[0.2], &[0.6]).unwrap();
        let cin = GridFunction::from_fn(&g, &small, |_| 1.0).unwrap();
        // constants are annihilated away from the support boundary
        let l = weighted_laplacian(&cin, &Weight::one());
        assert!(l.values()[4].abs() < 1e-12 && l.values()[5].abs() < 1e-12);
        assert!(weighted_laplacian(&c, &Weight::one()).values()[5].abs() < 1e-12);
    }

    #[test]
    fn local_operator_is_gradient_of_face_energy() {
        let g = Grid::cube(2, -1.0, 1.0, 12).unwrap();
        let d = Domain::boxed(&[-0.7, -0.8], &[1.5, 1.4]).unwrap();
        let f = Weight::new(crate::weight::WeightPreset::Sigmoid { a: 2.0, b: 2.0 }).unwrap();
        let u = random_fn(&g, &d, 2);
        let v = random_fn(&g, &d, 3);
        let lu = weighted_laplacian(&u, &f);
        let lv = weighted_laplacian(&v, &f);
        let e = dirichlet_energy(&u, 2.0, &f).unwrap();
        let lhs = lu.inner(&u).unwrap();
        assert!((lhs - 2.0 * e).abs() < 1e-12 * lhs);
        let a = lu.inner(&v).unwrap();
        let b = lv.inner(&u).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn fractional_operator_matches_bilinear_form() {
        let g = Grid::cube(2, 0.0, 1.0, 8).unwrap();
        let d = Domain::boxed(&[0.1, 0.2], &[0.7, 0.6]).unwrap();
        let f = Weight::new(crate::weight::WeightPreset::CosTaper {
            a: 0.5,
            omega: 2.0,
            width: 1.0,
        })
        .unwrap();
        let u = random_fn(&g, &d, 4);
        let v = random_fn(&g, &d, 5);
        for mode in [ApplyMode::Dense, ApplyMode::MatrixFree] {
            let params = FractionalParams::new(0.6, 2.0).unwrap();
            let op = OperatorHandle::fractional_with_mode(&u, &params, &f, mode).unwrap();
            assert_eq!(op.mode(), mode);
            let au = op.apply(&u).unwrap();
            let av = op.apply(&v).unwrap();
            let b = seminorm_bilinear(&u, &v, 0.6, &f).unwrap();
            let lhs = au.inner(&v).unwrap();
            assert!((lhs - 2.0 * b).abs() < 1e-12 * b.abs(), "{lhs} vs {}", 2.0 * b);
            assert!((lhs - av.inner(&u).unwrap()).abs() < 1e-12 * lhs.abs());
            assert!(au.inner(&u).unwrap() >= 0.0);
        }
    }

    #[test]
    fn dense_and_matrix_free_agree() {
        let g = Grid::cube(1, -1.0, 1.0, 40).unwrap();
        let d = Domain::boxed(&[-0.5], &[1.0]).unwrap();
        let u = random_fn(&g, &d, 6);
        let params = FractionalParams::new(0.3, 2.0).unwrap();
        let f = Weight::constant(1.5).unwrap();
        let a = OperatorHandle::fractional_with_mode(&u, &params, &f, ApplyMode::Dense).unwrap();
        let b = OperatorHandle::fractional_with_mode(&u, &params, &f, ApplyMode::MatrixFree).unwrap();
        let (x, y) = (a.apply(&u).unwrap(), b.apply(&u).unwrap());
        for (p, q) in x.values().iter().zip(y.values()) {
            assert!((p - q).abs() < 1e-11 * p.abs().max(1.0));
        }
        assert_eq!(a.diagonal(), b.diagonal());
    }

    #[test]
    fn null_space() {
        let g = Grid::cube(1, -1.0, 1.0, 30).unwrap();
        let d = Domain::boxed(&[-0.5], &[1.0]).unwrap();
        let zero = GridFunction::zeros(&g, &d).unwrap();
        let one = GridFunction::from_fn(&g, &d, |_| 1.0).unwrap();
        let f = Weight::one();
        assert!(weighted_fractional_laplacian(&zero, 0.5, &f).unwrap().is_zero());
        let a1 = weighted_fractional_laplacian(&one, 0.5, &f).unwrap();
        assert!(a1.values().iter().any(|v| v.abs() > 1e-3));
    }
}
