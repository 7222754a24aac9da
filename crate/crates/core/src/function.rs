//! Grid functions sampled at cell centers and extended by zero.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::grid::{Domain, Grid, MAX_DIM};
use crate::quadrature::CompensatedSum;
use crate::weight::Weight;

/// Real values at the cell centers of a grid. Cells outside the support
/// domain hold exactly zero, and every point outside the bounding box
/// evaluates to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    domain: Domain,
    mask: Arc<Vec<bool>>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid, domain: &Domain) -> Result<Self> {
        if grid.dim() != domain.dim() {
            return Err(Error::InvalidDomain(format!(
                "domain dimension {} does not match grid dimension {}",
                domain.dim(),
                grid.dim()
            )));
        }
        let mask = domain.mask(grid);
        if !mask.iter().any(|&b| b) {
            return Err(Error::InvalidDomain(
                "domain contains no cell center of the grid".into(),
            ));
        }
        Ok(GridFunction {
            grid: grid.clone(),
            domain: domain.clone(),
            mask: Arc::new(mask),
            values: vec![0.0; grid.len()],
        })
    }

    /// Samples `f` at the centers inside `domain`.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: &Grid, domain: &Domain, f: F) -> Result<Self> {
        let mut u = GridFunction::zeros(grid, domain)?;
        for i in 0..grid.len() {
            if u.mask[i] {
                let x = grid.center(i);
                let v = f(&x[..grid.dim()]);
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("sample at {:?}", &x[..grid.dim()])));
                }
                u.values[i] = v;
            }
        }
        Ok(u)
    }

    /// Values given for every cell; entries outside the support must be zero.
    pub fn from_values(grid: &Grid, domain: &Domain, values: Vec<f64>) -> Result<Self> {
        let mut u = GridFunction::zeros(grid, domain)?;
        if values.len() != grid.len() {
            return Err(invalid(
                "values",
                format!("expected {} values, got {}", grid.len(), values.len()),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("value at cell {i}")));
            }
            if !u.mask[i] && v != 0.0 {
                return Err(invalid(
                    "values",
                    format!("cell {i} lies outside the support but holds {v}"),
                ));
            }
        }
        u.values = values;
        Ok(u)
    }

    /// Same grid and support as `self`, with new values (zeroed off support).
    pub fn with_values(&self, mut values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        for (v, &m) in values.iter_mut().zip(self.mask.iter()) {
            if !m {
                *v = 0.0;
            }
        }
        GridFunction {
            grid: self.grid.clone(),
            domain: self.domain.clone(),
            mask: Arc::clone(&self.mask),
            values,
        }
    }

    pub(crate) fn from_parts(grid: Grid, domain: Domain, mask: Vec<bool>, values: Vec<f64>) -> Self {
        GridFunction {
            grid,
            domain,
            mask: Arc::new(mask),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Piecewise-constant evaluation; exactly zero outside the bounding box.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.grid.locate(x).map_or(0.0, |i| self.values[i])
    }

    pub fn same_layout(&self, other: &GridFunction) -> bool {
        self.grid == other.grid && self.mask == other.mask
    }

    fn check_layout(&self, other: &GridFunction) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.with_values(self.values.iter().map(|v| c * v).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<Self> {
        self.check_layout(other)?;
        Ok(self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Discrete inner product `sum_i u_i v_i h^d`.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.check_layout(other)?;
        let acc: CompensatedSum = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(acc.value() * self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        let acc: CompensatedSum = self.values.iter().map(|v| v * v).collect();
        (acc.value() * self.grid.cell_volume()).sqrt()
    }

    /// `sum_i u_i h^d`.
    pub fn integral(&self) -> f64 {
        let acc: CompensatedSum = self.values.iter().copied().collect();
        acc.value() * self.grid.cell_volume()
    }
}

/// Integer cell offsets of a grid-aligned shift vector.
pub fn aligned_offset(grid: &Grid, shift: &[f64]) -> Result<[i64; MAX_DIM]> {
    if shift.len() != grid.dim() {
        return Err(invalid("shift", "dimension mismatch"));
    }
    let mut k = [0i64; MAX_DIM];
    for (a, (&s, &h)) in shift.iter().zip(grid.h()).enumerate() {
        let t = s / h;
        let r = t.round();
        if !t.is_finite() || (t - r).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::UnalignedShift {
                shift: shift.to_vec(),
                h: grid.h().to_vec(),
            });
        }
        k[a] = r as i64;
    }
    Ok(k)
}

/// Index of the cell `m + k`, or `None` when it leaves the grid.
pub(crate) fn offset_index(grid: &Grid, idx: usize, k: [i64; MAX_DIM]) -> Option<usize> {
    let m = grid.multi_index(idx);
    let n = grid.padded_cells();
    let mut t = [0usize; MAX_DIM];
    for a in 0..MAX_DIM {
        let v = m[a] as i64 + k[a];
        if v < 0 || v >= n[a] as i64 {
            return None;
        }
        t[a] = v as usize;
    }
    Some(grid.index(t))
}

/// `v(x) = u(x + h)`, zero where the source leaves the grid.
pub fn shift(u: &GridFunction, h: &[f64]) -> Result<GridFunction> {
    let k = aligned_offset(u.grid(), h)?;
    Ok(shift_by_cells(u, k))
}

pub(crate) fn shift_by_cells(u: &GridFunction, k: [i64; MAX_DIM]) -> GridFunction {
    let g = u.grid();
    let mut values = vec![0.0; g.len()];
    let mut mask = vec![false; g.len()];
    for i in 0..g.len() {
        if let Some(j) = offset_index(g, i, k) {
            values[i] = u.values[j];
            mask[i] = u.mask[j];
        }
    }
    let hv: Vec<f64> = (0..g.dim()).map(|a| k[a] as f64 * g.h()[a]).collect();
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = u
        .domain()
        .boxes()
        .iter()
        .map(|b| {
            (
                (0..g.dim()).map(|a| b.origin[a] - hv[a]).collect(),
                b.extent[..g.dim()].to_vec(),
            )
        })
        .collect();
    let domain = Domain::union(&boxes).expect("translation preserves validity");
    GridFunction::from_parts(g.clone(), domain, mask, values)
}

/// Midpoint value of `(int |u|^p f dx)^(1/p)`.
pub fn weighted_lp_norm(u: &GridFunction, p: f64, f: &Weight) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", "must be >= 1"));
    }
    let g = u.grid();
    let acc: CompensatedSum = (0..g.len())
        .filter(|&i| u.values[i] != 0.0)
        .map(|i| u.values[i].abs().powf(p) * f.eval(&g.center(i)[..g.dim()]))
        .collect();
    Ok((acc.value() * g.cell_volume()).powf(1.0 / p))
}

/// Gradient samples at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub values: Vec<[f64; MAX_DIM]>,
}

impl VectorField {
    pub fn norm_at(&self, i: usize) -> f64 {
        self.values[i].iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Central differences at interior centers, one-sided differences on the
/// first and last cell of each axis.
pub fn discrete_gradient(u: &GridFunction) -> VectorField {
    let g = u.grid();
    let n = g.padded_cells();
    let h = g.padded_h();
    let mut out = vec![[0.0; MAX_DIM]; g.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let m = g.multi_index(i);
        for a in 0..g.dim() {
            let mut lo = m;
            let mut hi = m;
            let span;
            if m[a] == 0 {
                hi[a] += 1;
                span = h[a];
            } else if m[a] == n[a] - 1 {
                lo[a] -= 1;
                span = h[a];
            } else {
                lo[a] -= 1;
                hi[a] += 1;
                span = 2.0 * h[a];
            }
            o[a] = (u.values[g.index(hi)] - u.values[g.index(lo)]) / span;
        }
    }
    VectorField {
        grid: g.clone(),
        values: out,
    }
}

/// Sum over axis-adjacent cell pairs of `|u_i - u_j| f(midpoint)` times the
/// face area. Faces on the bounding box pair the boundary cell with the zero
/// extension.
pub fn weighted_total_variation(u: &GridFunction, f: &Weight) -> f64 {
    let g = u.grid();
    let mut acc = CompensatedSum::default();
    for_each_face(g, |a, lo, hi, mid| {
        let ul = lo.map_or(0.0, |i| u.values[i]);
        let uh = hi.map_or(0.0, |i| u.values[i]);
        if ul != uh {
            let area = g.cell_volume() / g.h()[a];
            acc.add((ul - uh).abs() * f.eval(&mid[..g.dim()]) * area);
        }
    });
    acc.value()
}

/// Visits every face orthogonal to each axis, including the faces on the
/// bounding box (where one side is `None`). Arguments are the axis, the
/// cells below and above the face, and the face center.
pub(crate) fn for_each_face<F: FnMut(usize, Option<usize>, Option<usize>, [f64; MAX_DIM])>(
    g: &Grid,
    mut visit: F,
) {
    let n = g.padded_cells();
    let h = g.padded_h();
    for a in 0..g.dim() {
        for i in 0..g.len() {
            let m = g.multi_index(i);
            let c = g.center(i);
            // face above cell i
            let mut mid = c;
            mid[a] += 0.5 * h[a];
            let above = if m[a] + 1 < n[a] {
                let mut t = m;
                t[a] += 1;
                Some(g.index(t))
            } else {
                None
            };
            visit(a, Some(i), above, mid);
            if m[a] == 0 {
                let mut mid = c;
                mid[a] -= 0.5 * h[a];
                visit(a, None, Some(i), mid);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: f64, hi: f64, n: usize) -> Grid {
        Grid::cube(1, lo, hi, n).unwrap()
    }

    #[test]
    fn zero_extension_outside_box() {
        let g = line(0.0, 1.0, 10);
        let d = g.bounding_box();
        let u = GridFunction::from_fn(&g, &d, |_| 3.0).unwrap();
        assert_eq!(u.eval(&[0.55]), 3.0);
        assert_eq!(u.eval(&[-0.01]), 0.0);
        assert_eq!(u.eval(&[1.5]), 0.0);
    }

    #[test]
    fn shift_identity_and_indicator() {
        let g = line(-2.0, 2.0, 8);
        let d = g.bounding_box();
        let u = GridFunction::from_fn(&g, &d, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 })
            .unwrap();
        assert_eq!(shift(&u, &[0.0]).unwrap().values(), u.values());
        let v = shift(&u, &[0.5]).unwrap();
        let expect: Vec<f64> = g
            .centers()
            .iter()
            .map(|c| if (-0.5..0.5).contains(&c[0]) { 1.0 } else { 0.0 })
            .collect();
        assert_eq!(v.values(), &expect[..]);
        assert!(shift(&u, &[0.3]).is_err());
    }

    #[test]
    fn shift_preserves_norm_and_composes() {
        let g = Grid::cube(2, 0.0, 1.0, 16).unwrap();
        let d = g.bounding_box();
        let u = GridFunction::from_fn(&g, &d, |x| {
            let r2 = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
            (0.04 - r2).max(0.0)
        })
        .unwrap();
        let f = Weight::one();
        let h = 1.0 / 16.0;
        let a = [2.0 * h, -h];
        let b = [-h, 3.0 * h];
        let v = shift(&u, &a).unwrap();
        let n0 = weighted_lp_norm(&u, 3.0, &f).unwrap();
        let n1 = weighted_lp_norm(&v, 3.0, &f).unwrap();
        assert!((n0 - n1).abs() < 1e-14 * n0);
        let ab = shift(&shift(&u, &a).unwrap(), &b).unwrap();
        let direct = shift(&u, &[a[0] + b[0], a[1] + b[1]]).unwrap();
        assert_eq!(ab.values(), direct.values());
    }

    #[test]
    fn lp_norm_of_constant() {
        let g = line(0.0, 1.0, 17);
        let d = g.bounding_box();
        let u = GridFunction::from_fn(&g, &d, |_| 1.0).unwrap();
        assert!((weighted_lp_norm(&u, 2.0, &Weight::one()).unwrap() - 1.0).abs() < 1e-14);
        let z = GridFunction::zeros(&g, &d).unwrap();
        assert_eq!(weighted_lp_norm(&z, 2.0, &Weight::one()).unwrap(), 0.0);
    }

    #[test]
    fn gradient_exact_on_affine_and_quadratic() {
        let g = line(-1.0, 1.0, 20);
        let d = g.bounding_box();
        let lin = GridFunction::from_fn(&g, &d, |x| x[0]).unwrap();
        let quad = GridFunction::from_fn(&g, &d, |x| x[0] * x[0]).unwrap();
        let c = GridFunction::from_fn(&g, &d, |_| 4.0).unwrap();
        let gl = discrete_gradient(&lin);
        let gq = discrete_gradient(&quad);
        let gc = discrete_gradient(&c);
        for i in 1..19 {
            let x = g.center(i)[0];
            assert!((gl.values[i][0] - 1.0).abs() < 1e-12);
            assert!((gq.values[i][0] - 2.0 * x).abs() < 1e-12);
        }
        assert!(gc.values.iter().all(|v| v[0] == 0.0));
    }

    #[test]
    fn total_variation_counts_jumps() {
        let g = line(-2.0, 2.0, 40);
        let d = g.bounding_box();
        let u = GridFunction::from_fn(&g, &d, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 })
            .unwrap();
        assert!((weighted_total_variation(&u, &Weight::one()) - 2.0).abs() < 1e-14);
        let c3 = Weight::constant(3.0).unwrap();
        assert!((weighted_total_variation(&u, &c3) - 6.0).abs() < 1e-13);
        let inner = Domain::boxed(&[-1.0], &[2.0]).unwrap();
        let k = GridFunction::from_fn(&g, &inner, |_| 5.0).unwrap();
        let all = GridFunction::from_fn(&g, &d, |_| 5.0).unwrap();
        assert!((weighted_total_variation(&k, &Weight::one()) - 10.0).abs() < 1e-13);
        // a constant filling the whole box only jumps at the box faces
        assert!((weighted_total_variation(&all, &Weight::one()) - 10.0).abs() < 1e-13);
    }

    #[test]
    fn weight_sandwich() {
        let g = line(-1.0, 1.0, 64);
        let d = g.bounding_box();
        let u = GridFunction::from_fn(&g, &d, |x| (3.0 * x[0]).sin()).unwrap();
        let f = Weight::new(crate::weight::WeightPreset::Sigmoid { a: 2.0, b: 2.0 }).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let plain = weighted_lp_norm(&u, p, &Weight::one()).unwrap().powf(p);
            let w = weighted_lp_norm(&u, p, &f).unwrap().powf(p);
            assert!(f.inf_bound() * plain <= w * (1.0 + 1e-14));
            assert!(w <= f.sup_bound() * plain * (1.0 + 1e-14));
        }
    }
}
