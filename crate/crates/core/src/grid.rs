//! Uniform tensor grids and box-union domains.
//!
//! Cells are indexed in row-major order with the last axis fastest. Axes
//! beyond `dim` are padded with a single cell so that loops can always run
//! over three nested indices.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Uniform tensor mesh over an axis-aligned bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    origin: [f64; MAX_DIM],
    extent: [f64; MAX_DIM],
    n: [usize; MAX_DIM],
    h: [f64; MAX_DIM],
}

impl Grid {
    pub fn new(origin: &[f64], extent: &[f64], cells: &[usize]) -> Result<Self> {
        let dim = origin.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if extent.len() != dim || cells.len() != dim {
            return Err(Error::InvalidGrid(
                "origin, extent and cell counts must have equal length".into(),
            ));
        }
        let mut g = Grid {
            dim,
            origin: [0.0; MAX_DIM],
            extent: [1.0; MAX_DIM],
            n: [1; MAX_DIM],
            h: [1.0; MAX_DIM],
        };
        for k in 0..dim {
            if !origin[k].is_finite() || !extent[k].is_finite() || extent[k] <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: extent must be finite and positive (got {})",
                    extent[k]
                )));
            }
            if cells[k] < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: need at least 2 cells (got {})",
                    cells[k]
                )));
            }
            g.origin[k] = origin[k];
            g.extent[k] = extent[k];
            g.n[k] = cells[k];
            g.h[k] = extent[k] / cells[k] as f64;
        }
        Ok(g)
    }

    /// Grid of `cells` cells per axis on the cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        Grid::new(&vec![lo; dim], &vec![hi - lo; dim], &vec![cells; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn cells(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn h(&self) -> &[f64] {
        &self.h[..self.dim]
    }

    /// Cell counts padded to three axes.
    pub(crate) fn padded_cells(&self) -> [usize; MAX_DIM] {
        self.n
    }

    pub(crate) fn padded_h(&self) -> [f64; MAX_DIM] {
        self.h
    }

    pub fn h_min(&self) -> f64 {
        self.h().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.h().iter().copied().fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().iter().product()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, m: [usize; MAX_DIM]) -> usize {
        (m[0] * self.n[1] + m[1]) * self.n[2] + m[2]
    }

    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let m2 = idx % self.n[2];
        let rest = idx / self.n[2];
        [rest / self.n[1], rest % self.n[1], m2]
    }

    /// Cell center `origin + (i + 1/2) h`, padded with zeros beyond `dim`.
    pub fn center(&self, idx: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(idx);
        let mut x = [0.0; MAX_DIM];
        for k in 0..self.dim {
            x[k] = self.origin[k] + (m[k] as f64 + 0.5) * self.h[k];
        }
        x
    }

    pub fn centers(&self) -> Vec<[f64; MAX_DIM]> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// Whether `x` lies in the closed bounding box.
    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|k| x[k] >= self.origin[k] && x[k] <= self.origin[k] + self.extent[k])
    }

    /// Cell containing `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut m = [0usize; MAX_DIM];
        for k in 0..self.dim {
            let t = (x[k] - self.origin[k]) / self.h[k];
            if !(t >= 0.0) || t >= self.n[k] as f64 {
                return None;
            }
            m[k] = t.floor() as usize;
        }
        Some(self.index(m))
    }

    /// The bounding box as a single-box domain.
    pub fn bounding_box(&self) -> Domain {
        Domain {
            dim: self.dim,
            boxes: vec![Cuboid {
                origin: self.origin,
                extent: self.extent,
            }],
        }
    }
}

/// Axis-aligned open box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuboid {
    pub origin: [f64; MAX_DIM],
    pub extent: [f64; MAX_DIM],
}

impl Cuboid {
    fn contains(&self, x: &[f64], dim: usize) -> bool {
        (0..dim).all(|k| x[k] > self.origin[k] && x[k] < self.origin[k] + self.extent[k])
    }

    fn overlaps(&self, other: &Cuboid, dim: usize) -> bool {
        (0..dim).all(|k| {
            let lo = self.origin[k].max(other.origin[k]);
            let hi = (self.origin[k] + self.extent[k]).min(other.origin[k] + other.extent[k]);
            hi > lo
        })
    }
}

/// Finite union of pairwise disjoint open boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    dim: usize,
    boxes: Vec<Cuboid>,
}

impl Domain {
    pub fn boxed(origin: &[f64], extent: &[f64]) -> Result<Self> {
        Domain::union(&[(origin.to_vec(), extent.to_vec())])
    }

    pub fn union(boxes: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let Some(first) = boxes.first() else {
            return Err(Error::InvalidDomain("no boxes given".into()));
        };
        let dim = first.0.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDomain(format!("dimension {dim} not in 1..=3")));
        }
        let mut out = Vec::with_capacity(boxes.len());
        for (b, (o, e)) in boxes.iter().enumerate() {
            if o.len() != dim || e.len() != dim {
                return Err(Error::InvalidDomain(format!("box {b} has wrong dimension")));
            }
            let mut c = Cuboid {
                origin: [0.0; MAX_DIM],
                extent: [1.0; MAX_DIM],
            };
            for k in 0..dim {
                if !o[k].is_finite() || !e[k].is_finite() || e[k] <= 0.0 {
                    return Err(Error::InvalidDomain(format!(
                        "box {b}, axis {k}: extent must be finite and positive"
                    )));
                }
                c.origin[k] = o[k];
                c.extent[k] = e[k];
            }
            out.push(c);
        }
        for a in 0..out.len() {
            for b in a + 1..out.len() {
                if out[a].overlaps(&out[b], dim) {
                    return Err(Error::InvalidDomain(format!("boxes {a} and {b} overlap")));
                }
            }
        }
        Ok(Domain { dim, boxes: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[Cuboid] {
        &self.boxes
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x, self.dim))
    }

    /// The set `{x : dist_inf(x, D) < t}`, realised by inflating every box
    /// per axis. The result may contain overlapping boxes.
    pub fn inflated(&self, t: f64) -> Domain {
        let boxes = self
            .boxes
            .iter()
            .map(|b| {
                let mut c = *b;
                for k in 0..self.dim {
                    c.origin[k] -= t;
                    c.extent[k] += 2.0 * t;
                }
                c
            })
            .collect();
        Domain {
            dim: self.dim,
            boxes,
        }
    }

    /// Cells of `grid` whose centers lie inside the domain.
    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        (0..grid.len())
            .map(|i| self.contains(&grid.center(i)))
            .collect()
    }

    /// Smallest distance from `x` to the complement, or 0 when outside.
    pub fn depth(&self, x: &[f64]) -> f64 {
        self.boxes
            .iter()
            .filter(|b| b.contains(x, self.dim))
            .map(|b| {
                (0..self.dim)
                    .map(|k| (x[k] - b.origin[k]).min(b.origin[k] + b.extent[k] - x[k]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.boxes
            .iter()
            .map(|b| b.extent[..self.dim].iter().product::<f64>())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_are_offset_by_half_cell() {
        let g = Grid::new(&[-1.0, 0.0], &[2.0, 1.0], &[4, 2]).unwrap();
        assert_eq!(g.h(), &[0.5, 0.5]);
        let c = g.center(g.index([0, 1, 0]));
        assert_eq!(&c[..2], &[-0.75, 0.75]);
        for i in 0..g.len() {
            assert_eq!(g.index(g.multi_index(i)), i);
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(&[0.0], &[1.0], &[1]).is_err());
        assert!(Grid::new(&[0.0], &[0.0], &[4]).is_err());
        assert!(Grid::new(&[0.0; 4], &[1.0; 4], &[2; 4]).is_err());
    }

    #[test]
    fn overlapping_boxes_rejected() {
        let r = Domain::union(&[
            (vec![0.0, 0.0], vec![1.0, 1.0]),
            (vec![0.5, 0.5], vec![1.0, 1.0]),
        ]);
        assert!(r.is_err());
        let ok = Domain::union(&[
            (vec![0.0, 0.0], vec![1.0, 1.0]),
            (vec![1.0, 0.0], vec![1.0, 1.0]),
        ]);
        assert!(ok.is_ok());
    }

    #[test]
    fn locate_and_mask() {
        let g = Grid::cube(1, -2.0, 2.0, 8).unwrap();
        assert_eq!(g.locate(&[-1.9]), Some(0));
        assert_eq!(g.locate(&[2.5]), None);
        let d = Domain::boxed(&[-1.0], &[2.0]).unwrap();
        let m = d.mask(&g);
        assert_eq!(m.iter().filter(|&&b| b).count(), 4);
        assert!((d.depth(&[0.0]) - 1.0).abs() < 1e-15);
    }
}
