use crate::energy::pow_abs;
use crate::error::{invalid, Result};
use crate::function::{aligned_offset, shift_by_cells, GridFunction};
use crate::grid::{Domain, MAX_DIM};
use crate::quadrature::CompensatedSum;
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationRow {
    pub shift: Vec<f64>,
    /// `|tau_h v - v|^p` in `L^p_f(E)`.
    pub lhs: f64,
    /// The right-hand side without the unknown constant `C(d, p)`.
    pub rhs: f64,
    /// `lhs / rhs`, with `0/0` read as 0.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationReport {
    pub rows: Vec<TranslationRow>,
    pub max_ratio: f64,
}

/// `sum_{x_i in set} |(tau_k v - v)_i|^p f_i`.
fn masked_lp(v: &GridFunction, k: [i64; MAX_DIM], set: &[bool], p: f64, f_vals: &[f64]) -> f64 {
    let sh = shift_by_cells(v, k);
    let acc: CompensatedSum = (0..set.len())
        .filter(|&i| set[i])
        .filter_map(|i| {
            let d = sh.values()[i] - v.values()[i];
            (d != 0.0).then(|| pow_abs(d, p) * f_vals[i])
        })
        .collect();
    acc.value()
}

/// Ratio of `|tau_h v - v|^p_{L^p_f(E)}` to
/// `(1-s) |h|^{sp} sum_{0 < |y| <= |h|} |tau_y v - v|^p_{L^p_f(E_|h|)} |y|^{-(d+sp)} h^d`
/// for each grid-aligned shift `h`; `y` ranges over grid-aligned shifts and
/// `E_|h|` inflates every box of `E` by `|h|` along each axis.
pub fn translation_estimate_check(
    v: &GridFunction,
    f: &Weight,
    s: f64,
    p: f64,
    e: &Domain,
    shifts: &[Vec<f64>],
) -> Result<TranslationReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} is outside the open interval (0, 1)")));
    }
    if !(p >= 1.0) {
        return Err(invalid("p", "must be >= 1"));
    }
    let g = v.grid();
    let dim = g.dim();
    let f_vals: Vec<f64> = (0..g.len()).map(|i| f.eval(&g.center(i)[..dim])).collect();
    let e_mask = e.mask(g);
    let h = g.h();
    let q = dim as f64 + s * p;
    let mut rows = Vec::with_capacity(shifts.len());
    for hv in shifts {
        let k = aligned_offset(g, hv)?;
        let hn = hv.iter().map(|c| c * c).sum::<f64>().sqrt();
        let lhs = masked_lp(v, k, &e_mask, p, &f_vals) * g.cell_volume();
        if hn == 0.0 {
            rows.push(TranslationRow {
                shift: hv.clone(),
                lhs,
                rhs: 0.0,
                ratio: 0.0,
            });
            continue;
        }
        let big = e.inflated(hn).mask(g);
        // integer ball of shifts with 0 < |y| <= |h|
        let reach: Vec<i64> = (0..MAX_DIM)
            .map(|a| if a < dim { (hn / h[a] * (1.0 + 1e-12)).floor() as i64 } else { 0 })
            .collect();
        let mut acc = CompensatedSum::default();
        for y0 in -reach[0]..=reach[0] {
            for y1 in -reach[1]..=reach[1] {
                for y2 in -reach[2]..=reach[2] {
                    let y = [y0, y1, y2];
                    let yn = (0..dim).map(|a| (y[a] as f64 * h[a]).powi(2)).sum::<f64>().sqrt();
                    if yn == 0.0 || yn > hn * (1.0 + 1e-12) {
                        continue;
                    }
                    acc.add(masked_lp(v, y, &big, p, &f_vals) * yn.powf(-q));
                }
            }
        }
        let rhs = (1.0 - s) * hn.powf(s * p) * acc.value() * g.cell_volume() * g.cell_volume();
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        rows.push(TranslationRow {
            shift: hv.clone(),
            lhs,
            rhs,
            ratio,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(TranslationReport { rows, max_ratio })
}
