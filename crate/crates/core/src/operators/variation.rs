use crate::energy::{bilinear_with, face_form, PairSystem};
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::params::FractionalParams;
use crate::weight::Weight;

use super::{OperatorHandle, OperatorKind};

/// One step size of the first-variation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationRow {
    pub t: f64,
    /// `R(t) = (E(u + t phi) - E(u)) / t - <A u, phi> h^d`.
    pub residual: f64,
    /// `t E(phi)`, the exact value of `R(t)` for a quadratic energy.
    pub expected: f64,
    pub abs_error: f64,
    /// `abs_error` relative to the magnitude of the terms that cancel in
    /// `R(t)`: `(E(u + t phi) + E(u)) / t + |<A u, phi> h^d| + t E(phi)`.
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstVariationReport {
    pub kind: OperatorKind,
    /// `<A u, phi> h^d`.
    pub pairing: f64,
    /// `E(phi)`.
    pub phi_energy: f64,
    pub rows: Vec<VariationRow>,
    pub max_rel_error: f64,
    /// `R(0)` from a linear fit through the two smallest `t`.
    pub extrapolated_residual: f64,
}

/// Checks `([u + t phi]^2 - [u]^2) / t - <A u, phi> h^d = t [phi]^2` for the
/// fractional energy with the operator of [`super::weighted_fractional_laplacian`].
pub fn first_variation_check(
    u: &GridFunction,
    phi: &GridFunction,
    s: f64,
    f: &Weight,
    t_list: &[f64],
) -> Result<FirstVariationReport> {
    let phi = lift(u, phi)?;
    let params = FractionalParams::new(s, 2.0)?;
    let sys = PairSystem::new(u.grid(), u.support_mask(), &params, f)?;
    let op = OperatorHandle::fractional(u, &params, f)?;
    let energy = |w: &GridFunction| bilinear_with(&sys, w.values(), w.values(), f);
    report(OperatorKind::Fractional, u, &phi, &op, energy, t_list)
}

/// The local analog with `dirichlet_energy(., 2, f)` and the weighted Laplacian.
pub fn local_first_variation_check(
    u: &GridFunction,
    phi: &GridFunction,
    f: &Weight,
    t_list: &[f64],
) -> Result<FirstVariationReport> {
    let phi = lift(u, phi)?;
    let op = OperatorHandle::local(u, f);
    let energy = |w: &GridFunction| face_form(w.grid(), w.values(), w.values(), f);
    report(OperatorKind::Local, u, &phi, &op, energy, t_list)
}

/// Re-expresses `phi` on the support of `u` after checking that every cell
/// where `phi` is nonzero lies in the support together with its axis
/// neighbours.
fn lift(u: &GridFunction, phi: &GridFunction) -> Result<GridFunction> {
    let g = u.grid();
    if phi.grid() != g {
        return Err(Error::GridMismatch);
    }
    let mask = u.support_mask();
    let n = g.padded_cells();
    for (i, &v) in phi.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let m = g.multi_index(i);
        let mut ok = mask[i];
        for a in 0..g.dim() {
            if !ok {
                break;
            }
            for step in [-1i64, 1] {
                let t = m[a] as i64 + step;
                if t < 0 || t >= n[a] as i64 {
                    ok = false;
                    break;
                }
                let mut mm = m;
                mm[a] = t as usize;
                ok &= mask[g.index(mm)];
            }
        }
        if !ok {
            return Err(Error::SupportViolation(i));
        }
    }
    Ok(u.with_values(phi.values().to_vec()))
}

fn report<E: Fn(&GridFunction) -> f64>(
    kind: OperatorKind,
    u: &GridFunction,
    phi: &GridFunction,
    op: &OperatorHandle,
    energy: E,
    t_list: &[f64],
) -> Result<FirstVariationReport> {
    let pairing = op.apply(u)?.inner(phi)?;
    let eu = energy(u);
    let ephi = energy(phi);
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !(t != 0.0 && t.is_finite()) {
            return Err(crate::error::invalid("t", "step sizes must be finite and nonzero"));
        }
        let et = energy(&u.axpy(t, phi)?);
        let residual = (et - eu) / t - pairing;
        let expected = t * ephi;
        let abs_error = (residual - expected).abs();
        let scale = (et.abs() + eu.abs()) / t.abs() + pairing.abs() + (t * ephi).abs();
        rows.push(VariationRow {
            t,
            residual,
            expected,
            abs_error,
            rel_error: if scale > 0.0 { abs_error / scale } else { 0.0 },
        });
    }
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let extrapolated_residual = {
        let mut by_t: Vec<&VariationRow> = rows.iter().collect();
        by_t.sort_by(|a, b| a.t.abs().total_cmp(&b.t.abs()));
        match by_t.as_slice() {
            [a, b, ..] if a.t != b.t => a.residual - a.t * (b.residual - a.residual) / (b.t - a.t),
            [a, ..] => a.residual,
            [] => 0.0,
        }
    };
    Ok(FirstVariationReport {
        kind,
        pairing,
        phi_energy: ephi,
        rows,
        max_rel_error,
        extrapolated_residual,
    })
}
