use crate::error::{invalid, Result};
use crate::function::{discrete_gradient, for_each_face, GridFunction};
use crate::grid::Grid;
use crate::quadrature::CompensatedSum;
use crate::weight::Weight;

/// `int f^2 |grad u|^p dx`, without the `K_{d,p}` prefactor.
///
/// For `p = 2` the energy is assembled face by face,
/// `sum_faces f(face)^2 (u_+ - u_-)^2 / h_k^2 * h^d`, with faces on the
/// bounding box differencing against the zero extension. This is the quadratic
/// form whose gradient is [`crate::operators::weighted_laplacian`]. Other
/// exponents use the cell-centered gradient from [`discrete_gradient`].
pub fn dirichlet_energy(u: &GridFunction, p: f64, f: &Weight) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} is outside [1, inf)")));
    }
    if p == 2.0 {
        return Ok(face_form(u.grid(), u.values(), u.values(), f));
    }
    let g = u.grid();
    let grad = discrete_gradient(u);
    let acc: CompensatedSum = (0..g.len())
        .filter(|&i| grad.values[i].iter().any(|&c| c != 0.0))
        .map(|i| {
            let fx = f.eval(&g.center(i)[..g.dim()]);
            fx * fx * grad.norm_at(i).powf(p)
        })
        .collect();
    Ok(acc.value() * g.cell_volume())
}

/// Symmetric bilinear face form; `face_form(u, u)` is the `p = 2` energy.
pub(crate) fn face_form(g: &Grid, u: &[f64], v: &[f64], f: &Weight) -> f64 {
    let mut acc = CompensatedSum::default();
    let h = g.h();
    for_each_face(g, |a, lo, hi, mid| {
        let du = lo.map_or(0.0, |i| u[i]) - hi.map_or(0.0, |i| u[i]);
        let dv = lo.map_or(0.0, |i| v[i]) - hi.map_or(0.0, |i| v[i]);
        if du != 0.0 && dv != 0.0 {
            let fm = f.eval(&mid[..g.dim()]);
            acc.add(fm * fm * (du * dv) / (h[a] * h[a]));
        }
    });
    acc.value() * g.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn parabola_energy_converges() {
        // int_{-1}^{1} (2x)^2 dx = 8/3; the kink of the clamped parabola at
        // the support boundary costs a first-order term
        let d = crate::grid::Domain::boxed(&[-1.0], &[2.0]).unwrap();
        let err = |n: usize| {
            let g = Grid::cube(1, -2.0, 2.0, n).unwrap();
            let u = GridFunction::from_fn(&g, &d, |x| 1.0 - x[0] * x[0]).unwrap();
            (dirichlet_energy(&u, 2.0, &Weight::one()).unwrap() - 8.0 / 3.0).abs()
        };
        let (e1, e2) = (err(400), err(800));
        assert!(e2 < 2.5 * 4.0 / 800.0, "{e2}");
        assert!((e1 / e2 - 2.0).abs() < 0.05, "{e1} {e2}");
        let g = Grid::cube(1, -2.0, 2.0, 800).unwrap();
        let u = GridFunction::from_fn(&g, &d, |x| 1.0 - x[0] * x[0]).unwrap();
        let e = dirichlet_energy(&u, 2.0, &Weight::one()).unwrap();
        let e3 = dirichlet_energy(&u, 2.0, &Weight::constant(3.0).unwrap()).unwrap();
        assert!((e3 - 9.0 * e).abs() < 1e-12 * e3);
        // p != 2 uses the centered gradient: int |2x|^3 = 4
        let e_3 = dirichlet_energy(&u, 3.0, &Weight::one()).unwrap();
        assert!((e_3 - 4.0).abs() < 12.0 * 4.0 / 800.0, "{e_3}");
    }

    #[test]
    fn constant_on_whole_space_has_no_energy() {
        let g = Grid::cube(2, 0.0, 1.0, 6).unwrap();
        let dom = g.bounding_box();
        let z = GridFunction::zeros(&g, &dom).unwrap();
        assert_eq!(dirichlet_energy(&z, 2.0, &Weight::one()).unwrap(), 0.0);
        assert_eq!(dirichlet_energy(&z, 1.5, &Weight::one()).unwrap(), 0.0);
    }
}
