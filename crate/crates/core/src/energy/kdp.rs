//! The dimensional constant `K_{d,p}` linking the fractional and local energies.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::quadrature::{CompensatedSum, TanhSinh};

/// `K_{d,p} = (2 pi^{(d-1)/2} / p) Gamma((p+1)/2) / Gamma((d+p)/2)`.
pub fn kdp_closed_form(d: usize, p: f64) -> Result<f64> {
    check(d, p)?;
    let dd = d as f64;
    let log = (0.5 * (dd - 1.0)) * PI.ln() + ln_gamma(0.5 * (p + 1.0)) - ln_gamma(0.5 * (dd + p));
    Ok(2.0 / p * log.exp())
}

/// `(1-s) int_{B_1} |z . nu|^p / |z|^{d+sp} dz` by product quadrature: the
/// radial factor `1 / (p (1-s))` is exact and the spherical integral of
/// `|theta . nu|^p` is done with tanh-sinh rules split at the zeros of
/// `theta . nu`. `nu` defaults to the first unit vector and is normalised.
pub fn kdp_quadrature(d: usize, p: f64, s: f64, nu: Option<&[f64]>) -> Result<f64> {
    check(d, p)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} is outside the open interval (0, 1)")));
    }
    let nu = unit(d, nu)?;
    let q = Reflector::new(&nu);
    let ts = TanhSinh::new(6);
    let dot = |psi: &[f64]| -> f64 {
        let th = q.apply(psi);
        th.iter().zip(&nu).map(|(a, b)| a * b).sum::<f64>().abs().powf(p)
    };
    let sphere = match d {
        1 => dot(&[1.0]) + dot(&[-1.0]),
        2 => {
            // psi = (cos phi, sin phi); zeros of psi_1 at +-pi/2
            let quarters = [(-FRAC_PI_2, 0.0), (0.0, FRAC_PI_2), (FRAC_PI_2, PI), (PI, 1.5 * PI)];
            quarters
                .iter()
                .map(|&(a, b)| ts.integrate(a, b, |phi| dot(&[phi.cos(), phi.sin()])))
                .collect::<CompensatedSum>()
                .value()
        }
        _ => {
            // polar angle measured from the first axis, trapezoid in azimuth
            let m = 64;
            let polar = |th: f64| -> f64 {
                let (c, sn) = (th.cos(), th.sin());
                let acc: CompensatedSum = (0..m)
                    .map(|k| {
                        let ph = TAU * k as f64 / m as f64;
                        dot(&[c, sn * ph.cos(), sn * ph.sin()])
                    })
                    .collect();
                acc.value() * TAU / m as f64 * sn
            };
            ts.integrate(0.0, FRAC_PI_2, polar) + ts.integrate(FRAC_PI_2, PI, polar)
        }
    };
    let radial = 1.0 / (p * (1.0 - s));
    Ok((1.0 - s) * radial * sphere)
}

fn check(d: usize, p: f64) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(invalid("d", format!("{d} not in 1..=3")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} is outside [1, inf)")));
    }
    Ok(())
}

fn unit(d: usize, nu: Option<&[f64]>) -> Result<Vec<f64>> {
    let Some(v) = nu else {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        return Ok(e);
    };
    if v.len() != d {
        return Err(invalid("nu", "length must equal d"));
    }
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(invalid("nu", "must be a nonzero finite vector"));
    }
    Ok(v.iter().map(|c| c / n).collect())
}

/// Householder reflection mapping the first unit vector onto `nu`, so that
/// the quadrature frame is aligned with the kinks of `|theta . nu|^p`.
struct Reflector {
    w: Vec<f64>,
}

impl Reflector {
    fn new(nu: &[f64]) -> Self {
        let mut w = nu.to_vec();
        w[0] -= 1.0;
        let n = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n < 1e-300 {
            w.iter_mut().for_each(|c| *c = 0.0);
        } else {
            w.iter_mut().for_each(|c| *c /= n);
        }
        Reflector { w }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let t: f64 = 2.0 * self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        x.iter().zip(&self.w).map(|(a, b)| a - t * b).collect()
    }
}
