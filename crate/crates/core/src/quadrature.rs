//! One-dimensional quadrature rules and compensated summation.

use std::f64::consts::{FRAC_PI_2, PI};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, nodes found by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = CompensatedSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.value()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { p0 } else { p1 };
    let dp = n as f64 * (x * pn - p0) / (x * x - 1.0);
    (pn, dp)
}

/// Double-exponential (tanh-sinh) rule; robust for integrands with
/// algebraic endpoint singularities.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    /// `(offset from the nearer endpoint as a fraction of the half-width, weight)`
    /// for the non-negative abscissae.
    pairs: Vec<(f64, f64)>,
    center_weight: f64,
}

impl TanhSinh {
    /// Rule with step `2^-level` on `t in [-4, 4]`.
    pub fn new(level: u32) -> Self {
        let step = 0.5f64.powi(level as i32);
        let kmax = (4.0 / step).ceil() as usize;
        let mut pairs = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            let t = k as f64 * step;
            let u = FRAC_PI_2 * t.sinh();
            let cu = u.cosh();
            // 1 - tanh(u), computed without cancellation
            let delta = (-u).exp() / cu;
            let w = step * FRAC_PI_2 * t.cosh() / (cu * cu);
            pairs.push((delta, w));
        }
        TanhSinh {
            pairs,
            center_weight: step * FRAC_PI_2,
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mut acc = CompensatedSum::default();
        acc.add(self.center_weight * f(a + half));
        for &(delta, w) in &self.pairs {
            // abscissae that round onto an endpoint carry negligible weight
            let (xl, xr) = (a + half * delta, b - half * delta);
            if xl != a && w > 0.0 {
                acc.add(w * f(xl));
            }
            if xr != b && w > 0.0 {
                acc.add(w * f(xr));
            }
        }
        half * acc.value()
    }
}

/// Neumaier compensated summation; deterministic for a fixed input order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice in index order.
pub fn sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        // exact up to degree 15
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4));
        let exact = 2f64.powi(16) / 16.0 - 3.0 * 2f64.powi(5) / 5.0;
        assert!((v - exact).abs() < 1e-10 * exact.abs());
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let ts = TanhSinh::new(6);
        let v = ts.integrate(0.0, 1.0, |x| x.powf(-0.5));
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        let c = ts.integrate(0.0, FRAC_PI_2, |x| x.cos().powf(1.5));
        // int_0^{pi/2} cos^{3/2} = sqrt(pi) Gamma(5/4) / (2 Gamma(7/4))
        let exact = PI.sqrt() * 0.906_402_477_055_477 / (2.0 * 0.919_062_526_848_883);
        assert!((c - exact).abs() < 1e-12, "{c} vs {exact}");
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(&v), 2.0);
    }
}
