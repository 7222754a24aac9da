use crate::error::{invalid, Result};

/// Nonnegative step function on `(0, inf)`: value `values[i]` on
/// `[breaks[i], breaks[i + 1])`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(invalid("phi", "need one more breakpoint than values"));
        }
        if !breaks.windows(2).all(|w| w[0] < w[1]) || !breaks.iter().all(|b| b.is_finite()) {
            return Err(invalid("phi", "breakpoints must be finite and strictly increasing"));
        }
        if !values.iter().all(|&v| v >= 0.0 && v.is_finite()) {
            return Err(invalid("phi", "values must be finite and nonnegative"));
        }
        if !(breaks[0] > 0.0) && values.iter().any(|&v| v > 0.0) {
            return Err(invalid("phi", "support touches 0, where the weighted integral may diverge"));
        }
        Ok(StepFunction { breaks, values })
    }

    /// The zero function.
    pub fn zero() -> Self {
        StepFunction {
            breaks: vec![1.0, 2.0],
            values: vec![0.0],
        }
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        StepFunction::new(vec![a, b], vec![1.0])
    }

    pub fn eval(&self, t: f64) -> f64 {
        (0..self.values.len())
            .find(|&i| t >= self.breaks[i] && t < self.breaks[i + 1])
            .map_or(0.0, |i| self.values[i])
    }

    /// Pieces clipped to `[0, r]` as `(a, b, value)`.
    fn pieces(&self, r: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.values.len()).filter_map(move |i| {
            let a = self.breaks[i];
            let b = self.breaks[i + 1].min(r);
            (a < b && self.values[i] > 0.0).then_some((a, b, self.values[i]))
        })
    }

    /// `int_0^r phi`.
    pub fn integral(&self, r: f64) -> f64 {
        self.pieces(r).map(|(a, b, c)| c * (b - a)).sum()
    }
}

/// `int_a^b x^{-k} dx` without cancellation near `k = 1`.
fn power_integral(a: f64, b: f64, k: f64) -> f64 {
    let e = 1.0 - k;
    let log = (b / a).ln();
    if (e * log).abs() < 1e-300 {
        return log;
    }
    a.powf(e) * (e * log).exp_m1() / e
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyResult {
    /// `int_0^r rho^{-(m+1)} int_0^rho phi dt drho`, `m = d + l`.
    pub lhs: f64,
    /// `(1/m) int_0^r phi(t) t^{-m} dt`.
    pub rhs: f64,
}

impl HardyResult {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Both sides of the Hardy-type inequality in closed form, piece by piece.
pub fn hardy_check(phi: &StepFunction, d: usize, l: f64, r: f64) -> Result<HardyResult> {
    if d == 0 {
        return Err(invalid("d", "must be >= 1"));
    }
    if !(l >= 0.0 && l.is_finite()) {
        return Err(invalid("l", "must be finite and >= 0"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("r", "must be finite and > 0"));
    }
    let m = d as f64 + l;
    let rhs = phi.pieces(r).map(|(a, b, c)| c * power_integral(a, b, m)).sum::<f64>() / m;

    // Phi(rho) = int_0^rho phi is piecewise affine: A + B rho between breakpoints
    let mut lhs = 0.0;
    let mut acc = 0.0;
    let mut prev = None::<f64>;
    for (a, b, c) in phi.pieces(r) {
        if let Some(p) = prev {
            if a > p {
                lhs += acc * power_integral(p, a, m + 1.0);
            }
        }
        // on [a, b]: Phi = acc + c (rho - a)
        lhs += (acc - c * a) * power_integral(a, b, m + 1.0) + c * power_integral(a, b, m);
        acc += c * (b - a);
        prev = Some(b);
    }
    if let Some(p) = prev {
        if r > p {
            lhs += acc * power_integral(p, r, m + 1.0);
        }
    }
    Ok(HardyResult { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function() {
        let res = hardy_check(&StepFunction::zero(), 2, 0.5, 1.0).unwrap();
        assert_eq!((res.lhs, res.rhs), (0.0, 0.0));
    }

    #[test]
    fn indicator_of_upper_half() {
        // d = 1, l = 0: lhs = int_{1/2}^1 (rho - 1/2) / rho^2 = ln 2 - 1/2,
        // rhs = int_{1/2}^1 dt / t = ln 2
        let phi = StepFunction::indicator(0.5, 1.0).unwrap();
        let res = hardy_check(&phi, 1, 0.0, 1.0).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((res.lhs - (ln2 - 0.5)).abs() < 1e-15);
        assert!((res.rhs - ln2).abs() < 1e-15);
        assert!(res.holds());
    }

    #[test]
    fn rejects_support_at_origin() {
        assert!(StepFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![0.0]).is_ok());
        assert!(StepFunction::new(vec![0.1, 1.0], vec![-1.0]).is_err());
    }

    #[test]
    fn power_integral_near_log_case() {
        let exact = |k: f64| (2f64.powf(1.0 - k) - 1.0) / (1.0 - k);
        for k in [1.0 + 1e-4, 1.0 - 1e-4, 2.5] {
            assert!((power_integral(1.0, 2.0, k) - exact(k)).abs() < 1e-11);
        }
        let ln2 = std::f64::consts::LN_2;
        assert_eq!(power_integral(1.0, 2.0, 1.0), ln2);
        assert!((power_integral(1.0, 2.0, 1.0 - 1e-12) - ln2).abs() < 1e-12);
    }
}
