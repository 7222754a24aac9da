use crate::error::{invalid, Result};

/// Treatment of the self-pair (the cell against itself) in the double sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagMode {
    /// Drop the self-pair.
    Exclude,
    /// Add the Taylor estimate of the integral over the ball of radius `h/2`
    /// around each center, `K_{d,p} (h/2)^{p(1-s)} / (1-s)` times the local
    /// `p`-energy density.
    GradientCorrect,
}

impl DiagMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagMode::Exclude => "exclude",
            DiagMode::GradientCorrect => "gradient-correct",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exclude" => Some(DiagMode::Exclude),
            "gradient-correct" => Some(DiagMode::GradientCorrect),
            _ => None,
        }
    }
}

pub const DEFAULT_NEAR_DIAG_REFINE: usize = 3;

/// Fractional order `s`, integrability `p`, and quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalParams {
    s: f64,
    p: f64,
    pub near_diag_refine: usize,
    pub diag_mode: DiagMode,
}

impl FractionalParams {
    /// Parameters with the default quadrature controls (refinement 3,
    /// gradient-corrected diagonal).
    pub fn new(s: f64, p: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", format!("{s} is outside the open interval (0, 1)")));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(invalid("p", format!("{p} is outside [1, inf)")));
        }
        Ok(FractionalParams {
            s,
            p,
            near_diag_refine: DEFAULT_NEAR_DIAG_REFINE,
            diag_mode: DiagMode::GradientCorrect,
        })
    }

    pub fn with_refine(mut self, r: usize) -> Self {
        self.near_diag_refine = r.max(1);
        self
    }

    pub fn with_diag_mode(mut self, mode: DiagMode) -> Self {
        self.diag_mode = mode;
        self
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Kernel exponent `d + s p`.
    pub fn kernel_exponent(&self, dim: usize) -> f64 {
        dim as f64 + self.s * self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_checks() {
        assert!(FractionalParams::new(0.0, 2.0).is_err());
        assert!(FractionalParams::new(1.0, 2.0).is_err());
        assert!(FractionalParams::new(0.5, 0.9).is_err());
        let fp = FractionalParams::new(0.5, 1.0).unwrap().with_refine(0);
        assert_eq!(fp.near_diag_refine, 1);
        assert_eq!(DiagMode::parse("exclude"), Some(DiagMode::Exclude));
    }
}
