//! Numerical tolerances used across the crate.
//!
//! Validation-level checks (Hermiticity, trace, positivity) sit near machine
//! precision; constructive steps that accumulate rounding (reconstruction,
//! completeness, frame lifts) get an order of magnitude more headroom; and
//! iterative-optimizer comparisons get two more.

/// Tolerance record threaded through validating constructors and checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity / trace / eigenvalue validation of exact inputs.
    pub validation: f64,
    /// Reconstruction and completeness residuals (sums of many products).
    pub reconstruction: f64,
    /// Comparisons against analytically known values.
    pub analytic: f64,
    /// Comparisons involving iterative optimizer output.
    pub optimizer: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            validation: 1e-12,
            reconstruction: 1e-10,
            analytic: 1e-9,
            optimizer: 1e-6,
        }
    }
}

impl Tolerances {
    pub const fn new(validation: f64, reconstruction: f64, analytic: f64, optimizer: f64) -> Self {
        Self {
            validation,
            reconstruction,
            analytic,
            optimizer,
        }
    }
}

/// Eigenvalues in `[-validation, 0)` are clipped to zero during state
/// validation; anything below the window is a hard error.
pub const EIGENVALUE_CLIP_WINDOW: f64 = 1e-12;

/// Dead-band for gauge directions of the second-variation form.
pub const HESSIAN_GAUGE_BAND: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ordering() {
        let t = Tolerances::default();
        assert!(t.validation < t.reconstruction);
        assert!(t.reconstruction < t.analytic);
        assert!(t.analytic < t.optimizer);
    }
}
