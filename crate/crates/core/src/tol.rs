//! Numerical tolerances.
//!
//! All thresholds live here so that the CLI can override them in one place.

/// Tolerance set threaded through the analysis routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Semidefiniteness threshold, relative to `max(1, spectral scale)`.
    pub semidef: f64,
    /// Relative singular value cutoff for numerical rank and kernels.
    pub rank: f64,
    /// Absolute tolerance for entrywise equality of non-integer data.
    pub equal: f64,
    /// Group-sum tolerance for vectors in the tangent space.
    pub tangent: f64,
    /// Group-sum tolerance for prism states.
    pub prism: f64,
    /// Relative tolerance on non-tree ratio constraints when scaling.
    pub ratio: f64,
    /// Minimum coordinate required to call an equilibrium interior.
    pub interior_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            semidef: 1e-9,
            rank: 1e-10,
            equal: 1e-12,
            tangent: 1e-10,
            prism: 1e-9,
            ratio: 1e-9,
            interior_margin: 1e-12,
        }
    }
}

impl Tolerances {
    /// Returns a copy with a different semidefiniteness tolerance.
    pub fn with_semidef(mut self, tol: f64) -> Self {
        self.semidef = tol;
        self
    }
}
