use serde::{Deserialize, Serialize};

/// Numerical tolerances and the matrix dimension cap shared by every module.
///
/// `clip` is relative: eigenvalues with `|λ| <= clip * λ_max` count as zero for
/// rank, support and square-root purposes. Everything else is absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity, relative to `max(1, ‖H‖_F)`.
    pub herm: f64,
    /// Allowed negativity of the smallest eigenvalue.
    pub psd: f64,
    pub recon: f64,
    pub sqrt: f64,
    pub clip: f64,
    pub trace: f64,
    /// Largest side length of any single matrix.
    pub dim_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            psd: 1e-9,
            recon: 1e-9,
            sqrt: 1e-9,
            clip: 1e-10,
            trace: 1e-9,
            dim_cap: 4096,
        }
    }
}

impl Tolerances {
    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    /// Absolute cutoff below which an eigenvalue is treated as zero, given the
    /// largest eigenvalue magnitude of the same matrix.
    pub fn clip_threshold(&self, lambda_max: f64) -> f64 {
        self.clip * lambda_max.abs()
    }
}
