//! Optimal unambiguous discrimination (UD) of two mixed quantum states, and the
//! programmable-discriminator construction that feeds a pair of reference states
//! into two program registers alongside `n` copies of the unknown state.
//!
//! Module map:
//!
//! - [`linalg`]: dense Hermitian eigendecomposition, PSD square roots, Kronecker
//!   products and span projectors.
//! - [`states`]: density matrices, pure states, the three-state counterexample
//!   family and seeded random states.
//! - [`discrimination`]: fidelity, supports, UD feasibility, the three-regime
//!   optimal failure probability and the copy-count comparison.
//! - [`programmable`]: composed instances, POVM lifting and the two
//!   discriminator theorems' numerical verifiers.
//! - [`povm`]: POVM validation, Born-rule Monte Carlo and closed-form UD POVMs.
//! - [`verify`]: fidelity multiplicativity checks over seeded random states.

pub mod config;
pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod povm;
pub mod programmable;
pub mod serde_float;
pub mod states;
pub mod verify;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use states::{DensityMatrix, PureState};

pub use num_complex::Complex64;
