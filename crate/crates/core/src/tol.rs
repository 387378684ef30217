//! Centralized numerical tolerances.

/// Relative symmetry tolerance for covariance matrices.
pub const SYMMETRY_REL: f64 = 1e-12;
/// Absolute eigenvalue tolerance for positive-semidefinite checks.
pub const PSD_ABS: f64 = 1e-10;
/// Entrywise residual tolerance for Williamson round trips.
pub const WILLIAMSON_RESIDUAL: f64 = 1e-9;
/// Symplectic eigenvalues of the conjugated state must stay above 1 - this.
pub const NU_PP_ABS: f64 = 1e-8;
/// Default simplex-diameter tolerance for the local optimizer.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Default evaluation budget per optimizer start.
pub const MAX_EVAL: usize = 20_000;
/// Imaginary residue allowed when a complex intermediate must be real.
pub const IMAG_RESIDUE: f64 = 1e-8;
