//! Lower and upper bounds (and exact values where they coincide) for the
//! robustness of nonclassicality and of entanglement of Gaussian quantum
//! states described by covariance matrices.
//!
//! The crate is organized around covariance matrices in `(x1..xn, p1..pn)`
//! ordering with vacuum variance 1:
//!
//! - [`symplectic`]: covariance-matrix data model, symplectic form,
//!   Williamson decomposition, complex-covariance transforms.
//! - [`criteria`]: classicality and separability predicates and the
//!   free-state boundary parameterizations used by the optimizers.
//! - [`optimizer`]: deterministic derivative-free simplex search with
//!   box constraints and multi-start.
//! - [`bounds`]: witness lower bounds, largest-eigenvalue upper bounds,
//!   closed forms for the canonical state families, and the dispatcher.
//! - [`fock`]: truncated-Fock-space brute force used as an independent
//!   oracle for the covariance-level machinery.

pub mod bounds;
pub mod criteria;
pub mod error;
pub mod fock;
pub mod optimizer;
pub mod symplectic;
pub mod tol;

pub use bounds::{RobustnessBounds, Resource, StateFamily};
pub use error::GaussError;
pub use symplectic::{CovarianceMatrix, SymmetricSpec, SymplecticDecomposition, TwoModeStandardForm};
