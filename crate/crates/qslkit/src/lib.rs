//! Quantum-speed-limit toolkit for Markovian open quantum systems.
//!
//! The crate computes the explicit speed limit `T*` built from the generator
//! amplitude `A` and the channel excess `E` of a Lindblad model, compares it
//! to the `T_DC` bound, ranks initial states by robustness, validates the
//! bounds against integrated master-equation dynamics, and solves the convex
//! Hamiltonian-design problem that maximizes `T*` for a fixed target state.
//!
//! Layout:
//! - [`matrix`], [`linalg`]: dense complex matrices and the small numerical
//!   kernels (Hermitian eigenvalues, SVD least squares, power iteration).
//! - [`states`], [`operators`], [`system`]: pure states, density matrices,
//!   standard operator constructors, dissipators, and the system model.
//! - [`bounds`]: `A`, `E`, `T*`, `T_DC`, their ratio, rankings, sweeps.
//! - [`dynamics`]: fixed-step RK4 integration of the master equation,
//!   overlap trajectories, and first-exit (escape) times.
//! - [`engineering`]: the quadratic cost `F(H)`, its gradient, the linear
//!   stationarity equation, and the SVD / descent solvers.
//! - [`scenarios`]: named builders for the worked two-level, Bell-state,
//!   atomic-ensemble, and qutrit-ladder systems with reference values.
//! - [`io`]: text model files, the operator-expression parser, JSON reports,
//!   and CSV output.

pub mod bounds;
pub mod dynamics;
pub mod engineering;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod operators;
pub mod scenarios;
pub mod states;
pub mod system;

pub use bounds::{ExtReal, QslReport};
pub use matrix::ComplexMatrix;
pub use states::{DensityMatrix, PureState};
pub use system::SystemModel;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: got {got}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        got: String,
        expected: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(transparent)]
    Expr(#[from] io::expr::ExprError),

    #[error("model file error at line {line}: {message}")]
    ModelFile { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("descent did not converge after {iterations} iterations (|grad| = {gradient_norm:.3e})")]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("stationarity residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(
    context: &'static str,
    got: impl ToString,
    expected: impl ToString,
) -> Error {
    Error::DimensionMismatch {
        context,
        got: got.to_string(),
        expected: expected.to_string(),
    }
}
