//! Error type shared by the numeric modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library.
#[derive(Error, Debug)]
pub enum Error {
    /// An input failed validation: non-finite values, out-of-range arguments,
    /// mismatched grids or shape functions, unknown unit names, unnormalized
    /// states.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// |Tr(V†U)| fell below 1e-12, so the global phase aligning the target
    /// with the propagated gate is undefined and the distance gradient cannot
    /// be formed. Perturbing the control moves the trace off zero.
    #[error("undefined global phase: |Tr(V\u{2020}U)| < 1e-12{}", fmt_iteration(.iteration))]
    UndefinedPhase {
        /// Optimizer iteration at which the singularity was hit, when known.
        iteration: Option<usize>,
    },

    /// The constraint gradients are numerically linearly dependent (the
    /// control sits at a critical point of the constraint map); the Gramian
    /// cannot be solved reliably.
    #[error("critical point of the constraint map: Gramian eigenvalue ratio {eigenvalue_ratio:.3e}")]
    CriticalPoint {
        /// Smallest-to-largest eigenvalue ratio of the offending Gramian.
        eigenvalue_ratio: f64,
    },

    /// Pulse synthesis exhausted its iteration budget (or stalled) before
    /// reaching the requested tolerances. Carries the best iterate found.
    #[error(
        "synthesis did not converge after {iterations} iterations: \
         constraint norm {constraint_norm:.3e}, angle error {angle_error:.3e}"
    )]
    NonConvergence {
        iterations: usize,
        constraint_norm: f64,
        angle_error: f64,
        /// Samples of the best control found, for inspection or restart.
        best_samples: Vec<f64>,
    },

    /// Malformed interchange file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_iteration(it: &Option<usize>) -> String {
    match it {
        Some(i) => format!(" (iteration {i})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
