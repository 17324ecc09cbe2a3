//! Crate-wide error type for numerical and solver failures.
//!
//! Configuration-file errors have their own type in [`crate::runner_io`];
//! everything that can go wrong while computing lands here.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that must be skew-symmetric is not, within tolerance.
    #[error("matrix is not skew-symmetric (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    NotSkew { residual: f64, tolerance: f64 },

    /// The local return-mapping Newton solve failed.
    #[error("local update did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Propagates a local failure together with the element it occurred on.
    #[error("element {element}: {source}")]
    ElementFailure {
        element: usize,
        #[source]
        source: Box<Error>,
    },

    /// A per-element plastic strain field violates symmetry or trace-freeness.
    #[error("plastic field invalid on element {element}: {detail}")]
    InvalidPlasticField { element: usize, detail: String },

    /// Conjugate gradients stalled.
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverNoConvergence { iterations: usize, residual: f64 },

    /// The staggered equilibrium/constitutive loop stalled.
    #[error(
        "staggered loop did not converge after {iterations} iterations \
         (relative changes: eps_p {eps_p_change:.3e}, u {u_change:.3e})"
    )]
    StaggerNoConvergence {
        iterations: usize,
        eps_p_change: f64,
        u_change: f64,
    },

    /// Initial data violate the admissibility conditions.
    #[error("inadmissible initial data: {detail} (max violation {violation:.3e})")]
    InadmissibleInitialData { detail: String, violation: f64 },

    /// A ball is too small for the mesh to resolve.
    #[error("ball of radius {radius:.3e} unresolved: needs at least {required:.3e} (2 element diameters)")]
    BallUnresolved { radius: f64, required: f64 },

    /// A field required to vanish on the boundary does not.
    #[error("field does not vanish on the boundary (max |v| = {max_abs:.3e})")]
    BoundaryNotZero { max_abs: f64 },

    /// Mismatched sizes between a field and the mesh.
    #[error("field length {got} does not match expected {expected}")]
    FieldSizeMismatch { got: usize, expected: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A stored trajectory or summary could not be read back.
    #[error("malformed stored data: {0}")]
    MalformedData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
