use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("degeneracy lost at {point:?}: cluster width {width:.3e}, gap {gap:.3e} (required gap >= {required:.3e})")]
    DegeneracyLost {
        point: Vec<f64>,
        width: f64,
        gap: f64,
        required: f64,
    },

    #[error("gauge alignment failed: overlap with reference frame is singular (smallest singular value {0:.3e})")]
    GaugeAlignment(f64),

    #[error("endpoint mismatch: path ends at {end:?} but next path starts at {start:?}")]
    EndpointMismatch { end: Vec<f64>, start: Vec<f64> },

    #[error("base point mismatch: {0:?} vs {1:?}")]
    BasePointMismatch(Vec<f64>, Vec<f64>),

    #[error("degenerate parallelogram: edge vectors are linearly dependent")]
    DegenerateVectors,

    #[error("loop is not planar (out-of-plane extent {0:.3e})")]
    NonPlanar(f64),

    #[error("plane ({chi}, {rho}) invalid for control dimension {dim}")]
    PlaneOutOfRange { chi: usize, rho: usize, dim: usize },

    #[error("integrator did not converge: last refinement distance {distance:.3e} > tolerance {tolerance:.3e} after {steps} steps per segment")]
    Convergence {
        distance: f64,
        tolerance: f64,
        steps: usize,
        /// Finest product computed before giving up.
        last_estimate: Box<crate::linalg::CMatrix>,
    },

    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
