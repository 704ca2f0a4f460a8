use thiserror::Error;

/// Errors raised by the geometry, flow and section routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("rotation angle {angle} is at the cut locus (q = pi); the group logarithm is not unique")]
    AngleAtCutLocus { angle: f64 },

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("matrix is not a rotation (orthonormality defect {defect:e})")]
    NotARotation { defect: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("algebra vector leaves the sub-Riemannian distribution (defect {defect:e})")]
    NotHorizontal { defect: f64 },

    #[error("inner product is not Ad(H)-invariant (violation {violation:e})")]
    NotLegal { violation: f64 },

    #[error("Hamiltonian drift {drift:e} exceeds the integration budget; increase the step count")]
    StepCountTooSmall { drift: f64 },

    #[error("no shooting start converged (best endpoint error {best_error:e})")]
    NoConvergence { best_error: f64 },

    #[error("target log-norm {rho} exceeds the solver reach {max_rho}")]
    OutOfReach { rho: f64, max_rho: f64 },

    #[error("fiber is degenerate: orientation is antipodal to e_z")]
    DegenerateFiber,

    #[error("every fiber element sits at the rotational cut locus")]
    AllAtCutLocus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
