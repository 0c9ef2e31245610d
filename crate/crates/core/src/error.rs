use thiserror::Error;

/// Failures raised by the numerical core.
///
/// Every variant describes a condition of the input or of the trajectory,
/// never a programming error; callers such as the parameter scan record them
/// per sample instead of aborting the whole run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("constraint multiplier system is singular (pivot ratio {pivot_ratio:.3e})")]
    SingularConstraintSystem { pivot_ratio: f64 },

    #[error("coordinate singularity: |sin(theta)| = {sin_theta:.3e} below guard")]
    CoordinateSingularity { sin_theta: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("manifold projection did not converge after {iterations} iterations (residual {residual:.3e})")]
    ProjectionDiverged { iterations: usize, residual: f64 },

    #[error("segment {segment} has degenerate length {norm:.3e}")]
    DegenerateSegment { segment: usize, norm: f64 },

    #[error("reduction requires a rotation-invariant system (gravity = {gravity})")]
    ReductionInvalid { gravity: f64 },

    #[error("correlation window is empty: diameter/4 = {upper:.3e} <= 3*slab = {lower:.3e}")]
    DegenerateWindow { lower: f64, upper: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
