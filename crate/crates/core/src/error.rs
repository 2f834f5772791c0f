use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {point:?} lies outside the cavity of radius {radius}")]
    OutsideCavity { point: [f64; 3], radius: f64 },

    #[error(
        "inertia tensor is inconsistent with the cavity: moment {moment} about axis {axis} is below the fluid's own inertia {fluid}"
    )]
    InconsistentInertia { axis: usize, moment: f64, fluid: f64 },

    #[error("quadrature exact to degree {available}, assembly needs {required}")]
    QuadratureTooCoarse { required: usize, available: usize },

    #[error("assembled operator `{name}` violates its invariant: {detail}")]
    InvariantViolated { name: &'static str, detail: String },

    #[error("coupled mass operator is singular; the basis probably lacks the l = 1 toroidal modes")]
    SingularCoupling,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("step size underflow at t = {t}: dt = {dt}")]
    StepSizeUnderflow { t: f64, dt: f64 },

    #[error("state at t = {t} is not an equilibrium (residual {residual})")]
    NotAnEquilibrium { t: f64, residual: f64 },

    #[error("variational test is undefined at zero angular velocity")]
    ZeroAngularVelocity,

    #[error("exponential fit: {0}")]
    Fit(FitError),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("eigenvalue branch lost at mu = {mu}: {detail}")]
    BranchLost { mu: f64, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitError {
    TooFewSamples { got: usize, needed: usize },
    NonPositive,
    Degenerate,
}

impl core::fmt::Display for FitError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FitError::TooFewSamples { got, needed } => {
                write!(f, "{got} samples in window, need at least {needed}")
            }
            FitError::NonPositive => f.write_str("non-positive value in window"),
            FitError::Degenerate => f.write_str("degenerate (constant) series"),
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
