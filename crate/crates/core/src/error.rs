use thiserror::Error;

/// Errors raised by the geometric and numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("masses must be strictly positive (got {0})")]
    NonPositiveMass(f64),

    #[error("mass-weighted centroid is {offset:.3e} away from the origin")]
    CentroidNotAtOrigin { offset: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),

    #[error("loop is not closed (gap {gap:.3e})")]
    LoopNotClosed { gap: f64 },

    #[error("loop needs at least {min} segments, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("evaluation at the excluded pole of the {patch} patch (colatitude {colatitude})")]
    ExcludedPole { patch: &'static str, colatitude: f64 },

    #[error("Bloch field is not unit length (|n| = {norm})")]
    NonUnitField { norm: f64 },

    #[error("invariant violated: {name} (deviation {deviation:.3e})")]
    InvariantViolation { name: &'static str, deviation: f64 },

    #[error("|Tr W / 2| = {half_trace} exceeds 1")]
    TraceOutOfRange { half_trace: f64 },

    #[error("Dyson iteration does not contract: |I2| = {i2:.3e}")]
    NonContracting { i2: f64 },

    #[error("abelian angle sits at a node of the cosine; trace corrections undefined")]
    DegenerateAbelianAngle,

    #[error("Hadamard steering infeasible: |psi| = {needed:.3e} exceeds the contraction bound")]
    SteeringInfeasible { needed: f64 },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("Chern-Simons level must be a positive integer")]
    ZeroLevel,

    #[error("controlled phase is {phi} rad, not pi")]
    NotControlledZ { phi: f64 },

    #[error("curves nearly intersect (distance {distance:.3e})")]
    NearIntersection { distance: f64 },

    #[error("Gauss integral {value} is {deviation:.3e} from an integer; refine the sampling")]
    NonConvergentQuadrature { value: f64, deviation: f64 },

    #[error("triangle inequality violated at t = {time}")]
    TriangleInequality { time: f64 },

    #[error("drive is not a circular precession")]
    NonCircularDrive,

    #[error("mode ordering violated: gap {gap} <= 0")]
    ModeOrdering { gap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what))
    }
}
