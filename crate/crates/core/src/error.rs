use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which hypothesis of the lemniscate construction failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MelnikovCondition {
    /// a pole of `R` lies in the closed interior domain
    PoleInside,
    /// a zero of `R` lies in the closed exterior domain
    ZeroOutside,
    /// `R(inf)` is finite
    FiniteAtInfinity,
}

impl std::fmt::Display for MelnikovCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MelnikovCondition::PoleInside => write!(f, "(i) R has a pole in the interior"),
            MelnikovCondition::ZeroOutside => write!(f, "(ii) R has a zero in the exterior"),
            MelnikovCondition::FiniteAtInfinity => write!(f, "(iii) R(inf) is finite"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("traced curve is not a Jordan curve: {0}")]
    JordanViolation(String),

    #[error("cusp detected: minimum speed {min_speed:e}")]
    CuspDetected { min_speed: f64 },

    #[error("level set is not a Jordan curve: {0}")]
    NotJordan(String),

    #[error("level-set tracing failed: {0}")]
    TraceFailure(String),

    #[error("ambiguous point location at {point}: winding number {winding}")]
    AmbiguousLocation { point: Complex64, winding: f64 },

    #[error("discriminant vanishes identically (Q is not squarefree in w)")]
    DegenerateDiscriminant,

    #[error("path passes within {distance:e} of branch/exceptional point {point} (exclusion radius {radius:e})")]
    PathTooCloseToBranch {
        point: Complex64,
        distance: f64,
        radius: f64,
    },

    #[error("root matching stayed ambiguous at {at} with step {step:e}")]
    MonodromyAmbiguity { at: Complex64, step: f64 },

    #[error("degenerate preimage solve at t = {0}")]
    DegenerateSolve(Complex64),

    #[error("elimination resultant vanishes identically")]
    EliminationDegenerate,

    #[error("evaluation point at distance {distance:e} from the curve (threshold {threshold:e})")]
    TooCloseToBoundary { distance: f64, threshold: f64 },

    #[error("discrete system numerically singular (condition estimate {condition:e})")]
    SolveSingular { condition: f64 },

    #[error("eigenvalue solver failed: {0}")]
    EigSolverFailure(String),

    #[error("matching hypothesis violated: {condition} at {point}")]
    ConditionViolated {
        condition: MelnikovCondition,
        point: Complex64,
    },

    #[error("power {k} failed verification (residual {residual:e})")]
    VerificationFailed { k: u32, residual: f64 },

    #[error("Newtonian kernel is singular at the origin")]
    SingularPoint,

    #[error("kernel evaluated at coincident points")]
    CoincidentPoints,

    #[error("density has {got} values but the curve has {expected} nodes")]
    DensityMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
