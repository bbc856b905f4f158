use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial must have degree 5 or 6 (f6 = f5 = 0)")]
    Degree,
    #[error("polynomial has a repeated root (separation {separation:e} below {threshold:e})")]
    RepeatedRoot { separation: f64, threshold: f64 },
    #[error("root finder did not converge: {0}")]
    Convergence(String),
    #[error("point ({x}, {y}) is not on the curve (residual {residual:e})")]
    NotOnCurve {
        x: String,
        y: String,
        residual: f64,
    },
    #[error("special divisor (q = J(p)): {0}")]
    SpecialDivisor(String),
    #[error("operation needs affine points, got a point at infinity")]
    InfinitePoint,
    #[error("divisor lies on the diagonal (x1 = x2)")]
    Diagonal,
    #[error("degenerate branch-point geometry: {0}")]
    DegenerateGeometry(String),
    #[error("quadrature did not converge (last change {change:e}, {evaluations} evaluations)")]
    Quadrature { change: f64, evaluations: usize },
    #[error("sheet tracking failed: {0}")]
    SheetTracking(String),
    #[error("period matrix is not a Riemann matrix: {0}")]
    RiemannMatrix(String),
    #[error("Riemann constant selection: {candidates} candidates passed the vanishing certificate")]
    DeltaAmbiguity { candidates: usize },
    #[error("Newton refinement diverged: {0}")]
    NewtonDivergence(String),
    #[error("lattice generators are ill-conditioned (condition number {0:e})")]
    IllConditionedLattice(f64),
    #[error("theta truncation radius {radius} exceeds the cap {cap}")]
    TruncationRadius { radius: f64, cap: f64 },
    #[error("normalization jet check failed: {0}")]
    Normalization(String),
    #[error("point is on the theta divisor (relative |S| = {0:e})")]
    OnThetaDivisor(f64),
    #[error("two roots of the wp cubic pass the quartic certificate ({0:e}, {1:e})")]
    RootSelectionAmbiguity(f64, f64),
    #[error("sigma family requires Weierstrass form (f6 = 0, f5 = 4)")]
    NotWeierstrassForm,
    #[error("point is on the sigma divisor (relative |sigma| = {0:e})")]
    OnSigmaDivisor(f64),
    #[error("no y-sign assignment passes the Abel round trip (best residual {0:e})")]
    SignResolution(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used in JSON error objects and FFI status lookups.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Degree => "DegreeError",
            Error::RepeatedRoot { .. } => "RepeatedRootError",
            Error::Convergence(_) => "ConvergenceError",
            Error::NotOnCurve { .. } => "NotOnCurveError",
            Error::SpecialDivisor(_) => "SpecialDivisorError",
            Error::InfinitePoint => "InfinitePointError",
            Error::Diagonal => "DiagonalError",
            Error::DegenerateGeometry(_) => "DegenerateGeometryError",
            Error::Quadrature { .. } => "QuadratureError",
            Error::SheetTracking(_) => "SheetTrackingError",
            Error::RiemannMatrix(_) => "RiemannMatrixError",
            Error::DeltaAmbiguity { .. } => "DeltaAmbiguityError",
            Error::NewtonDivergence(_) => "NewtonDivergence",
            Error::IllConditionedLattice(_) => "IllConditionedLatticeError",
            Error::TruncationRadius { .. } => "TruncationRadiusError",
            Error::Normalization(_) => "NormalizationError",
            Error::OnThetaDivisor(_) => "OnThetaDivisorError",
            Error::RootSelectionAmbiguity(..) => "RootSelectionAmbiguity",
            Error::NotWeierstrassForm => "NotWeierstrassFormError",
            Error::OnSigmaDivisor(_) => "OnSigmaDivisorError",
            Error::SignResolution(_) => "SignResolutionError",
            Error::InvalidInput(_) => "InvalidInputError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}
