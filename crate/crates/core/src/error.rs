use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain [{lo}, {hi}] is empty or not finite")]
    EmptyDomain { lo: f64, hi: f64 },
    #[error("breakpoints must be strictly increasing (index {index})")]
    UnsortedBreakpoints { index: usize },
    #[error("breakpoint {value} is not strictly inside the domain")]
    BreakpointOutsideDomain { value: f64 },
    #[error("expected {expected} pieces, got {got}")]
    PieceCountMismatch { expected: usize, got: usize },
    #[error("piece parameters must be finite")]
    NonFinitePiece,
    #[error("functions are defined on different domains")]
    DomainMismatch,
    #[error("point {rho} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { rho: f64, lo: f64, hi: f64 },
    #[error("interval [{a}, {b}] is not contained in the domain")]
    IntervalOutOfDomain { a: f64, b: f64 },
    #[error("exponential mass is not finite; rescale lambda")]
    NonFiniteMass,
    #[error("curve value {value} outside [0, {bound}]")]
    RangeViolation { value: f64, bound: f64 },
    #[error("geometry requires R > w > 0 (got R = {r}, w = {w})")]
    BadGeometry { r: f64, w: f64 },
    #[error("privacy parameters out of range: {0}")]
    BadPrivacyParams(String),
    #[error("net would contain {count} points, above the cap of {cap}")]
    NetTooLarge { count: u128, cap: usize },
    #[error("payoff {value} outside [0, {bound}]")]
    PayoffOutOfRange { value: f64, bound: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("curve multisets are not neighbors")]
    NotNeighbors,
    #[error("empty net")]
    EmptyNet,
    #[error("instance too large for enumeration ({n} > {max})")]
    TooLarge { n: usize, max: usize },
    #[error("kappa must be >= 1 (got {0})")]
    BadKappa(f64),
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("outward-rotation Gaussian has a zero coordinate at index {0}")]
    DegenerateZ(usize),
    #[error("s must be positive (got {0})")]
    NonPositiveS(f64),
    #[error("expected {expected} prices, got {got}")]
    PriceCountMismatch { expected: usize, got: usize },
    #[error("operation requires additive valuations")]
    NonAdditive,
    #[error("unsupported mechanism/model combination: {0}")]
    UnsupportedCombination(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("adversary needs T >= 16 (got {0})")]
    TooShort(usize),
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
