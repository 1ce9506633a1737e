use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation cutoff must be at least 1, got {0}")]
    InvalidTruncation(usize),

    #[error("invalid bathymetry profile: {0}")]
    InvalidProfile(String),

    #[error(
        "grid of {grid} points aliases modes up to |j| = {max_mode}; need at least {required}"
    )]
    Aliasing {
        grid: usize,
        max_mode: usize,
        required: usize,
    },

    #[error("Taylor order {0} is not supported (available orders: 1..=4)")]
    UnsupportedOrder(usize),

    #[error("matrix is not Hermitian: max |A - A*| = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("truncation N = {got} is too small for {bands} bands; need N >= {required}")]
    InsufficientTruncation {
        got: usize,
        bands: usize,
        required: usize,
    },

    #[error("invalid theta grid: {0}")]
    InvalidThetaGrid(String),

    #[error("oracle resolution too coarse: {0}")]
    OracleResolution(String),

    #[error("oracle solve failed: relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    OracleSolve { residual: f64, tolerance: f64 },

    #[error(
        "small divisor for mode l = {mode}: |g_a - g_l| = {divisor:.3e} below floor {floor:.3e}"
    )]
    SmallDivisor { mode: i64, divisor: f64, floor: f64 },

    #[error("theta = {theta} is outside the validity region of gap {gap}")]
    OutsideValidityRegion { theta: f64, gap: usize },

    #[error("requested order {requested} exceeds available order {available}")]
    OrderMismatch { requested: usize, available: usize },

    #[error(
        "negative eigenvalue {eigenvalue:.3e} below tolerance: truncated operator is unstable"
    )]
    Instability { eigenvalue: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("gap is closed: widths are at the noise floor, no scaling fit")]
    ClosedGap,

    #[error("not enough data for a scaling fit: {0}")]
    InsufficientData(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
