use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty reduction")]
    EmptyReduction,

    #[error("invalid binomial: C({n}, {k})")]
    InvalidBinomial { n: i64, k: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not normalized: log-mass {log_mass}")]
    NotNormalized { log_mass: f64 },

    #[error("support mismatch: {0} vs {1}")]
    SupportMismatch(usize, usize),

    #[error("KL undefined: q vanishes at outcome {0} where p is positive")]
    KlUndefined(usize),

    #[error("boundary has no natural parameter (p = {0})")]
    BoundaryParameter(f64),

    #[error("parameter length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("use numeric convolution: {0} groups exceeds the subset-sum limit")]
    TooManyGroups(usize),

    #[error("degenerate priors: zero variance")]
    DegeneratePriors,

    #[error("no high-resolution extension for explicit priors")]
    NoHighResolution,

    #[error("density unbounded at boundary: Beta({alpha}, {beta})")]
    UnboundedDensity { alpha: f64, beta: f64 },

    #[error("quadrature underflow at n = {n}, n1 = {n1}")]
    QuadratureUnderflow { n: usize, n1: usize },

    #[error("refine solver: reverse projection did not converge (kl = {kl}, iterations = {iterations})")]
    RefineSolver { kl: f64, iterations: usize },

    #[error("statistic vanishes on support at c1 = {0:?}")]
    VanishingStatistic(Vec<usize>),

    #[error("absolute continuity violated at c0 = {0}")]
    AbsoluteContinuity(usize),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("unknown diagnostic: {0}")]
    UnknownDiagnostic(String),

    #[error("multigraph unsupported: duplicate edge {0} -- {1}")]
    Multigraph(String, String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid table row {row}: {reason}")]
    InvalidTableRow { row: usize, reason: String },

    #[error("no groups")]
    NoGroups,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable identifier used in CLI error payloads.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyReduction => "empty_reduction",
            Error::InvalidBinomial { .. } => "invalid_binomial",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NotNormalized { .. } => "not_normalized",
            Error::SupportMismatch(..) => "support_mismatch",
            Error::KlUndefined(_) => "kl_undefined",
            Error::BoundaryParameter(_) => "boundary_parameter",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::TooManyGroups(_) => "too_many_groups",
            Error::DegeneratePriors => "degenerate_priors",
            Error::NoHighResolution => "no_high_resolution",
            Error::UnboundedDensity { .. } => "unbounded_density",
            Error::QuadratureUnderflow { .. } => "quadrature_underflow",
            Error::RefineSolver { .. } => "refine_solver",
            Error::VanishingStatistic(_) => "vanishing_statistic",
            Error::AbsoluteContinuity(_) => "absolute_continuity",
            Error::DegenerateDesign(_) => "degenerate_design",
            Error::UnknownDiagnostic(_) => "unknown_diagnostic",
            Error::Multigraph(..) => "multigraph",
            Error::InvalidNetwork(_) => "invalid_network",
            Error::InvalidTableRow { .. } => "invalid_table_row",
            Error::NoGroups => "no_groups",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
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
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
