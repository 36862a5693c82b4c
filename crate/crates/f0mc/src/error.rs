use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (formula files, stream files, scenario files).
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// An operand had a different bit width than the operation requires.
    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    /// Requested a prefix wider than the hash output.
    #[error("prefix width {requested} exceeds hash output width {available}")]
    SliceTooWide { requested: usize, available: usize },

    /// Prefix slicing is only defined for affine hash families.
    #[error("hash family {family} does not support prefix slicing")]
    UnsupportedSlice { family: &'static str },

    /// Field elements from different GF(2^n) instances were mixed.
    #[error("GF(2^n) modulus mismatch: 0x{left:x} vs 0x{right:x}")]
    ModulusMismatch { left: u128, right: u128 },

    /// No compiled-in modulus for the requested field degree.
    #[error("unsupported GF(2^n) degree {n}; supported range is 1..=64")]
    UnsupportedFieldDegree { n: usize },

    #[error("unsupported hash family parameters: {msg}")]
    UnsupportedFamily { msg: String },

    /// Exact enumeration refused: the instance is too large.
    #[error("formula has {n} variables, above the brute-force cap {cap}; use the estimators instead")]
    BruteCapExceeded { n: usize, cap: usize },

    /// The estimation sketch is saturated at the supplied resolution.
    #[error("r too small: every sketch row is saturated at r={r}")]
    RTooSmall { r: u32 },

    /// A sketch row exhausted all n prefix levels while still over threshold.
    #[error("pathological hash event: row {row} still over threshold at level {level}")]
    PathologicalHash { row: usize, level: u32 },

    #[error("oracle query budget exceeded (cap {cap})")]
    OracleBudgetExceeded { cap: u64 },

    /// The configured oracle backend cannot answer queries.
    #[error("oracle backend is a stub; configure the brute-force backend")]
    OracleUnavailable,

    #[error("invalid parameters: {msg}")]
    InvalidParams { msg: String },

    /// Items of a structured stream disagreed on their declared shape.
    #[error("inconsistent stream item: {msg}")]
    InconsistentStream { msg: String },

    #[error("statistical acceptance needs at least 30 trials, got {got}")]
    TooFewTrials { got: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }

    /// Exit-code class for the CLI: input errors (2) vs algorithmic errors (3).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::WidthMismatch { .. }
                | Error::SliceTooWide { .. }
                | Error::UnsupportedSlice { .. }
                | Error::ModulusMismatch { .. }
                | Error::UnsupportedFieldDegree { .. }
                | Error::UnsupportedFamily { .. }
                | Error::BruteCapExceeded { .. }
                | Error::InvalidParams { .. }
                | Error::InconsistentStream { .. }
                | Error::TooFewTrials { .. }
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
