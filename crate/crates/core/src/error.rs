use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot bound tail: infinite system needs a tail model and a comparable or bounded family")]
    CannotBoundTail,

    #[error("power iteration did not converge after {iterations} iterations")]
    PowerIteration { iterations: usize },

    #[error("not summable at (t, q) = ({t}, {q})")]
    NotSummable { t: f64, q: f64 },

    #[error("no zero of pressure: system is irregular")]
    NoPressureZero,

    #[error("boundary shape unknown: family has neither comparability data nor a bounded flag")]
    BoundaryShapeUnknown,

    #[error("too many words: {count} exceeds the enumeration limit {limit}")]
    TooManyWords { count: u128, limit: u128 },

    #[error("degenerate family: xi_min = xi_max = {0}")]
    DegenerateFamily(f64),

    #[error("exponent range mismatch: zero-temperature limit {limit} vs cycle oracle {oracle}")]
    RangeDisagreement { limit: f64, oracle: f64 },

    #[error("xi = {xi} outside achievable range at t = {t}")]
    XiOutOfRange { t: f64, xi: f64 },

    #[error("xi = {0} unreachable (range metadata stale)")]
    XiUnreachable(f64),

    #[error("xi = {xi} must exceed xi_min = {xi_min}")]
    BelowMinimum { xi: f64, xi_min: f64 },

    #[error("root finder failed: {0}")]
    RootNotFound(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("sequence is not strictly decreasing at index {0}")]
    NonMonotoneSequence(usize),

    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
