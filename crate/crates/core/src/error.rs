use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which [`crate::branch::BranchParams`] invariant was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamViolation {
    /// `p > q > 1` does not hold.
    Ordering,
    /// `gcd(p, q) != 1`.
    Coprimality,
    /// The Euclidean division of `p` by `q` left `beta = 0` or `alpha = 0`.
    Division,
    /// `alpha + beta > q`.
    AlphaBetaBound,
    /// `xi <= 1`.
    XiRange,
    /// `xi` is an integer power of `q`.
    XiPowerOfBase,
    /// The start value is below 1.
    StartBelowOne,
}

impl std::fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ParamViolation::Ordering => "ordering (p > q > 1)",
            ParamViolation::Coprimality => "coprimality (gcd(p, q) = 1)",
            ParamViolation::Division => "euclidean division (alpha >= 1, 1 <= beta <= q - 1)",
            ParamViolation::AlphaBetaBound => "alpha + beta <= q",
            ParamViolation::XiRange => "xi range (xi > 1)",
            ParamViolation::XiPowerOfBase => "xi power-of-q",
            ParamViolation::StartBelowOne => "start value >= 1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid base {0}: base must be at least 2")]
    InvalidBase(u32),
    #[error("negative operand {0} where a nonnegative value is required")]
    Negative(String),
    #[error("inverted window: j_lo = {lo} > j_hi = {hi}")]
    InvertedWindow { lo: i64, hi: i64 },
    #[error("valuation of zero is undefined")]
    ZeroValuation,
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational {0:?}: expected an integer or \"a/b\"")]
    ParseRational(String),
    #[error("parameter block rejected: {violation} (p = {p}, q = {q})")]
    Params { violation: ParamViolation, p: u32, q: u32 },
    #[error("start value {0} does not satisfy the branch condition")]
    BranchCondition(String),
    #[error("step {step}: perturbation {r} is outside the admissible interval [{lo}, {hi})")]
    Inadmissible { step: usize, r: String, lo: String, hi: String },
    #[error("step {step}: corrupted state {value} (state must be >= 1)")]
    CorruptedState { step: usize, value: String },
    #[error("explicit perturbation list exhausted at step {0}")]
    PerturbationsExhausted(usize),
    #[error("grid perturbation resolution must be positive")]
    ZeroResolution,
    #[error("theta valuation exceeded its cap of {cap} for {value}")]
    ThetaCap { value: String, cap: u32 },
    #[error("carry identity {identity} failed at position {position} for {value}")]
    CarryIdentity { identity: &'static str, position: i64, value: String },
    #[error("trajectory too short: need at least {needed} states, have {have}")]
    TrajectoryTooShort { needed: usize, have: usize },
    #[error("index {index} is outside the trajectory (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("seed must be an odd positive integer, got {0}")]
    NotOddPositive(String),
    #[error("collatz map is undefined at 0")]
    ZeroSeed,
    #[error("inverted range: {from} > {to}")]
    InvertedRange { from: String, to: String },
    #[error("perturbations must be positive: r[{index}] = {value}")]
    NonPositivePerturbation { index: usize, value: String },
    #[error("grid width {width} cannot hold the integer part of every row; required width is {required}")]
    GridTooNarrow { width: usize, required: usize },
    #[error("grid needs at least {0}")]
    GridShape(&'static str),
    #[error("grid geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("value {0} has no finite binary expansion")]
    NotDyadic(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("internal defect: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
