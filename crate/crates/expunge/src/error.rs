use thiserror::Error;

/// Unified error type for table construction, certificate verification,
/// search, and the named constructions.
#[derive(Debug, Error)]
pub enum Error {
    // ── sequence validation ──────────────────────────────────────────────
    #[error("sequence value {value} occurs {count} times; at least {required} required")]
    OccurrenceDeficit {
        value: i64,
        count: usize,
        required: i64,
    },
    #[error(
        "prefix condition violated at position {position}: \
         {smaller} occurs fewer times than {value} among the first {position} entries"
    )]
    PrefixViolation {
        position: usize,
        smaller: i64,
        value: i64,
    },
    #[error("sequence entry {value} at position {position} outside [0, {r}]")]
    EntryOutOfRange { position: usize, value: i64, r: i64 },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    // ── erasure-pattern shortcuts ────────────────────────────────────────
    #[error("difference signs are not weakly decreasing (first violation at entry {index})")]
    PreconditionViolated { index: usize },

    // ── shifts ───────────────────────────────────────────────────────────
    #[error("shift {shift} outside [0, {max}]")]
    ShiftOutOfRange { shift: i64, max: i64 },

    // ── rule steps ───────────────────────────────────────────────────────
    #[error("step {step}: row {row} is not among the remaining rows")]
    RowAlreadyDropped { step: usize, row: String },
    #[error("step {step}: {reason}")]
    RuleArityMismatch { step: usize, reason: String },
    #[error("rule VII requires m = 2, got m = {m}")]
    MNotTwo { m: i64 },
    #[error("step {step} (rule {rule} at column {column}): {reason}")]
    RuleViolation {
        step: usize,
        rule: &'static str,
        column: usize,
        reason: String,
    },

    // ── search ───────────────────────────────────────────────────────────
    #[error("search budget exhausted after visiting {visited} states")]
    BudgetExhausted { visited: u64 },
    #[error("no certificate found: {0}")]
    NotFound(String),

    // ── constructions ────────────────────────────────────────────────────
    #[error("reduction mismatch: {0}")]
    ReductionMismatch(String),
    #[error("expected an injective-range result with all {expected} rows kept, got N = {n}")]
    NotInjective { n: usize, expected: i64 },
    #[error("sequence not extendable: 0 occurs {zeros} times but {r} occurs only {rs} times")]
    NotExtendable { zeros: usize, rs: usize, r: i64 },
    #[error("case out of scope: {0}")]
    OutOfScope(String),
    #[error("column {column} lacks the required digit structure: {reason}")]
    DistinctnessFailure { column: usize, reason: String },
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("coverage gap at column {column}: value {value} never occurs")]
    CoverageGap { column: usize, value: i64 },
    #[error("no stored catalog entry for r = {r}; supported ranks are 3, 4, 5")]
    UnsupportedRank { r: i64 },

    // ── divisor combinatorics ────────────────────────────────────────────
    #[error("invalid section data: {0}")]
    InvalidSectionData(String),

    // ── files and serialization ──────────────────────────────────────────
    #[error("certificate format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
