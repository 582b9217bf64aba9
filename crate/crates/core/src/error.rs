use thiserror::Error;

/// Errors surfaced by the engine and its numeric companions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unstable key: g={g}, n={n} (need g >= 1 and 2g-2+n > 0)")]
    UnstableKey { g: u32, n: usize },

    #[error("empty bracket requires g >= 2, got g={0}")]
    EmptyBracketGenus(u32),

    #[error("memo integrity failure for {key}: stored {stored}, recomputed {new}")]
    MemoIntegrity {
        key: String,
        stored: String,
        new: String,
    },

    #[error("cache version mismatch at line {line}: {found:?}")]
    CacheVersion { line: usize, found: String },

    #[error("malformed cache entry at line {line}: {reason}")]
    CacheMalformed { line: usize, reason: String },

    #[error("cache checksum failure at line {line}: header count {expected} != {actual} entries")]
    CacheChecksum {
        line: usize,
        expected: usize,
        actual: usize,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("precision must be at least 64 bits, got {0}")]
    PrecisionTooLow(u32),

    #[error("negative boundary length not allowed")]
    NegativeLength,

    #[error("expected {expected} boundary lengths, got {actual}")]
    LengthCount { expected: usize, actual: usize },

    #[error("series reciprocal requires constant term 1")]
    SeriesNotNormalized,

    #[error("fit underdetermined: {points} points for order {order}")]
    FitUnderdetermined { points: usize, order: usize },

    #[error("singular normal equations in fit")]
    FitSingular,

    #[error("g_max={g_max} too small for Richardson order {order} with n={n}")]
    RichardsonRange { g_max: u32, order: usize, n: u32 },

    #[error("key budget exceeded: traversal reached {reached} keys, budget {budget}")]
    BudgetExceeded { reached: usize, budget: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
