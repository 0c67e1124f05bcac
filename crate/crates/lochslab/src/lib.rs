//! Exact arithmetic for positional expansions in a real base `beta > 1` and
//! regular continued fractions, plus the machinery needed to study how the two
//! digit systems keep pace with each other.
//!
//! The crate is organised in layers:
//!
//! * [`kernel`] — arbitrary-precision rationals, certified enclosures of real
//!   algebraic constants, and sign/floor/comparison routines that either give a
//!   provably correct answer or return an error.  Nothing above this layer is
//!   allowed to guess.
//! * [`beta`] — digit expansions in base `beta` (greedy map `x -> beta*x mod 1`),
//!   the expansion of 1, admissibility of digit words, and exact cylinder
//!   intervals via the follower-width recursion.
//! * [`cf`] — continued-fraction digits, convergents, cylinder intervals,
//!   Gauss-map orbits with certified log sums, and the Gauss measure.
//! * [`bridge`] — for a single point, how many leading continued-fraction
//!   digits are pinned down by the first `n` base-`beta` digits, together with
//!   the exact inequalities that control that count.
//! * [`operator`] — spectral data of the weighted transfer operator of the
//!   Gauss map, from which the variance constants of the central limit theorem
//!   for the digit-matching count are computed.
//! * [`experiment`] — seeded Monte Carlo harness and report writer behind the
//!   `lochslab` command-line tool.

pub mod beta;
pub mod bridge;
pub mod cf;
pub mod experiment;
pub mod kernel;
pub mod operator;

use num_bigint::BigInt;

/// Crate-wide error type.  Every fallible certified operation reports *why* it
/// could not produce a provably correct answer; callers never receive a guess.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-domain input (zero denominator, x outside [0,1), ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A root-refinement step could not maintain its bracketing invariant.
    #[error("refinement failure: {0}")]
    RefinementFailure(String),

    /// A floor could not be decided within the precision cap.
    #[error("floor undecidable within {bits} bits for a value near {near}")]
    AmbiguousFloor { bits: u64, near: String },

    /// A comparison could not be decided within the precision cap.
    #[error("comparison undecidable within {bits} bits")]
    AmbiguousComparison { bits: u64 },

    /// The expansion of 1 could not be classified within the requested horizon
    /// and the requested quantity depends on the classification.
    #[error("expansion of 1 not classified within horizon {horizon}")]
    UndeterminedParryStatus { horizon: usize },

    /// Word enumeration would exceed the configured node budget.
    #[error("enumeration budget {budget} exceeded (needed at least {needed})")]
    BudgetExceeded { budget: u64, needed: u64 },

    /// A digit word failed the admissibility test.
    #[error("digit word is not admissible for this base")]
    InadmissibleWord,

    /// A zero-run scan hit the end of the digit buffer before the run ended.
    #[error("zero run still open at end of digit buffer (position {position}, buffer length {len})")]
    LookaheadExhausted { position: usize, len: usize },

    /// Continued-fraction digits must be >= 1.
    #[error("continued-fraction digit at index {index} is not positive")]
    NonpositiveQuotient { index: usize },

    /// An orbit hit an exact endpoint and terminated before the requested depth.
    #[error("expansion terminated after {depth} steps (requested {requested})")]
    ExpansionTerminated { depth: usize, requested: usize },

    /// A query needs more continued-fraction depth than the point provides.
    #[error("continued-fraction depth {available} is too shallow (needed {needed})")]
    InsufficientDepth { available: usize, needed: usize },

    /// A normalized statistic was requested without a variance constant.
    #[error("no sigma constant available for this statistic")]
    MissingSigma,

    /// Adaptive precision hit the hard cap.
    #[error("precision cap {cap_bits} bits exhausted")]
    PrecisionExhausted { cap_bits: u64 },

    /// The second-derivative combination that should be a variance came out negative.
    #[error("variance estimate is negative: {0}")]
    NegativeVariance(f64),

    /// Power iteration failed to converge.
    #[error("eigenvalue iteration did not converge within {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The truncation-tail bound of the operator discretization exceeds the tolerance.
    #[error("series tail bound {bound:e} exceeds tolerance {tolerance:e}")]
    TailBoundTooLarge { bound: f64, tolerance: f64 },

    /// Too many Monte Carlo samples were discarded by guard checks.
    #[error("discarded {discarded} of {total} samples (policy allows at most {allowed})")]
    DiscardBudgetExceeded { discarded: usize, total: usize, allowed: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Shorthand for an input-rejection error.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Convenience alias used throughout: arbitrary-precision signed integer.
pub type Int = BigInt;
