//! Seeded Monte Carlo experiments over the expansion machinery.
//!
//! An experiment draws points from a counter-mode sample stream (see
//! [`sampling`]), runs a per-point measurement in parallel, and folds the
//! results into a deterministic report: aggregates are computed in sample
//! order no matter how many worker threads ran, so a `(kind, base, n,
//! samples, seed, bits)` tuple always produces byte-identical output.
//!
//! Per-point failures are not silently dropped: each guard condition is
//! counted by reason, the affected sample is excluded from aggregates, and
//! the whole run aborts if more than 1% of samples get discarded.

pub mod fast;
pub mod sampling;
pub mod stats;

mod emit;
mod kinds;

use crate::beta::BetaSystem;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;

/// Which measurement an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Counter ratio `k_n / n` at a fixed depth.
    Lochs,
    /// Normalized counter fluctuations at a fixed depth.
    Clt,
    /// Running extremes of the iterated-logarithm normalization along a
    /// depth grid.
    Lil,
    /// Denominator growth `ln q_n / n` of the quotient expansion.
    Levy,
    /// Normalized fluctuations of `ln q_n`.
    QnClt,
    /// Zero-run lengths after positions on a depth grid.
    LnDecay,
    /// Exact per-sample verification of the structural inequalities.
    Invariants,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Lochs => "lochs",
            ExperimentKind::Clt => "clt",
            ExperimentKind::Lil => "lil",
            ExperimentKind::Levy => "levy",
            ExperimentKind::QnClt => "qn-clt",
            ExperimentKind::LnDecay => "ln-decay",
            ExperimentKind::Invariants => "invariants",
        }
    }

    /// Depth used when the caller does not pick one.
    pub fn default_n(self) -> usize {
        match self {
            ExperimentKind::Lochs => 2000,
            ExperimentKind::Clt => 5000,
            ExperimentKind::Lil => 100_000,
            ExperimentKind::Levy => 10_000,
            ExperimentKind::QnClt => 10_000,
            ExperimentKind::LnDecay => 4096,
            ExperimentKind::Invariants => 500,
        }
    }

    /// Sample count used when the caller does not pick one.
    pub fn default_samples(self) -> usize {
        match self {
            ExperimentKind::Lochs => 200,
            ExperimentKind::Clt => 2000,
            ExperimentKind::Lil => 200,
            ExperimentKind::Levy => 500,
            ExperimentKind::QnClt => 2000,
            ExperimentKind::LnDecay => 400,
            ExperimentKind::Invariants => 250,
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ExperimentKind> {
        match s {
            "lochs" => Ok(ExperimentKind::Lochs),
            "clt" => Ok(ExperimentKind::Clt),
            "lil" => Ok(ExperimentKind::Lil),
            "levy" => Ok(ExperimentKind::Levy),
            "qn-clt" => Ok(ExperimentKind::QnClt),
            "ln-decay" => Ok(ExperimentKind::LnDecay),
            "invariants" => Ok(ExperimentKind::Invariants),
            other => Err(Error::invalid(format!(
                "unknown experiment kind {other:?} (expected lochs, clt, lil, \
                 levy, qn-clt, ln-decay, or invariants)"
            ))),
        }
    }
}

/// Full description of one experiment run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub beta_spec: String,
    pub kind: ExperimentKind,
    pub samples: usize,
    pub n: usize,
    pub seed: u64,
    /// Dyadic sample precision; `None` picks `max(4096, 16 n)` bits.
    pub precision_bits: Option<u64>,
    /// Worker threads; 0 uses the library default.
    pub parallelism: usize,
}

impl ExperimentConfig {
    /// Dyadic sample precision actually used: the explicit setting, or
    /// `max(4096, 16 n)`, deep enough that the quotient expansion (about
    /// 3.5 bits per depth step) far outlasts every scan the run performs.
    /// Deep runs that know their base can pass a tighter explicit value.
    pub fn effective_bits(&self) -> u64 {
        self.precision_bits.unwrap_or((16 * self.n as u64).max(4096))
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        match self.kind {
            ExperimentKind::Lil => {
                if self.n < 3 {
                    return Err(Error::invalid("the iterated-logarithm band needs n >= 3"));
                }
            }
            ExperimentKind::LnDecay => {
                if self.n < 16 {
                    return Err(Error::invalid("the run-length grid requires n >= 16"));
                }
            }
            _ => {}
        }
        let floor = 64 * (self.n as u64).div_ceil(256);
        if let Some(bits) = self.precision_bits {
            if bits < 64 {
                return Err(Error::invalid("sample precision must be at least 64 bits"));
            }
            if bits < floor {
                return Err(Error::invalid(format!(
                    "sample precision {bits} is below the depth guard {floor} for n = {}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// The normalization constants a run used, and where they came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsUsed {
    /// Almost-sure limit of `k_n / n`.
    pub a: f64,
    /// Almost-sure limit of `ln q_m / m`.
    pub b: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
    pub source: String,
}

/// Order-independent summary of a run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub kept: usize,
    pub discarded: usize,
    /// Discard reasons, by count.
    pub guards: BTreeMap<String, usize>,
    /// Named summary statistics.
    pub stats: BTreeMap<String, f64>,
}

/// One kept sample: its stream index plus named measurement values.
#[derive(Clone, Debug)]
pub struct SampleRecord {
    pub index: u64,
    pub values: BTreeMap<String, f64>,
}

/// Everything a run produced.  Serialized form carries the configuration
/// echo, constants, and aggregates; per-sample records are only emitted via
/// the CSV writer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub kind: String,
    pub beta: String,
    pub samples: usize,
    pub n: usize,
    pub seed: u64,
    pub precision_bits: u64,
    pub parallelism: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub constants: Option<ConstantsUsed>,
    pub aggregates: Aggregates,
    /// CSV column names for `records`, in emission order.
    #[serde(skip, default)]
    pub columns: Vec<String>,
    #[serde(skip, default)]
    pub records: Vec<SampleRecord>,
}

impl ExperimentReport {
    /// Render the per-sample table as CSV (comment line, header, one row per
    /// kept sample).
    pub fn to_csv(&self) -> String {
        emit::to_csv(self)
    }

    /// Render the summary as pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("report serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

/// Run one experiment to completion.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let system = BetaSystem::from_spec(&config.beta_spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| kinds::run(config, &system))
}
