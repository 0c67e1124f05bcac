use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use lochslab::beta::{BetaSystem, Digit};
use lochslab::bridge;
use lochslab::cf;
use lochslab::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use lochslab::kernel::{parse_rational_literal, ExactRational, Interval, Value};
use lochslab::Int;
use lochslab::operator::{sigma_constants_from, spectral_data, SpectralParams};
use lochslab::{Error, Result};
use serde_json::json;
use std::io::{BufRead, Write};
use std::process::ExitCode;
use std::str::FromStr;

/// Exact β-expansions, continued fractions, and the digit/quotient
/// cross-counter, with seeded Monte Carlo experiments on top.
#[derive(Parser)]
#[command(name = "lochslab", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// First n digits of the base-β expansion of x
    BetaDigits {
        /// Base spec: rat:<p>/<q>, dec:<literal>, or alg:<c0,...,ck>@[<lo>,<hi>]
        #[arg(long)]
        beta: String,
        /// Point in [0, 1), as p/q, a decimal literal, or an integer
        #[arg(long)]
        x: String,
        /// Number of digits
        #[arg(long)]
        n: usize,
    },
    /// Digit expansion of 1 in base β and whether it terminates
    ExpansionOfOne {
        #[arg(long)]
        beta: String,
        /// Digit horizon to scan
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Number of admissible digit words of length n
    AdmissibleCount {
        #[arg(long)]
        beta: String,
        #[arg(long)]
        n: usize,
    },
    /// Cylinder interval of a digit word, with its follower weight
    Cylinder {
        #[arg(long)]
        beta: String,
        /// Comma-separated digits, e.g. 1,0,1 (empty for the unit interval)
        #[arg(long, default_value = "")]
        word: String,
    },
    /// First partial quotients of x
    CfDigits {
        #[arg(long)]
        x: String,
        /// Maximum number of quotients
        #[arg(long, default_value_t = 32)]
        n: usize,
    },
    /// Convergents p_m/q_m of x
    Convergents {
        #[arg(long)]
        x: String,
        /// Maximum depth
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
    /// Cylinder interval of a partial-quotient word
    CfCylinder {
        /// Comma-separated positive quotients, e.g. 2,1,3 (empty for [0,1))
        #[arg(long, default_value = "")]
        word: String,
    },
    /// Cross-expansion counter k_n(x) with certified width bounds
    Kn {
        #[arg(long)]
        beta: String,
        /// Point in (0, 1); omitted, points are read one per line from stdin
        #[arg(long)]
        x: Option<String>,
        /// Digit depth n
        #[arg(long)]
        n: usize,
        /// Also emit the full series k_1..k_n
        #[arg(long, default_value_t = false)]
        series: bool,
    },
    /// Spectral constants: eigenvalue data at s = 2 and the σ₁/σ pair
    Sigma {
        #[arg(long)]
        beta: String,
        /// Collocation degree
        #[arg(long = "N", default_value_t = 32)]
        nodes: usize,
        /// Finite-difference step for the eigenvalue derivatives
        #[arg(long = "h", default_value_t = 0.01)]
        h: f64,
    },
    /// Seeded Monte Carlo experiment over sampled points
    Experiment {
        #[arg(long)]
        beta: String,
        /// One of: lochs, clt, lil, levy, qn-clt, ln-decay, invariants
        #[arg(long)]
        kind: String,
        /// Depth (default depends on the kind)
        #[arg(long)]
        n: Option<usize>,
        /// Sample count (default depends on the kind)
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 20260822)]
        seed: u64,
        /// Dyadic sample precision in bits (default max(4096, 16n))
        #[arg(long)]
        bits: Option<u64>,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
        format: String,
        /// Worker threads (0 = all available)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify(&err))
        }
    }
}

/// 1 for rejected input, 2 for computation guards and aborted runs.
fn classify(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::InadmissibleWord
        | Error::NonpositiveQuotient { .. }
        | Error::MissingSigma => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::BetaDigits { beta, x, n } => beta_digits(&beta, &x, n),
        Cmd::ExpansionOfOne { beta, n } => expansion_of_one(&beta, n),
        Cmd::AdmissibleCount { beta, n } => admissible_count(&beta, n),
        Cmd::Cylinder { beta, word } => cylinder(&beta, &word),
        Cmd::CfDigits { x, n } => cf_digits(&x, n),
        Cmd::Convergents { x, n } => convergents(&x, n),
        Cmd::CfCylinder { word } => cf_cylinder(&word),
        Cmd::Kn { beta, x, n, series } => kn(&beta, x.as_deref(), n, series),
        Cmd::Sigma { beta, nodes, h } => sigma(&beta, nodes, h),
        Cmd::Experiment { beta, kind, n, samples, seed, bits, out, format, jobs } => {
            experiment(&beta, &kind, n, samples, seed, bits, out.as_deref(), &format, jobs)
        }
    }
}

fn parse_digit_word(word: &str) -> Result<Vec<Digit>> {
    let word = word.trim();
    if word.is_empty() {
        return Ok(Vec::new());
    }
    word.split(',')
        .map(|part| {
            part.trim()
                .parse::<Digit>()
                .map_err(|_| Error::invalid(format!("bad digit {part:?} in word")))
        })
        .collect()
}

fn parse_quotient_word(word: &str) -> Result<Vec<Int>> {
    let word = word.trim();
    if word.is_empty() {
        return Ok(Vec::new());
    }
    word.split(',')
        .map(|part| {
            Int::from_str(part.trim())
                .map_err(|_| Error::invalid(format!("bad quotient {part:?} in word")))
        })
        .collect()
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Exact `p/q` text when the endpoint is rational, else a float
/// approximation (flagged by the caller).
fn value_repr(v: &Value) -> (String, bool) {
    match v.as_rational() {
        Some(r) => (r.to_string(), true),
        None => (format!("{}", v.to_f64()), false),
    }
}

fn interval_json(iv: &Interval) -> serde_json::Value {
    let (lo, lo_exact) = value_repr(&iv.lo);
    let (hi, hi_exact) = value_repr(&iv.hi);
    let closed = match (iv.lo_closed, iv.hi_closed) {
        (true, false) => "left",
        (false, true) => "right",
        (true, true) => "both",
        (false, false) => "neither",
    };
    json!({
        "lo": lo,
        "hi": hi,
        "closed": closed,
        "exact": lo_exact && hi_exact,
    })
}

fn emit(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?);
    Ok(())
}

fn beta_digits(beta: &str, x: &str, n: usize) -> Result<()> {
    let system = BetaSystem::from_spec(beta)?;
    let x = parse_rational_literal(x)?;
    let word = system.digits(&x, n)?;
    let iv = system.cylinder(&word)?;
    let (t, t_exact) = value_repr(&system.follower_weight(&word)?);
    emit(&json!({
        "beta": beta,
        "x": x.to_string(),
        "n": n,
        "word": join(&word),
        "interval": interval_json(&iv),
        "t_n": t,
        "t_n_exact": t_exact,
    }))
}

fn expansion_of_one(beta: &str, n: usize) -> Result<()> {
    let system = BetaSystem::from_spec(beta)?;
    let expansion = system.unit_expansion(n)?;
    emit(&json!({
        "beta": beta,
        "horizon": n,
        "word": join(expansion.digits()),
        "terminates": expansion.terminates(),
    }))
}

fn admissible_count(beta: &str, n: usize) -> Result<()> {
    let system = BetaSystem::from_spec(beta)?;
    let count = system.count_admissible(n)?;
    emit(&json!({
        "beta": beta,
        "n": n,
        "count": count.to_string(),
    }))
}

fn cylinder(beta: &str, word: &str) -> Result<()> {
    let system = BetaSystem::from_spec(beta)?;
    let word = parse_digit_word(word)?;
    let iv = system.cylinder(&word)?;
    let (t, t_exact) = value_repr(&system.follower_weight(&word)?);
    emit(&json!({
        "beta": beta,
        "word": join(&word),
        "interval": interval_json(&iv),
        "t_n": t,
        "t_n_exact": t_exact,
    }))
}

fn cf_digits(x: &str, n: usize) -> Result<()> {
    let x = parse_rational_literal(x)?;
    let (quotients, terminated) = cf::quotients(&x, n)?;
    emit(&json!({
        "x": x.to_string(),
        "quotients": join(&quotients),
        "terminated": terminated,
    }))
}

fn convergents(x: &str, n: usize) -> Result<()> {
    let x = parse_rational_literal(x)?;
    let pairs = cf::convergents(&x, n)?;
    let rows: Vec<serde_json::Value> = pairs
        .iter()
        .enumerate()
        .map(|(i, (p, q))| {
            json!({"m": i + 1, "p": p.to_string(), "q": q.to_string()})
        })
        .collect();
    emit(&json!({
        "x": x.to_string(),
        "convergents": rows,
    }))
}

fn cf_cylinder(word: &str) -> Result<()> {
    let word = parse_quotient_word(word)?;
    let iv = cf::cf_cylinder(&word)?;
    emit(&json!({
        "word": join(&word),
        "interval": interval_json(&iv),
    }))
}

/// Zero-run scan with the harness lookahead policy: 8√n + 64 digits,
/// doubling while the window comes up short.
fn zero_run(system: &BetaSystem, x: &ExactRational, n: usize) -> Result<Option<u64>> {
    let mut cap = 8 * (n as f64).sqrt() as u64 + 64;
    for _ in 0..10 {
        match system.zero_run_after(x, n, cap) {
            Ok(run) => return Ok(Some(run)),
            Err(Error::LookaheadExhausted { .. }) => cap *= 2,
            Err(Error::ExpansionTerminated { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Err(Error::LookaheadExhausted { position: n, len: cap as usize })
}

fn kn_record(system: &BetaSystem, beta: &str, x: &ExactRational, n: usize, series: bool) -> Result<serde_json::Value> {
    let (ks, saturated) = bridge::k_series(system, x, n)?;
    let k = *ks.last().expect("n >= 1 yields a nonempty series");
    let l_n = zero_run(system, x, n)?;
    let q_kn = if k == 0 {
        Int::from(1)
    } else {
        cf::convergents(x, k)?.last().expect("depth k available").1.clone()
    };
    let ln_q_kn = if k == 0 { 0.0 } else { cf::log_denominator(&q_kn)?.to_f64() };
    let sandwich = if saturated {
        serde_json::Value::Null
    } else {
        match bridge::bridge_check(system, x, n) {
            Ok(report) => json!({
                "lower_ok": report.lower_ok,
                "upper_ok": report.upper_ok,
                "log_width": report.log_width,
                "ratio": report.ratio,
            }),
            Err(Error::InsufficientDepth { .. }) => serde_json::Value::Null,
            Err(e) => return Err(e),
        }
    };
    let mut record = json!({
        "beta": beta,
        "x": x.to_string(),
        "n": n,
        "k_n": k,
        "ratio": k as f64 / n as f64,
        "l_n": l_n,
        "q_kn": q_kn.to_string(),
        "ln_q_kn": ln_q_kn,
        "cf_saturated": saturated,
        "sandwich": sandwich,
    });
    if series {
        record["series"] = json!(ks);
    }
    Ok(record)
}

fn kn(beta: &str, x: Option<&str>, n: usize, series: bool) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    let system = BetaSystem::from_spec(beta)?;
    match x {
        Some(x) => {
            let x = parse_rational_literal(x)?;
            emit(&kn_record(&system, beta, &x, n, series)?)
        }
        None => {
            let stdin = std::io::stdin();
            let out = std::io::stdout();
            let mut out = out.lock();
            for line in stdin.lock().lines() {
                let line = line?;
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let x = parse_rational_literal(line)?;
                let record = kn_record(&system, beta, &x, n, series)?;
                serde_json::to_writer(&mut out, &record)
                    .map_err(|e| Error::invalid(e.to_string()))?;
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn sigma(beta: &str, nodes: usize, h: f64) -> Result<()> {
    let system = BetaSystem::from_spec(beta)?;
    let params = SpectralParams { degree: nodes, fd_step: h, ..SpectralParams::default() };
    let spectral = spectral_data(&params)?;
    let constants = sigma_constants_from(&system, &spectral)?;
    emit(&json!({
        "lambda2": spectral.lambda,
        "lambda_prime": spectral.lambda_prime,
        "lambda_second": spectral.lambda_second,
        "sigma1": constants.sigma1_sq.sqrt(),
        "a": constants.lochs,
        "b": constants.levy,
        "sigma": constants.sigma,
        "residual": spectral.residual,
        "N": params.degree,
        "M": params.explicit_terms,
    }))
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    beta: &str,
    kind: &str,
    n: Option<usize>,
    samples: Option<usize>,
    seed: u64,
    bits: Option<u64>,
    out: Option<&std::path::Path>,
    format: &str,
    jobs: usize,
) -> Result<()> {
    let kind = ExperimentKind::from_str(kind)?;
    let config = ExperimentConfig {
        beta_spec: beta.to_string(),
        kind,
        samples: samples.unwrap_or_else(|| kind.default_samples()),
        n: n.unwrap_or_else(|| kind.default_n()),
        seed,
        precision_bits: bits,
        parallelism: jobs,
    };
    let report = run_experiment(&config)?;
    let rendered = match format {
        "csv" => report.to_csv(),
        _ => report.to_json()?,
    };
    match out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}
