//! The per-kind experiment runners.

use super::fast::{ln_int_f64, KnDriver};
use super::{
    sampling, stats, Aggregates, ConstantsUsed, ExperimentConfig, ExperimentKind,
    ExperimentReport, SampleRecord,
};
use crate::beta::BetaSystem;
use crate::bridge;
use crate::cf;
use crate::kernel::{self, RealDescriptor};
use crate::operator::{self, SpectralParams};
use crate::{Error, Result};
use num_traits::Signed;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BTreeMap;

pub(super) fn run(config: &ExperimentConfig, system: &BetaSystem) -> Result<ExperimentReport> {
    match config.kind {
        ExperimentKind::Lochs | ExperimentKind::Clt => run_counter_point(config, system),
        ExperimentKind::Lil => run_lil(config, system),
        ExperimentKind::Levy | ExperimentKind::QnClt => run_quotient_point(config, system),
        ExperimentKind::LnDecay => run_ln_decay(config, system),
        ExperimentKind::Invariants => run_invariants(config, system),
    }
}

/// Guard conditions that discard a single sample; anything else aborts the
/// whole run.
fn is_discardable(e: &Error) -> bool {
    matches!(
        e,
        Error::LookaheadExhausted { .. }
            | Error::ExpansionTerminated { .. }
            | Error::InsufficientDepth { .. }
            | Error::PrecisionExhausted { .. }
            | Error::AmbiguousFloor { .. }
            | Error::AmbiguousComparison { .. }
    )
}

fn reason(e: &Error) -> &'static str {
    match e {
        Error::LookaheadExhausted { .. } => "lookahead-exhausted",
        Error::ExpansionTerminated { .. } => "expansion-terminated",
        Error::InsufficientDepth { .. } => "insufficient-depth",
        Error::PrecisionExhausted { .. } => "precision-exhausted",
        Error::AmbiguousFloor { .. } => "ambiguous-floor",
        Error::AmbiguousComparison { .. } => "ambiguous-comparison",
        _ => "other",
    }
}

/// Run the per-sample measurement over the whole stream in parallel, fold
/// outcomes back in sample order, and enforce the 1% discard budget.
fn collect_samples<F>(
    samples: usize,
    f: F,
) -> Result<(Vec<SampleRecord>, BTreeMap<String, usize>, usize)>
where
    F: Fn(u64) -> Result<SampleRecord> + Sync,
{
    let outcomes: Vec<Result<SampleRecord>> =
        (0..samples as u64).into_par_iter().map(&f).collect();
    let mut guards: BTreeMap<String, usize> = BTreeMap::new();
    let mut records = Vec::with_capacity(samples);
    let mut discarded = 0usize;
    for out in outcomes {
        match out {
            Ok(r) => records.push(r),
            Err(e) if is_discardable(&e) => {
                discarded += 1;
                *guards.entry(reason(&e).to_string()).or_insert(0) += 1;
            }
            Err(e) => return Err(e),
        }
    }
    let allowed = samples / 100;
    if discarded > allowed {
        return Err(Error::DiscardBudgetExceeded { discarded, total: samples, allowed });
    }
    Ok((records, guards, discarded))
}

fn base_report(
    config: &ExperimentConfig,
    constants: Option<ConstantsUsed>,
    grid: Option<Vec<usize>>,
    columns: &[&str],
) -> ExperimentReport {
    ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: config.kind.as_str().to_string(),
        beta: config.beta_spec.clone(),
        samples: config.samples,
        n: config.n,
        seed: config.seed,
        precision_bits: config.effective_bits(),
        parallelism: config.parallelism,
        grid,
        constants,
        aggregates: Aggregates::default(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        records: Vec::new(),
    }
}

/// Limit-constant pair `(a, b)` from the certified closed forms.
fn plain_constants(system: &BetaSystem) -> Result<(f64, f64)> {
    let c = bridge::constants(system)?;
    Ok((c.lochs.to_f64(), c.levy.to_f64()))
}

/// Zero-run scan with a growing cap: start near `8 sqrt(n)` and double on
/// exhausted lookahead before giving up.
fn zero_run_with_retry(driver: &mut KnDriver<'_>, n: usize) -> Result<u64> {
    let mut cap = (8.0 * (n as f64).sqrt()) as u64 + 64;
    for _ in 0..10 {
        match driver.zero_run(cap) {
            Err(Error::LookaheadExhausted { .. }) => cap *= 2,
            other => return other,
        }
    }
    driver.zero_run(cap)
}

fn column_series(records: &[SampleRecord], key: &str) -> Vec<f64> {
    records.iter().filter_map(|r| r.values.get(key).copied()).collect()
}

/// Fixed-depth counter kinds: the ratio law and the normalized fluctuation
/// law.
fn run_counter_point(config: &ExperimentConfig, system: &BetaSystem) -> Result<ExperimentReport> {
    let n = config.n;
    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let bits = config.effective_bits();
    let with_sigma = config.kind == ExperimentKind::Clt;
    let (a, b, sigma) = if with_sigma {
        let s = operator::sigma_constants(system, &SpectralParams::default())?;
        (s.lochs, s.levy, Some((s.sigma1_sq.sqrt(), s.sigma)))
    } else {
        let (a, b) = plain_constants(system)?;
        (a, b, None)
    };
    let constants = ConstantsUsed {
        a,
        b,
        sigma1: sigma.map(|s| s.0),
        sigma: sigma.map(|s| s.1),
        source: if with_sigma { "spectral" } else { "closed-form" }.to_string(),
    };

    let (records, guards, discarded) = collect_samples(config.samples, |i| {
        let x = sampling::sample_point(config.seed, i, bits)?;
        let mut driver = KnDriver::new(system, &x)?;
        let mut k = 0usize;
        let mut saturated = false;
        for _ in 0..n {
            let s = driver.step()?;
            k = s.k;
            saturated = s.cf_saturated;
        }
        if saturated {
            return Err(Error::InsufficientDepth { available: k, needed: n });
        }
        let run = zero_run_with_retry(&mut driver, n)?;
        let ln_qk = driver.ln_q_k()?;
        let kf = k as f64;
        let mut values = BTreeMap::new();
        values.insert("k".to_string(), kf);
        values.insert("ratio".to_string(), kf / nf);
        values.insert("zero_run".to_string(), run as f64);
        values.insert("ln_q_k".to_string(), ln_qk);
        values.insert("drift".to_string(), (ln_qk - a * b * nf) / sqrt_n);
        if let Some((_, sg)) = sigma {
            values.insert("normalized".to_string(), (kf - a * nf) / (sg * sqrt_n));
        }
        Ok(SampleRecord { index: i, values })
    })?;

    let columns: &[&str] = if with_sigma {
        &["k", "ratio", "zero_run", "ln_q_k", "drift", "normalized"]
    } else {
        &["k", "ratio", "zero_run", "ln_q_k", "drift"]
    };
    let mut report = base_report(config, Some(constants), None, columns);

    let ks = column_series(&records, "k");
    let ratios = column_series(&records, "ratio");
    let drifts = column_series(&records, "drift");
    let runs = column_series(&records, "zero_run");
    let (mean_k, var_k) = stats::mean_var(&ks);
    let (mean_ratio, var_ratio) = stats::mean_var(&ratios);
    let (mean_drift, _) = stats::mean_var(&drifts);
    let rms_drift = drifts.iter().map(|d| d * d).sum::<f64>() / drifts.len().max(1) as f64;
    let st = &mut report.aggregates.stats;
    st.insert("mean_k".to_string(), mean_k);
    st.insert("var_k".to_string(), var_k);
    st.insert("mean_ratio".to_string(), mean_ratio);
    st.insert("std_ratio".to_string(), var_ratio.sqrt());
    st.insert("mean_drift".to_string(), mean_drift);
    st.insert("rms_drift".to_string(), rms_drift.sqrt());
    st.insert("sigma_hat".to_string(), (var_k / nf).sqrt());
    st.insert("mean_zero_run".to_string(), stats::mean_var(&runs).0);
    st.insert("max_zero_run".to_string(), runs.iter().cloned().fold(0.0, f64::max));
    if var_k > 0.0 {
        let students: Vec<f64> =
            ks.iter().map(|k| (k - mean_k) / var_k.sqrt()).collect();
        st.insert("ks_student".to_string(), stats::ks_distance_normal(&students));
    }
    if sigma.is_some() {
        let norm = column_series(&records, "normalized");
        st.insert("ks_sigma".to_string(), stats::ks_distance_normal(&norm));
    }
    report.aggregates.kept = records.len();
    report.aggregates.discarded = discarded;
    report.aggregates.guards = guards;
    report.records = records;
    Ok(report)
}

/// Geometric depth grid with about 48 points ending exactly at `n`.
fn lil_grid(n: usize) -> Vec<usize> {
    let lo = (n / 100).max(16).min(n);
    let points = 48usize;
    let ratio = (n as f64 / lo as f64).powf(1.0 / (points - 1) as f64);
    let mut grid: Vec<usize> = (0..points)
        .map(|j| ((lo as f64) * ratio.powi(j as i32)).round() as usize)
        .collect();
    grid.push(n);
    grid.sort_unstable();
    grid.dedup();
    grid.retain(|&g| g >= 3 && g <= n);
    grid
}

/// Running extremes of the iterated-logarithm normalization.
fn run_lil(config: &ExperimentConfig, system: &BetaSystem) -> Result<ExperimentReport> {
    let n = config.n;
    let bits = config.effective_bits();
    let s = operator::sigma_constants(system, &SpectralParams::default())?;
    let (a, sg) = (s.lochs, s.sigma);
    let constants = ConstantsUsed {
        a,
        b: s.levy,
        sigma1: Some(s.sigma1_sq.sqrt()),
        sigma: Some(sg),
        source: "spectral".to_string(),
    };
    let grid = lil_grid(n);

    let (records, guards, discarded) = collect_samples(config.samples, |i| {
        let x = sampling::sample_point(config.seed, i, bits)?;
        let mut driver = KnDriver::new(system, &x)?;
        let mut values = BTreeMap::new();
        let mut band_max = f64::NEG_INFINITY;
        let mut band_min = f64::INFINITY;
        let mut next = 0usize;
        let mut k = 0usize;
        let window_lo = grid[0];
        for step_n in 1..=n {
            let stp = driver.step()?;
            k = stp.k;
            if stp.cf_saturated {
                return Err(Error::InsufficientDepth { available: k, needed: n });
            }
            // Running extremes track every depth in the window, not just the
            // reporting grid: the envelope is a property of the whole path.
            if step_n >= window_lo {
                let g = step_n as f64;
                let norm = sg * (2.0 * g * g.ln().ln().max(1e-9)).sqrt();
                let stat = (k as f64 - a * g) / norm;
                band_max = band_max.max(stat);
                band_min = band_min.min(stat);
                if next < grid.len() && grid[next] == step_n {
                    values.insert(format!("stat_{step_n}"), stat);
                    next += 1;
                }
            }
        }
        let ln_qk = driver.ln_q_k()?;
        values.insert("k".to_string(), k as f64);
        values.insert("band_max".to_string(), band_max);
        values.insert("band_min".to_string(), band_min);
        values.insert(
            "drift".to_string(),
            (ln_qk - a * s.levy * n as f64) / (n as f64).sqrt(),
        );
        Ok(SampleRecord { index: i, values })
    })?;

    let mut columns: Vec<String> =
        vec!["k".to_string(), "band_max".to_string(), "band_min".to_string(), "drift".to_string()];
    columns.extend(grid.iter().map(|g| format!("stat_{g}")));
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut report = base_report(config, Some(constants), Some(grid.clone()), &column_refs);

    let maxes = column_series(&records, "band_max");
    let mins = column_series(&records, "band_min");
    let kept = records.len().max(1) as f64;
    let hi_ok = |v: &f64| (0.2..=2.5).contains(v);
    let lo_ok = |v: &f64| (-2.5..=-0.2).contains(v);
    let in_hi = maxes.iter().filter(|v| hi_ok(v)).count() as f64;
    let in_lo = mins.iter().filter(|v| lo_ok(v)).count() as f64;
    let in_both = maxes
        .iter()
        .zip(&mins)
        .filter(|(mx, mn)| hi_ok(mx) && lo_ok(mn))
        .count() as f64;
    let st = &mut report.aggregates.stats;
    st.insert("frac_max_in_band".to_string(), in_hi / kept);
    st.insert("frac_min_in_band".to_string(), in_lo / kept);
    st.insert("frac_both_in_band".to_string(), in_both / kept);
    st.insert("mean_band_max".to_string(), stats::mean_var(&maxes).0);
    st.insert("mean_band_min".to_string(), stats::mean_var(&mins).0);
    let drifts = column_series(&records, "drift");
    st.insert(
        "rms_drift".to_string(),
        (drifts.iter().map(|d| d * d).sum::<f64>() / drifts.len().max(1) as f64).sqrt(),
    );
    report.aggregates.kept = records.len();
    report.aggregates.discarded = discarded;
    report.aggregates.guards = guards;
    report.records = records;
    Ok(report)
}

/// Fixed-depth quotient kinds: denominator growth and its fluctuations.
fn run_quotient_point(config: &ExperimentConfig, system: &BetaSystem) -> Result<ExperimentReport> {
    let n = config.n;
    let nf = n as f64;
    let bits = config.effective_bits();
    let with_sigma = config.kind == ExperimentKind::QnClt;
    let (a, b, sigma1) = if with_sigma {
        let s = operator::sigma_constants(system, &SpectralParams::default())?;
        (s.lochs, s.levy, Some(s.sigma1_sq.sqrt()))
    } else {
        let (a, b) = plain_constants(system)?;
        (a, b, None)
    };
    let constants = ConstantsUsed {
        a,
        b,
        sigma1,
        sigma: None,
        source: if with_sigma { "spectral" } else { "closed-form" }.to_string(),
    };

    let (records, guards, discarded) = collect_samples(config.samples, |i| {
        let x = sampling::sample_point(config.seed, i, bits)?;
        let conv = cf::convergents(&x, n)?;
        if conv.len() < n {
            return Err(Error::InsufficientDepth { available: conv.len(), needed: n });
        }
        let (_, q) = conv.last().expect("n >= 1");
        let ln_qn = ln_int_f64(q);
        let mut values = BTreeMap::new();
        values.insert("ln_q_n".to_string(), ln_qn);
        values.insert("growth".to_string(), ln_qn / nf);
        if let Some(s1) = sigma1 {
            values.insert("normalized".to_string(), (ln_qn - b * nf) / (s1 * nf.sqrt()));
        }
        Ok(SampleRecord { index: i, values })
    })?;

    let columns: &[&str] = if with_sigma {
        &["ln_q_n", "growth", "normalized"]
    } else {
        &["ln_q_n", "growth"]
    };
    let mut report = base_report(config, Some(constants), None, columns);

    let growth = column_series(&records, "growth");
    let lnq = column_series(&records, "ln_q_n");
    let (mean_growth, var_growth) = stats::mean_var(&growth);
    let (mean_lnq, var_lnq) = stats::mean_var(&lnq);
    let st = &mut report.aggregates.stats;
    st.insert("mean_growth".to_string(), mean_growth);
    st.insert("std_growth".to_string(), var_growth.sqrt());
    st.insert("var_ln_q_n".to_string(), var_lnq);
    st.insert("sigma1_hat".to_string(), (var_lnq / nf).sqrt());
    if var_lnq > 0.0 {
        let students: Vec<f64> =
            lnq.iter().map(|v| (v - mean_lnq) / var_lnq.sqrt()).collect();
        st.insert("ks_student".to_string(), stats::ks_distance_normal(&students));
    }
    if with_sigma {
        let norm = column_series(&records, "normalized");
        st.insert("ks_sigma1".to_string(), stats::ks_distance_normal(&norm));
    }
    report.aggregates.kept = records.len();
    report.aggregates.discarded = discarded;
    report.aggregates.guards = guards;
    report.records = records;
    Ok(report)
}

/// Power-of-two depth grid from about `n/16` up to `n`.
fn decay_grid(n: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut g = (n / 16).max(16);
    while g < n {
        grid.push(g);
        g *= 2;
    }
    grid.push(n);
    grid.dedup();
    grid
}

/// Zero-run lengths after a grid of positions, one digit pass per sample.
fn run_ln_decay(config: &ExperimentConfig, system: &BetaSystem) -> Result<ExperimentReport> {
    let n = config.n;
    let bits = config.effective_bits();
    let grid = decay_grid(n);
    let tail_cap = 65_536usize;

    let grid_ref = &grid;
    let (records, guards, discarded) = collect_samples(config.samples, |i| {
        let x = sampling::sample_point(config.seed, i, bits)?;
        let mut stream = system.digit_stream(&x)?;
        let mut values = BTreeMap::new();
        // Pending grid positions whose zero run is still open.
        let mut pending: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
        let mut next = 0usize;
        let mut pos = 0usize;
        while next < grid_ref.len() || !pending.is_empty() {
            if pos >= n + tail_cap {
                return Err(Error::LookaheadExhausted { position: n, len: tail_cap });
            }
            if stream.terminated() && !pending.is_empty() {
                return Err(Error::ExpansionTerminated { depth: pos, requested: n });
            }
            let d = stream.next_digit()?;
            pos += 1;
            if d != 0 {
                while let Some(&g) = pending.front() {
                    // First nonzero after position g sits at pos: run length
                    // pos - g - 1.
                    values.insert(format!("l_{g}"), (pos - g - 1) as f64);
                    pending.pop_front();
                }
            }
            if next < grid_ref.len() && grid_ref[next] == pos {
                pending.push_back(pos);
                next += 1;
            }
        }
        Ok(SampleRecord { index: i, values })
    })?;

    let columns: Vec<String> = grid.iter().map(|g| format!("l_{g}")).collect();
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut report = base_report(config, None, Some(grid.clone()), &column_refs);

    for &g in &grid {
        let ls = column_series(&records, &format!("l_{g}"));
        if ls.is_empty() {
            continue;
        }
        let sqrt_g = (g as f64).sqrt();
        let st = &mut report.aggregates.stats;
        st.insert(format!("mean_l_{g}"), stats::mean_var(&ls).0);
        st.insert(format!("p99_l_{g}"), stats::percentile(&ls, 99.0));
        st.insert(format!("p99_ratio_{g}"), stats::percentile(&ls, 99.0) / sqrt_g);
        st.insert(format!("max_l_{g}"), ls.iter().cloned().fold(0.0, f64::max));
    }
    report.aggregates.kept = records.len();
    report.aggregates.discarded = discarded;
    report.aggregates.guards = guards;
    report.records = records;
    Ok(report)
}

/// Count-of-words bounds for the admissible language, checked exactly.
fn renyi_violations(system: &BetaSystem, up_to: usize) -> Result<usize> {
    let mut viol = 0usize;
    for n in 1..=up_to {
        let count = system.count_admissible(n)?;
        match system.field().descriptor() {
            RealDescriptor::Rational(r) => {
                let p = r.numer();
                let q = r.denom();
                let pn = num_traits::pow(p.clone(), n);
                let qn = num_traits::pow(q.clone(), n);
                if &count * &qn < pn {
                    viol += 1;
                }
                let pn1 = pn * p;
                if &count * &qn * (p - q) > pn1 {
                    viol += 1;
                }
            }
            RealDescriptor::AlgebraicRoot { .. } => {
                let f = system.field();
                let mut bp = f.one();
                for _ in 0..n {
                    bp = bp.mul_base();
                }
                if f.from_int(&count).sub(&bp).sign()? < 0 {
                    viol += 1;
                }
                let bp1 = bp.mul_base();
                let spread = f.beta().sub(&f.one()).scale_int(&count);
                if bp1.sub(&spread).sign()? < 0 {
                    viol += 1;
                }
            }
        }
    }
    Ok(viol)
}

/// Exact verification of the structural inequalities, sample by sample.
fn run_invariants(config: &ExperimentConfig, system: &BetaSystem) -> Result<ExperimentReport> {
    let n = config.n;
    let bits = config.effective_bits();
    let (a, b) = plain_constants(system)?;
    let constants = ConstantsUsed {
        a,
        b,
        sigma1: None,
        sigma: None,
        source: "closed-form".to_string(),
    };
    let renyi_viol = renyi_violations(system, 12)?;
    let ln2i = kernel::ln2();

    let (records, guards, discarded) = collect_samples(config.samples, |i| {
        let x = sampling::sample_point(config.seed, i, bits)?;
        let mut values = BTreeMap::new();

        // Counter trajectory, certified engine only.
        let (ks, saturated) = bridge::k_series(system, &x, n)?;
        if saturated {
            return Err(Error::InsufficientDepth { available: ks.len(), needed: n });
        }
        let k = *ks.last().expect("n >= 1");
        let monotone_viol = ks.windows(2).filter(|w| w[1] < w[0]).count();
        values.insert("k".to_string(), k as f64);
        values.insert("monotone_viol".to_string(), monotone_viol as f64);

        // Width sandwich between the two expansions.
        let sandwich = bridge::bridge_check(system, &x, n)?;
        values.insert("sandwich_upper_ok".to_string(), sandwich.upper_ok as u8 as f64);
        values.insert("sandwich_lower_ok".to_string(), sandwich.lower_ok as u8 as f64);

        // Digit-side width bounds at depth n via the zero run after n.
        let mut cap = (8.0 * (n as f64).sqrt()) as u64 + 64;
        let run = loop {
            match system.zero_run_after(&x, n, cap) {
                Err(Error::LookaheadExhausted { .. }) if cap < (1u64 << 24) => cap *= 2,
                other => break other?,
            }
        };
        let word = system.digits(&x, n)?;
        let width_upper_ok = system.cmp_cylinder_width(&word, n)? != Ordering::Greater;
        let width_lower_ok =
            system.cmp_cylinder_width(&word, n + run as usize + 1)? != Ordering::Less;
        values.insert("zero_run".to_string(), run as f64);
        values.insert("width_upper_ok".to_string(), width_upper_ok as u8 as f64);
        values.insert("width_lower_ok".to_string(), width_lower_ok as u8 as f64);

        // Quotient-side chain at every usable depth, plus growth pairs and
        // the denominator/orbit cancellation, all on exact integers.
        let depth = k + 3;
        let conv = cf::convergents(&x, depth)?;
        if conv.len() < depth {
            return Err(Error::InsufficientDepth { available: conv.len(), needed: depth });
        }
        let xn = x.numer();
        let xd = x.denom();
        let mut chain_viol = 0usize;
        for m in 1..depth {
            let (p_m, q_m) = &conv[m - 1];
            let q_m1 = &conv[m].1;
            if q_m > q_m1 {
                chain_viol += 1;
            }
            let dist = (xn * q_m - p_m * xd).abs();
            if *xd > q_m1 * 2u8 * &dist {
                chain_viol += 1;
            }
            if &dist * q_m1 > *xd {
                chain_viol += 1;
            }
        }
        values.insert("chain_viol".to_string(), chain_viol as f64);

        let q_at = |j: usize| -> crate::Int {
            if j == 0 {
                crate::Int::from(1u8)
            } else {
                conv[j - 1].1.clone()
            }
        };
        let marks = [0usize, 1, depth / 4, depth / 2, depth];
        let mut growth_viol = 0usize;
        for (ai, &kk) in marks.iter().enumerate() {
            for &nn in &marks[ai + 1..] {
                if kk >= nn {
                    continue;
                }
                let qk = q_at(kk);
                let qn = q_at(nn);
                let lhs = &qn * &qn;
                let rhs = (&qk * &qk) << (nn - kk - 1);
                if lhs < rhs {
                    growth_viol += 1;
                }
            }
        }
        values.insert("growth_viol".to_string(), growth_viol as f64);

        // ln q_d and the orbit log sum cancel to within ln 2, certified.
        let hull = cf::log_denominator(&conv[depth - 1].1)?
            .add(&cf::orbit_log_sum(&x, depth)?);
        let neg_lo: crate::Int = -ln2i.lo().clone();
        let neg_hi: crate::Int = -ln2i.hi().clone();
        let (jie_ok, jie_ambiguous) = if hull.hi() <= ln2i.lo() && *hull.lo() >= neg_lo {
            (true, false)
        } else if *hull.lo() > *ln2i.hi() || *hull.hi() < neg_hi {
            (false, false)
        } else {
            (false, true)
        };
        values.insert("jie_ok".to_string(), jie_ok as u8 as f64);
        values.insert("jie_ambiguous".to_string(), jie_ambiguous as u8 as f64);

        Ok(SampleRecord { index: i, values })
    })?;

    let columns = [
        "k",
        "monotone_viol",
        "chain_viol",
        "growth_viol",
        "zero_run",
        "width_upper_ok",
        "width_lower_ok",
        "sandwich_upper_ok",
        "sandwich_lower_ok",
        "jie_ok",
        "jie_ambiguous",
    ];
    let mut report = base_report(config, Some(constants), None, &columns);

    let total = |key: &str| column_series(&records, key).iter().sum::<f64>();
    let kept = records.len() as f64;
    let st = &mut report.aggregates.stats;
    st.insert("renyi_viol".to_string(), renyi_viol as f64);
    st.insert("monotone_viol".to_string(), total("monotone_viol"));
    st.insert("chain_viol".to_string(), total("chain_viol"));
    st.insert("growth_viol".to_string(), total("growth_viol"));
    st.insert("width_upper_fail".to_string(), kept - total("width_upper_ok"));
    st.insert("width_lower_fail".to_string(), kept - total("width_lower_ok"));
    st.insert("sandwich_upper_fail".to_string(), kept - total("sandwich_upper_ok"));
    st.insert("sandwich_lower_fail".to_string(), kept - total("sandwich_lower_ok"));
    st.insert("jie_fail".to_string(), kept - total("jie_ok"));
    st.insert("jie_ambiguous".to_string(), total("jie_ambiguous"));
    report.aggregates.kept = records.len();
    report.aggregates.discarded = discarded;
    report.aggregates.guards = guards;
    report.records = records;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(kind: ExperimentKind, samples: usize, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            beta_spec: "rat:2/1".to_string(),
            kind,
            samples,
            n,
            seed: 11,
            precision_bits: None,
            parallelism: 1,
        }
    }

    #[test]
    fn counter_point_run_is_sane() {
        let cfg = config(ExperimentKind::Lochs, 12, 60);
        let report = super::super::run_experiment(&cfg).unwrap();
        assert_eq!(report.aggregates.kept, 12);
        assert_eq!(report.aggregates.discarded, 0);
        assert_eq!(report.records.len(), 12);
        let mean_ratio = report.aggregates.stats["mean_ratio"];
        assert!(mean_ratio > 0.1 && mean_ratio < 0.5, "mean ratio {mean_ratio}");
        for r in &report.records {
            let k = r.values["k"];
            assert!(k >= 1.0 && k < 60.0);
        }
    }

    #[test]
    fn parallel_runs_are_byte_identical() {
        let mut cfg = config(ExperimentKind::Lochs, 16, 50);
        let a = super::super::run_experiment(&cfg).unwrap();
        cfg.parallelism = 4;
        let b = super::super::run_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        // JSON echoes the thread count, so compare everything else.
        assert_eq!(a.aggregates.stats, b.aggregates.stats);
        assert_eq!(a.aggregates.guards, b.aggregates.guards);
    }

    #[test]
    fn decay_run_matches_direct_zero_run_scan() {
        let cfg = ExperimentConfig {
            beta_spec: "dec:10".to_string(),
            kind: ExperimentKind::LnDecay,
            samples: 8,
            n: 64,
            seed: 3,
            precision_bits: None,
            parallelism: 1,
        };
        let system = BetaSystem::from_spec(&cfg.beta_spec).unwrap();
        let report = super::super::run_experiment(&cfg).unwrap();
        assert_eq!(report.grid.as_deref(), Some(&[16, 32, 64][..]));
        for rec in &report.records {
            let x = sampling::sample_point(cfg.seed, rec.index, cfg.effective_bits()).unwrap();
            for &g in report.grid.as_ref().unwrap() {
                let oracle = system.zero_run_after(&x, g, 10_000).unwrap();
                assert_eq!(rec.values[&format!("l_{g}")], oracle as f64, "g={g}");
            }
        }
    }

    #[test]
    fn invariants_run_suffers_no_violations() {
        let cfg = config(ExperimentKind::Invariants, 6, 60);
        let report = super::super::run_experiment(&cfg).unwrap();
        assert_eq!(report.aggregates.kept, 6);
        let st = &report.aggregates.stats;
        for key in [
            "renyi_viol",
            "monotone_viol",
            "chain_viol",
            "growth_viol",
            "width_upper_fail",
            "width_lower_fail",
            "sandwich_upper_fail",
            "sandwich_lower_fail",
            "jie_fail",
            "jie_ambiguous",
        ] {
            assert_eq!(st[key], 0.0, "{key} must be zero");
        }
    }

    #[test]
    fn quotient_run_tracks_growth_constant() {
        let cfg = ExperimentConfig {
            beta_spec: "rat:2/1".to_string(),
            kind: ExperimentKind::Levy,
            samples: 40,
            n: 400,
            seed: 5,
            precision_bits: None,
            parallelism: 0,
        };
        let report = super::super::run_experiment(&cfg).unwrap();
        let mean = report.aggregates.stats["mean_growth"];
        // pi^2 / (12 ln 2) = 1.1865691...
        assert!((mean - 1.1866).abs() < 0.05, "mean growth {mean}");
    }

    #[test]
    fn lil_band_stays_in_range_for_small_runs() {
        let cfg = config(ExperimentKind::Lil, 6, 2000);
        let report = super::super::run_experiment(&cfg).unwrap();
        assert_eq!(report.aggregates.kept, 6);
        for rec in &report.records {
            let hi = rec.values["band_max"];
            let lo = rec.values["band_min"];
            assert!(hi.is_finite() && lo.is_finite());
            assert!(hi >= lo);
            assert!(hi > -1.0 && hi < 4.0, "band max {hi}");
            assert!(lo < 1.0 && lo > -4.0, "band min {lo}");
        }
    }

    #[test]
    fn discard_budget_aborts_runs_dominated_by_guards() {
        // 1/2 has a one-quotient expansion: every sample of a depth-20 run
        // saturates... but sampled points never collide with 1/2, so force
        // failure differently: n too deep for the sample precision means the
        // quotient expansion ends early for every x.
        let cfg = ExperimentConfig {
            beta_spec: "rat:2/1".to_string(),
            kind: ExperimentKind::Levy,
            samples: 10,
            n: 4000,
            seed: 2,
            precision_bits: Some(1024),
            parallelism: 1,
        };
        let err = super::super::run_experiment(&cfg).unwrap_err();
        assert!(matches!(err, Error::DiscardBudgetExceeded { .. }), "got {err:?}");
    }

    #[test]
    fn kind_parsing_round_trips() {
        for kind in [
            ExperimentKind::Lochs,
            ExperimentKind::Clt,
            ExperimentKind::Lil,
            ExperimentKind::Levy,
            ExperimentKind::QnClt,
            ExperimentKind::LnDecay,
            ExperimentKind::Invariants,
        ] {
            let parsed: ExperimentKind = kind.as_str().parse().unwrap();
            assert_eq!(parsed, kind);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }
}
