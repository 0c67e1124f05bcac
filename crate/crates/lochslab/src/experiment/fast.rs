//! Float-filtered counter trajectories for integer bases.
//!
//! The reference engine certifies every endpoint comparison with big-integer
//! products whose operands grow linearly in the depth `n`, which makes deep
//! trajectories quadratically expensive.  This engine runs the *same* scan,
//! but first tries to decide each comparison from `log2`-scale distances:
//! with `x` strictly inside both intervals, the two gaps being compared
//! almost always differ by an `O(1)` factor, while the float evaluation
//! error stays below ~1e-9 even at depth 10^6.  A margin of [`MARGIN`]
//! (1e-5) therefore separates the decidable cases safely, and every
//! remaining case — ties, NaNs from unresolved digit windows, exhausted
//! lookahead — falls back to the exact big-integer predicate.  The counter
//! values produced are identical to the reference engine's on every input.
//!
//! Distances used (depth `n` prefix value `v`, `b = beta^n`, quotient depth
//! `m` with convergent `p/q`, previous `q'`, remainder `z` after `m`
//! quotients):
//!
//! ```text
//!   x - v/b        = y / b            y = 0.d_{n+1} d_{n+2} ...  (base beta)
//!   (v+1)/b - x    = (1 - y) / b
//!   |x - p/q|      = z / (q (q + q' z))
//!   |x - mediant|  = (1 - z) / ((q + q') (q + q' z))
//! ```
//!
//! `y` is read from a 64-digit lookahead window (40 significant digits kept,
//! relative truncation error under `beta^-39`); the `z` quantities come from
//! the exact Euclid remainders at the moment a cell is built, via `O(1)`
//! top-limb logarithms.  All per-step float error sources together stay
//! below ~1e-9, four orders of magnitude under the margin.

use crate::beta::{BetaSystem, DigitStream};
use crate::bridge::{KnEngine, KnStep};
use crate::cf::QuotientStream;
use crate::kernel::{cmp_products, ExactRational};
use crate::{Error, Int, Result};
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::VecDeque;

/// Decision margin in `log2` units.  Comparisons whose float estimate lands
/// within the margin of zero are re-decided exactly.
pub const MARGIN: f64 = 1e-5;

/// Digits kept in the lookahead window.
const LOOKAHEAD: usize = 64;
/// Significant digits accumulated when evaluating the window as a float.
const ACCUM: usize = 40;
/// Latest window position where a significant digit still leaves `ACCUM`
/// digits to accumulate.
const START_MAX: usize = LOOKAHEAD - ACCUM;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// `log2` of a nonnegative big integer to ~1e-14 absolute accuracy, reading
/// only the top two limbs.  Zero maps to `-inf`.
pub(crate) fn log2_int(v: &Int) -> f64 {
    let mut it = v.magnitude().iter_u64_digits();
    let len = it.len();
    match len {
        0 => f64::NEG_INFINITY,
        1 => (it.next().expect("one limb") as f64).log2(),
        _ => {
            let hi = it.next_back().expect("two limbs") as f64;
            let lo = it.next_back().expect("two limbs") as f64;
            ((len - 2) as f64) * 64.0 + (hi * TWO_POW_64 + lo).log2()
        }
    }
}

/// Natural log of a positive big integer (f64 accuracy).
pub(crate) fn ln_int_f64(v: &Int) -> f64 {
    log2_int(v) * std::f64::consts::LN_2
}

/// One quotient cell: exact endpoint fractions for fallback comparisons,
/// plus the float geometry extracted when the cell was built.
struct FastCell {
    lo_num: Int,
    lo_den: Int,
    hi_num: Int,
    hi_den: Int,
    lo_closed: bool,
    /// `log2 (q_m (q_m + q_{m-1}))`, the log of the inverse cell width.
    log2_inv_width: f64,
    log2_q: f64,
    /// `log2 (x - lo)`.
    log2_dist_lo: f64,
    /// `log2 (hi - x)`.
    log2_dist_hi: f64,
    depth: usize,
}

/// Counter engine for an integer base: identical scan and identical output
/// to the reference engine, with float-filtered comparisons.
pub struct FastKn {
    beta: Int,
    beta_u: u64,
    beta_f: f64,
    log2_beta: f64,
    /// Numerator of the depth-`n` prefix value `v / beta^n`.
    v: Int,
    /// `beta^n`.
    b: Int,
    digits: DigitStream,
    /// Upcoming digits: `ahead[i]` is digit `n + 1 + i` of `x`.
    ahead: VecDeque<u64>,
    stream: QuotientStream,
    p_prev: Int,
    q_prev: Int,
    p: Int,
    q: Int,
    cells: VecDeque<FastCell>,
    /// Cells discarded from the front; `cells[0]` has depth `dropped + 1`.
    dropped: usize,
    exhausted: bool,
    n: usize,
    k: usize,
    saturated: bool,
    margin: f64,
    fallbacks: u64,
}

impl FastKn {
    pub fn new(system: &BetaSystem, x: &ExactRational, margin: f64) -> Result<FastKn> {
        if !system.base_is_integer() {
            return Err(Error::invalid("float-filtered counter needs an integer base"));
        }
        let beta = system
            .field()
            .descriptor()
            .as_rational()
            .expect("integer base is rational")
            .numer()
            .clone();
        let beta_u = beta
            .to_u64()
            .filter(|&b| b <= 1 << 40)
            .ok_or_else(|| Error::invalid("base too large for the float-filtered counter"))?;
        Ok(FastKn {
            beta,
            beta_u,
            beta_f: beta_u as f64,
            log2_beta: (beta_u as f64).log2(),
            v: Int::zero(),
            b: Int::one(),
            digits: system.digit_stream(x)?,
            ahead: VecDeque::with_capacity(LOOKAHEAD + 1),
            stream: QuotientStream::new(x)?,
            p_prev: Int::one(),
            q_prev: Int::zero(),
            p: Int::zero(),
            q: Int::one(),
            cells: VecDeque::new(),
            dropped: 0,
            exhausted: false,
            n: 0,
            k: 0,
            saturated: false,
            margin,
            fallbacks: 0,
        })
    }

    /// Exact comparisons the float filter could not decide so far.
    pub fn fallback_count(&self) -> u64 {
        self.fallbacks
    }

    pub fn current_k(&self) -> usize {
        self.k
    }

    /// `ln q` at the current counter depth (0 when the counter is 0).
    pub fn ln_q_current_k(&self) -> f64 {
        if self.k == 0 {
            0.0
        } else {
            self.cell(self.k).log2_q * std::f64::consts::LN_2
        }
    }

    fn refill(&mut self) -> Result<()> {
        while self.ahead.len() < LOOKAHEAD {
            self.ahead.push_back(self.digits.next_digit()?);
        }
        Ok(())
    }

    /// `log2 y` of the tail fraction `y = 0.d_{n+1} d_{n+2} ...`, or of its
    /// complement `1 - y`.  `-inf` when the tail is exactly zero, NaN when
    /// the window cannot resolve the value (forces the exact path).
    fn window_log2(&self, complement: bool) -> f64 {
        let top = self.beta_u - 1;
        let mut start = usize::MAX;
        for i in 0..=START_MAX {
            let d = self.ahead[i];
            let significant = if complement { d != top } else { d != 0 };
            if significant {
                start = i;
                break;
            }
        }
        if start == usize::MAX {
            if !complement && self.digits.terminated() && self.ahead.iter().all(|&d| d == 0) {
                return f64::NEG_INFINITY;
            }
            return f64::NAN;
        }
        let mut acc = 0.0f64;
        for i in (start..start + ACCUM).rev() {
            let d = if complement { top - self.ahead[i] } else { self.ahead[i] };
            acc = acc / self.beta_f + d as f64;
        }
        acc.log2() - (start as f64 + 1.0) * self.log2_beta
    }

    fn cell(&self, m: usize) -> &FastCell {
        &self.cells[m - 1 - self.dropped]
    }

    /// Build quotient cells up to depth `m`; false when the expansion ends
    /// first.
    fn ensure_cell(&mut self, m: usize) -> bool {
        while self.dropped + self.cells.len() < m {
            if self.exhausted {
                return false;
            }
            let Some(a) = self.stream.next_quotient() else {
                self.exhausted = true;
                return false;
            };
            let p_next = &a * &self.p + &self.p_prev;
            let q_next = &a * &self.q + &self.q_prev;
            self.p_prev = std::mem::replace(&mut self.p, p_next);
            self.q_prev = std::mem::replace(&mut self.q, q_next);
            let depth = self.stream.emitted();
            debug_assert_eq!(depth, self.dropped + self.cells.len() + 1);

            let log2_q = log2_int(&self.q);
            let (z_num, z_den) = self.stream.remainder_refs();
            let (log2_z, log2_1mz) = if z_num.is_zero() {
                (f64::NEG_INFINITY, 0.0)
            } else {
                let one_minus = z_den - z_num;
                (
                    log2_int(z_num) - log2_int(z_den),
                    log2_int(&one_minus) - log2_int(z_den),
                )
            };
            // q + q' z = q (1 + r), r in [0, 1).
            let r = (log2_int(&self.q_prev) + log2_z - log2_q).exp2();
            let log2_q_plus_qz = log2_q + (1.0 + r).log2();
            let inner_num = &self.p + &self.p_prev;
            let inner_den = &self.q + &self.q_prev;
            let log2_inner_den = log2_int(&inner_den);
            let log2_dist_outer = log2_z - log2_q - log2_q_plus_qz;
            let log2_dist_inner = log2_1mz - log2_inner_den - log2_q_plus_qz;
            let log2_inv_width = log2_q + log2_inner_den;

            // Even depth: the convergent sits below x (closed end), the
            // mediant above; odd depth the other way around.
            let cell = if depth % 2 == 0 {
                FastCell {
                    lo_num: self.p.clone(),
                    lo_den: self.q.clone(),
                    hi_num: inner_num,
                    hi_den: inner_den,
                    lo_closed: true,
                    log2_inv_width,
                    log2_q,
                    log2_dist_lo: log2_dist_outer,
                    log2_dist_hi: log2_dist_inner,
                    depth,
                }
            } else {
                FastCell {
                    lo_num: inner_num,
                    lo_den: inner_den,
                    hi_num: self.p.clone(),
                    hi_den: self.q.clone(),
                    lo_closed: false,
                    log2_inv_width,
                    log2_q,
                    log2_dist_lo: log2_dist_inner,
                    log2_dist_hi: log2_dist_outer,
                    depth,
                }
            };
            self.cells.push_back(cell);
        }
        true
    }

    fn prune(&mut self) {
        while let Some(front) = self.cells.front() {
            if front.depth < self.k {
                self.cells.pop_front();
                self.dropped += 1;
            } else {
                break;
            }
        }
    }

    /// Advance by one base digit and return the new counter value.  Same
    /// contract as the reference engine's `step`.
    pub fn step(&mut self) -> Result<KnStep> {
        self.refill()?;
        let d = self.ahead.pop_front().expect("window refilled");
        self.v *= &self.beta;
        self.v += d;
        self.b *= &self.beta;
        self.n += 1;
        self.refill()?;

        let shift = -(self.n as f64) * self.log2_beta;
        let log2_dist_jlo = self.window_log2(false) + shift;
        let log2_dist_jhi = self.window_log2(true) + shift;

        let mut m = self.k + 1;
        loop {
            if !self.ensure_cell(m) {
                self.saturated = true;
                break;
            }
            let cell = &self.cells[m - 1 - self.dropped];
            // Strict width cutoff: beta^-n > |I_m|  <=>  q_m (q_m + q_{m-1})
            // > beta^n.  Filtered in log scale; the exact product is only
            // formed when the logs land inside the margin.
            let diff = cell.log2_inv_width - (self.n as f64) * self.log2_beta;
            if diff > self.margin {
                break;
            }
            if diff >= -self.margin {
                self.fallbacks += 1;
                if &cell.lo_den * &cell.hi_den > self.b {
                    break;
                }
            }
            let included = cell_included(
                cell,
                &self.v,
                &self.b,
                log2_dist_jlo,
                log2_dist_jhi,
                self.margin,
                &mut self.fallbacks,
            );
            if included {
                self.k = m;
            }
            m += 1;
        }
        self.prune();
        Ok(KnStep { n: self.n, k: self.k, cf_saturated: self.saturated })
    }

    /// Zero-run length right after the current depth, reading (and keeping)
    /// digits from the lookahead window.  Mirrors the digit-system scan:
    /// an endless run errs with the terminated-expansion condition, a run
    /// still open after `max_scan` digits errs with exhausted lookahead.
    pub fn zero_run_after_current(&mut self, max_scan: u64) -> Result<u64> {
        let mut run = 0u64;
        loop {
            if run >= max_scan {
                return Err(Error::LookaheadExhausted {
                    position: self.n,
                    len: max_scan as usize,
                });
            }
            let idx = run as usize;
            while self.ahead.len() <= idx {
                if self.digits.terminated() {
                    return Err(Error::ExpansionTerminated {
                        depth: self.n + idx,
                        requested: self.n,
                    });
                }
                let d = self.digits.next_digit()?;
                self.ahead.push_back(d);
            }
            if self.ahead[idx] != 0 {
                return Ok(run);
            }
            run += 1;
        }
    }
}

/// The inclusion predicate, float-filtered.  `J = [v/b, (v+1)/b)`; the cell
/// carries its exact endpoints and their log-distances from `x`.
fn cell_included(
    cell: &FastCell,
    v: &Int,
    b: &Int,
    log2_dist_jlo: f64,
    log2_dist_jhi: f64,
    margin: f64,
    fallbacks: &mut u64,
) -> bool {
    // Lower endpoints: J.lo above I.lo  <=>  x - J.lo below x - I.lo.
    let dl = log2_dist_jlo - cell.log2_dist_lo;
    let lo_ok = if dl < -margin {
        true
    } else if dl > margin {
        false
    } else {
        *fallbacks += 1;
        match cmp_products(v, &cell.lo_den, &cell.lo_num, b) {
            Ordering::Greater => true,
            Ordering::Equal => cell.lo_closed,
            Ordering::Less => false,
        }
    };
    if !lo_ok {
        return false;
    }
    // Upper endpoints: J's own end is excluded, so <= suffices either way.
    let du = log2_dist_jhi - cell.log2_dist_hi;
    if du < -margin {
        true
    } else if du > margin {
        false
    } else {
        *fallbacks += 1;
        let hi = v + 1u32;
        cmp_products(&hi, &cell.hi_den, &cell.hi_num, b) != Ordering::Greater
    }
}

/// A counter trajectory driver that picks the float-filtered engine when the
/// base allows it and the certified reference engine otherwise, behind one
/// interface.
pub enum KnDriver<'a> {
    Fast(FastKn),
    Exact {
        engine: KnEngine,
        system: &'a BetaSystem,
        x: ExactRational,
        n: usize,
        k: usize,
    },
}

impl<'a> KnDriver<'a> {
    pub fn new(system: &'a BetaSystem, x: &ExactRational) -> Result<KnDriver<'a>> {
        if system.base_is_integer() {
            if let Ok(fast) = FastKn::new(system, x, MARGIN) {
                return Ok(KnDriver::Fast(fast));
            }
        }
        Ok(KnDriver::Exact {
            engine: KnEngine::new(system, x)?,
            system,
            x: x.clone(),
            n: 0,
            k: 0,
        })
    }

    pub fn step(&mut self) -> Result<KnStep> {
        match self {
            KnDriver::Fast(f) => f.step(),
            KnDriver::Exact { engine, n, k, .. } => {
                let s = engine.step()?;
                *n = s.n;
                *k = s.k;
                Ok(s)
            }
        }
    }

    /// `ln q` at the current counter value.
    pub fn ln_q_k(&self) -> Result<f64> {
        match self {
            KnDriver::Fast(f) => Ok(f.ln_q_current_k()),
            KnDriver::Exact { x, k, .. } => {
                if *k == 0 {
                    return Ok(0.0);
                }
                let conv = crate::cf::convergents(x, *k)?;
                let (_, q) = conv.last().ok_or(Error::InsufficientDepth {
                    available: 0,
                    needed: *k,
                })?;
                Ok(ln_int_f64(q))
            }
        }
    }

    /// Zero-run length right after the current depth.
    pub fn zero_run(&mut self, max_scan: u64) -> Result<u64> {
        match self {
            KnDriver::Fast(f) => f.zero_run_after_current(max_scan),
            KnDriver::Exact { system, x, n, .. } => system.zero_run_after(x, *n, max_scan),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::k_series;
    use crate::experiment::sampling::sample_point;

    fn fast_series(
        system: &BetaSystem,
        x: &ExactRational,
        n: usize,
        margin: f64,
    ) -> (Vec<usize>, bool, u64) {
        let mut eng = FastKn::new(system, x, margin).unwrap();
        let mut ks = Vec::with_capacity(n);
        let mut saturated = false;
        for _ in 0..n {
            let s = eng.step().unwrap();
            saturated |= s.cf_saturated;
            ks.push(s.k);
        }
        (ks, saturated, eng.fallback_count())
    }

    #[test]
    fn matches_reference_engine_base_two() {
        let system = BetaSystem::from_spec("rat:2/1").unwrap();
        for i in 0..5u64 {
            let x = sample_point(101, i, 2048).unwrap();
            let (exact, exact_sat) = k_series(&system, &x, 400).unwrap();
            let (fast, fast_sat, _) = fast_series(&system, &x, 400, MARGIN);
            assert_eq!(exact, fast, "sample {i}");
            assert_eq!(exact_sat, fast_sat, "sample {i}");
        }
    }

    #[test]
    fn matches_reference_engine_base_ten() {
        let system = BetaSystem::from_spec("dec:10").unwrap();
        for i in 0..5u64 {
            let x = sample_point(202, i, 4096).unwrap();
            let (exact, exact_sat) = k_series(&system, &x, 300).unwrap();
            let (fast, fast_sat, _) = fast_series(&system, &x, 300, MARGIN);
            assert_eq!(exact, fast, "sample {i}");
            assert_eq!(exact_sat, fast_sat, "sample {i}");
        }
    }

    #[test]
    fn infinite_margin_forces_every_comparison_exact() {
        // With an infinite margin the filter can never decide, so every
        // comparison takes the exact path — the result must not move.
        let system = BetaSystem::from_spec("rat:2/1").unwrap();
        let x = sample_point(7, 0, 2048).unwrap();
        let (filtered, _, few) = fast_series(&system, &x, 300, MARGIN);
        let (all_exact, _, many) = fast_series(&system, &x, 300, f64::INFINITY);
        assert_eq!(filtered, all_exact);
        assert!(many > few, "margin=inf must route all comparisons exactly");
        assert!(few < 40, "the filter should decide almost everything");
    }

    #[test]
    fn deep_trajectory_matches_reference() {
        let system = BetaSystem::from_spec("rat:2/1").unwrap();
        let x = sample_point(55, 1, 1 << 15).unwrap();
        let (exact, _) = k_series(&system, &x, 3000).unwrap();
        let (fast, _, _) = fast_series(&system, &x, 3000, MARGIN);
        assert_eq!(exact, fast);
    }

    #[test]
    fn saturation_reported_like_reference() {
        // 1/2 = [2]: one quotient, so the scan saturates immediately.
        let system = BetaSystem::from_spec("rat:2/1").unwrap();
        let x = crate::kernel::make_rational(1, 2).unwrap();
        let (exact, exact_sat) = k_series(&system, &x, 12).unwrap();
        let (fast, fast_sat, _) = fast_series(&system, &x, 12, MARGIN);
        assert_eq!(exact, fast);
        assert_eq!(exact_sat, fast_sat);
        assert!(fast_sat);
    }

    #[test]
    fn zero_run_agrees_with_digit_system_scan() {
        let system = BetaSystem::from_spec("rat:2/1").unwrap();
        for i in 0..4u64 {
            let x = sample_point(33, i, 2048).unwrap();
            let mut eng = FastKn::new(&system, &x, MARGIN).unwrap();
            for _ in 0..50 {
                eng.step().unwrap();
            }
            let fast = eng.zero_run_after_current(1000).unwrap();
            let oracle = system.zero_run_after(&x, 50, 1000).unwrap();
            assert_eq!(fast, oracle, "sample {i}");
        }
    }

    #[test]
    fn driver_falls_back_to_reference_for_fractional_base() {
        let system = BetaSystem::from_spec("rat:3/2").unwrap();
        let x = sample_point(5, 0, 1024).unwrap();
        let mut driver = KnDriver::new(&system, &x).unwrap();
        assert!(matches!(driver, KnDriver::Exact { .. }));
        let (exact, _) = k_series(&system, &x, 120).unwrap();
        let mut got = Vec::new();
        for _ in 0..120 {
            got.push(driver.step().unwrap().k);
        }
        assert_eq!(exact, got);
    }

    #[test]
    fn driver_ln_q_consistent_between_paths() {
        let system = BetaSystem::from_spec("rat:2/1").unwrap();
        let x = sample_point(77, 2, 4096).unwrap();
        let mut fast = KnDriver::new(&system, &x).unwrap();
        assert!(matches!(fast, KnDriver::Fast(_)));
        let mut exact = KnDriver::Exact {
            engine: KnEngine::new(&system, &x).unwrap(),
            system: &system,
            x: x.clone(),
            n: 0,
            k: 0,
        };
        for _ in 0..200 {
            fast.step().unwrap();
            exact.step().unwrap();
        }
        let a = fast.ln_q_k().unwrap();
        let b = exact.ln_q_k().unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn top_limb_log2_is_accurate() {
        assert_eq!(log2_int(&Int::from(0)), f64::NEG_INFINITY);
        assert_eq!(log2_int(&Int::from(1)), 0.0);
        assert_eq!(log2_int(&Int::from(1024)), 10.0);
        let big = Int::from(1u8) << 3001u32;
        assert!((log2_int(&big) - 3001.0).abs() < 1e-12);
        let mixed = (Int::from(1u8) << 200u32) + (Int::from(1u8) << 199u32);
        assert!((log2_int(&mixed) - (200.0 + 1.5f64.log2())).abs() < 1e-12);
    }
}
