//! How many continued-fraction digits the base-`beta` digits pin down.
//!
//! For a point `x`, the first `n` base digits confine `x` to the interval
//! `J_n(x)`; the counter computed here is the deepest continued-fraction
//! cylinder of `x`'s own quotients that still contains the whole of `J_n`:
//!
//! ```text
//! k_n(x) = sup { m >= 0 : J_n(x) is a subset of I(a_1, ..., a_m) }
//! ```
//!
//! The inclusion set over `m` is *not* always an initial segment — consecutive
//! quotient cylinders share rational endpoints with opposite closures (a
//! quotient equal to 1 puts the closed corner of `I_m` exactly on the excluded
//! corner of `I_{m-1}`) — so the scan continues past failures until the
//! cylinder is certifiably narrower than `J_n`, after which no deeper
//! inclusion can hold.  Every comparison along the way is exact.
//!
//! The module also certifies the width inequalities that control the counter
//! and produces enclosures of the two growth constants involved: the
//! almost-sure limit of `k_n/n` and the logarithmic growth rate of the
//! convergent denominators.

use crate::beta::BetaSystem;
use crate::cf::QuotientStream;
use crate::kernel::{
    ln2, ln_frac, ln_ratio, pi, ExactRational, FieldElement, FixInterval, RealDescriptor,
};
use crate::{Error, Int, Result};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// Certified enclosures of the constants governing the digit race.
#[derive(Clone, Debug)]
pub struct Constants {
    /// `ln beta`.
    pub log_base: FixInterval,
    /// Almost-sure limit of `k_n / n`: `6 ln2 ln beta / pi^2`.
    pub lochs: FixInterval,
    /// Almost-sure limit of `(ln q_m) / m`: `pi^2 / (12 ln2)`.
    pub levy: FixInterval,
}

/// Compute the constants for a base system.
pub fn constants(system: &BetaSystem) -> Result<Constants> {
    let log_base = match system.field().descriptor() {
        RealDescriptor::Rational(r) => ln_ratio(r)?,
        RealDescriptor::AlgebraicRoot { .. } => {
            let ball = system.field().beta_ball(256)?;
            let lo = ball.lo();
            let hi = ball.hi();
            if !lo.is_positive() {
                return Err(Error::invalid("base enclosure must be positive"));
            }
            let lo_log = ln_ratio(&lo)?;
            let hi_log = ln_ratio(&hi)?;
            FixInterval::new(lo_log.lo().clone(), hi_log.hi().clone())
        }
    };
    let pi_sq = pi().mul(pi());
    let levy = pi_sq.div(&ln2().mul_int(12))?;
    let lochs = ln2().mul(&log_base).mul_int(6).div(&pi_sq)?;
    Ok(Constants { log_base, lochs, levy })
}

/// One cylinder of the point's own quotients: the last two convergents plus
/// the derived endpoints.  `outer = p/q` carries the closure, `inner` is the
/// mediant with the previous convergent.
struct Cell {
    q: Int,
    outer_num: Int,
    outer_den: Int,
    inner_num: Int,
    inner_den: Int,
}

/// Lazily grown convergent data for the point's quotient expansion.
struct CfSide {
    stream: QuotientStream,
    p_prev: Int,
    q_prev: Int,
    p: Int,
    q: Int,
    cells: Vec<Cell>,
    exhausted: bool,
}

impl CfSide {
    fn new(x: &ExactRational) -> Result<CfSide> {
        Ok(CfSide {
            stream: QuotientStream::new(x)?,
            p_prev: Int::one(),
            q_prev: Int::zero(),
            p: Int::zero(),
            q: Int::one(),
            cells: Vec::new(),
            exhausted: false,
        })
    }

    /// Make sure the depth-`m` cell exists; `false` when the expansion is too
    /// short for that.
    fn ensure(&mut self, m: usize) -> bool {
        while self.cells.len() < m {
            let Some(a) = self.stream.next_quotient() else {
                self.exhausted = true;
                return false;
            };
            let p_next = &a * &self.p + &self.p_prev;
            let q_next = &a * &self.q + &self.q_prev;
            self.p_prev = std::mem::replace(&mut self.p, p_next);
            self.q_prev = std::mem::replace(&mut self.q, q_next);
            self.cells.push(Cell {
                q: self.q.clone(),
                outer_num: self.p.clone(),
                outer_den: self.q.clone(),
                inner_num: &self.p + &self.p_prev,
                inner_den: &self.q + &self.q_prev,
            });
        }
        true
    }

    /// `q_m`, with `q_0 = 1`.
    fn q_at(&mut self, m: usize) -> Option<Int> {
        if m == 0 {
            return Some(Int::one());
        }
        if !self.ensure(m) {
            return None;
        }
        Some(self.cells[m - 1].q.clone())
    }

    fn depth_available(&self) -> usize {
        self.cells.len()
    }
}

/// The base-side interval `J_n`, kept in scaled form: `J_n = [v, v + t) / b`
/// where `b = beta^n`, so that all comparisons reduce to integer (or
/// denominator-stable field) products.
enum ScaledOrbit {
    Rat {
        p: Int,
        q: Int,
        /// omega * beta^n = vnum / vden
        vnum: Int,
        /// follower weight * beta^n * vden-scale shares the same denominator
        tnum: Int,
        /// beta^n = bnum / vden
        bnum: Int,
        /// q^n
        vden: Int,
    },
    Alg {
        v: FieldElement,
        t: FieldElement,
        bpow: FieldElement,
        one: FieldElement,
    },
}

impl ScaledOrbit {
    fn new(system: &BetaSystem) -> ScaledOrbit {
        match system.field().descriptor() {
            RealDescriptor::Rational(r) => ScaledOrbit::Rat {
                p: r.numer().clone(),
                q: r.denom().clone(),
                vnum: Int::zero(),
                tnum: Int::one(),
                bnum: Int::one(),
                vden: Int::one(),
            },
            RealDescriptor::AlgebraicRoot { .. } => {
                let f = system.field();
                ScaledOrbit::Alg {
                    v: f.zero(),
                    t: f.one(),
                    bpow: f.one(),
                    one: f.one(),
                }
            }
        }
    }

    /// Absorb the next base digit: `v <- beta v + e`, `t <- min(1, beta t - e)`,
    /// `b <- beta b`.
    fn push_digit(&mut self, e: u64) -> Result<()> {
        let e = Int::from(e);
        match self {
            ScaledOrbit::Rat { p, q, vnum, tnum, bnum, vden } => {
                *vden *= &*q;
                *bnum *= &*p;
                *vnum = &*p * &*vnum + &e * &*vden;
                *tnum = &*p * &*tnum - &e * &*vden;
                debug_assert!(tnum.is_positive(), "digits of the point itself are admissible");
                if &*tnum > &*vden {
                    *tnum = vden.clone();
                }
                Ok(())
            }
            ScaledOrbit::Alg { v, t, bpow, one } => {
                *v = v.mul_base().add_int(&e);
                let next = t.mul_base().sub_int(&e);
                debug_assert!(next.sign()? > 0, "digits of the point itself are admissible");
                *t = match next.cmp_rational(&ExactRational::one())? {
                    Ordering::Greater => one.clone(),
                    _ => next,
                };
                *bpow = bpow.mul_base();
                Ok(())
            }
        }
    }

    /// Compare the lower endpoint `omega = v/b` against `c/d`.
    fn cmp_lo(&self, c: &Int, d: &Int) -> Result<Ordering> {
        match self {
            ScaledOrbit::Rat { vnum, bnum, .. } => {
                Ok(crate::kernel::cmp_products(vnum, d, c, bnum))
            }
            ScaledOrbit::Alg { v, bpow, .. } => {
                let diff = v.scale_int(d).sub(&bpow.scale_int(c));
                Ok(diff.sign()?.cmp(&0))
            }
        }
    }

    /// Compare the upper endpoint `omega + t/b` against `c/d`.
    fn cmp_hi(&self, c: &Int, d: &Int) -> Result<Ordering> {
        match self {
            ScaledOrbit::Rat { vnum, tnum, bnum, .. } => {
                let hi = vnum + tnum;
                Ok(crate::kernel::cmp_products(&hi, d, c, bnum))
            }
            ScaledOrbit::Alg { v, t, bpow, .. } => {
                let hi = v.add(t);
                let diff = hi.scale_int(d).sub(&bpow.scale_int(c));
                Ok(diff.sign()?.cmp(&0))
            }
        }
    }

    /// Compare the width `t/b` of `J_n` against `1/denom`: returns the
    /// ordering of `t * denom` versus `beta^n`.
    fn cmp_width_against_inverse(&self, denom: &Int) -> Result<Ordering> {
        match self {
            ScaledOrbit::Rat { tnum, bnum, .. } => {
                Ok(crate::kernel::cmp_products(tnum, denom, &Int::one(), bnum))
            }
            ScaledOrbit::Alg { t, bpow, .. } => {
                let diff = t.scale_int(denom).sub(bpow);
                Ok(diff.sign()?.cmp(&0))
            }
        }
    }

    /// Certified enclosure of `ln |J_n| = ln t - n ln beta`, via `ln(t/b)`.
    fn log_width(&self) -> Result<FixInterval> {
        match self {
            ScaledOrbit::Rat { tnum, bnum, .. } => ln_frac(tnum, bnum),
            ScaledOrbit::Alg { t, bpow, .. } => {
                for bits in [256u64, 1024, 4096] {
                    let tb = t.to_ball(bits)?;
                    let bb = bpow.to_ball(bits)?;
                    if tb.lo().is_positive() && bb.lo().is_positive() {
                        let lo = ln_ratio(&tb.lo())?.sub(&ln_ratio(&bb.hi())?);
                        let hi = ln_ratio(&tb.hi())?.sub(&ln_ratio(&bb.lo())?);
                        return Ok(FixInterval::new(lo.lo().clone(), hi.hi().clone()));
                    }
                }
                Err(Error::PrecisionExhausted { cap_bits: 4096 })
            }
        }
    }
}

/// Incremental counter: one step per base digit, exact inclusion scans
/// against the point's quotient cylinders.
pub struct KnEngine {
    orbit: ScaledOrbit,
    digits: crate::beta::DigitStream,
    cf: CfSide,
    n: usize,
    k: usize,
    /// The quotient expansion ran out while the scan still wanted deeper
    /// cells; `k` values from then on are capped by the available depth.
    saturated: bool,
}

/// The counter value after one more base digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KnStep {
    pub n: usize,
    pub k: usize,
    /// True when the quotient expansion of `x` ended before the scan did;
    /// the reported `k` is then only a lower bound for an irrational
    /// perturbation of the same prefix.
    pub cf_saturated: bool,
}

impl KnEngine {
    pub fn new(system: &BetaSystem, x: &ExactRational) -> Result<KnEngine> {
        Ok(KnEngine {
            orbit: ScaledOrbit::new(system),
            digits: system.digit_stream(x)?,
            cf: CfSide::new(x)?,
            n: 0,
            k: 0,
            saturated: false,
        })
    }

    /// `J_n` is a subset of the depth-`m` cell (cell must exist).
    fn included(&self, m: usize) -> Result<bool> {
        let cell = &self.cf.cells[m - 1];
        // Lower endpoint: closed cell ends admit equality, open ones do not.
        let (lo_num, lo_den, lo_closed, hi_num, hi_den) = if m % 2 == 0 {
            (&cell.outer_num, &cell.outer_den, true, &cell.inner_num, &cell.inner_den)
        } else {
            (&cell.inner_num, &cell.inner_den, false, &cell.outer_num, &cell.outer_den)
        };
        let lo_cmp = self.orbit.cmp_lo(lo_num, lo_den)?;
        let lo_ok = match lo_cmp {
            Ordering::Greater => true,
            Ordering::Equal => lo_closed,
            Ordering::Less => false,
        };
        if !lo_ok {
            return Ok(false);
        }
        // Upper endpoint of J is excluded, so <= suffices for either closure.
        Ok(self.orbit.cmp_hi(hi_num, hi_den)? != Ordering::Greater)
    }

    /// Advance by one base digit and return the new counter value.
    pub fn step(&mut self) -> Result<KnStep> {
        let e = self.digits.next_digit()?;
        self.orbit.push_digit(e)?;
        self.n += 1;
        // Scan m = k+1, k+2, ... until the cell is certifiably narrower than
        // J_n; inclusions found anywhere in the scan raise k.
        let mut m = self.k + 1;
        loop {
            if !self.cf.ensure(m) {
                self.saturated = true;
                break;
            }
            let cell = &self.cf.cells[m - 1];
            // |I_m| = 1/(q_m (q_m + q_{m-1})) = 1/(outer_den * inner_den).
            let inv_width = &cell.outer_den * &cell.inner_den;
            if self.orbit.cmp_width_against_inverse(&inv_width)? == Ordering::Greater {
                // J_n is wider than the cell: no inclusion here or deeper.
                break;
            }
            if self.included(m)? {
                self.k = m;
            }
            m += 1;
        }
        Ok(KnStep { n: self.n, k: self.k, cf_saturated: self.saturated })
    }

    pub fn current_k(&self) -> usize {
        self.k
    }

    pub fn cf_depth_used(&self) -> usize {
        self.cf.depth_available()
    }

    /// Certified enclosure of `ln |J_n|` at the current step.
    pub fn log_width(&self) -> Result<FixInterval> {
        self.orbit.log_width()
    }
}

/// The counter along `n = 1..=n_max`, plus whether the quotient expansion
/// saturated anywhere along the way.
pub fn k_series(system: &BetaSystem, x: &ExactRational, n_max: usize) -> Result<(Vec<usize>, bool)> {
    let mut engine = KnEngine::new(system, x)?;
    let mut out = Vec::with_capacity(n_max);
    let mut saturated = false;
    for _ in 0..n_max {
        let step = engine.step()?;
        saturated |= step.cf_saturated;
        out.push(step.k);
    }
    Ok((out, saturated))
}

/// Exact verification of the width inequalities at one depth.
#[derive(Clone, Debug)]
pub struct BridgeReport {
    pub n: usize,
    pub k: usize,
    pub cf_saturated: bool,
    /// `|J_n| <= 1/q_k^2`, certified.
    pub upper_ok: bool,
    /// `1/(6 q_{k+3}^2) <= |J_n|`, certified.
    pub lower_ok: bool,
    /// Enclosure midpoint of `ln |J_n|`.
    pub log_width: f64,
    /// `k_n / n`.
    pub ratio: f64,
}

/// Run the counter to depth `n` and certify the sandwich
/// `1/(6 q_{k+3}^2) <= |J_n| <= 1/q_k^2`.  Needs quotient depth `k+3`;
/// a shorter expansion yields [`Error::InsufficientDepth`].
pub fn bridge_check(system: &BetaSystem, x: &ExactRational, n: usize) -> Result<BridgeReport> {
    if n == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    let mut engine = KnEngine::new(system, x)?;
    let mut saturated = false;
    for _ in 0..n {
        saturated |= engine.step()?.cf_saturated;
    }
    let k = engine.current_k();
    let q_k = engine.cf.q_at(k).expect("k is a witnessed inclusion depth");
    let q_k3 = engine.cf.q_at(k + 3).ok_or(Error::InsufficientDepth {
        available: engine.cf.depth_available(),
        needed: k + 3,
    })?;
    // |J_n| <= 1/q_k^2
    let upper_ok =
        engine.orbit.cmp_width_against_inverse(&(&q_k * &q_k))? != Ordering::Greater;
    // 1/(6 q_{k+3}^2) <= |J_n|
    let lower_ok = engine
        .orbit
        .cmp_width_against_inverse(&(Int::from(6) * &q_k3 * &q_k3))?
        != Ordering::Less;
    let log_width = engine.log_width()?.to_f64();
    Ok(BridgeReport {
        n,
        k,
        cf_saturated: saturated,
        upper_ok,
        lower_ok,
        log_width,
        ratio: k as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::BetaSystem;
    use crate::cf::{cf_cylinder, quotients};
    use crate::kernel::make_rational;

    fn rat(p: i64, q: i64) -> ExactRational {
        make_rational(p, q).unwrap()
    }

    #[test]
    fn constants_anchors() {
        let ten = BetaSystem::from_spec("dec:10").unwrap();
        let c = constants(&ten).unwrap();
        assert!((c.lochs.to_f64() - 0.970_270_114).abs() < 1e-8);
        assert!((c.levy.to_f64() - 1.186_569_110_4).abs() < 1e-9);
        assert!(c.lochs.width_f64() < 1e-40);
        let two = BetaSystem::from_spec("rat:2/1").unwrap();
        let c2 = constants(&two).unwrap();
        assert!((c2.lochs.to_f64() - 0.292_080_408_3).abs() < 1e-9);
        // Golden base: enclosure from the algebraic branch, still tight.
        let g = BetaSystem::from_spec("alg:-1,-1,1@[1,2]").unwrap();
        let cg = constants(&g).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((cg.log_base.to_f64() - phi.ln()).abs() < 1e-14);
        assert!(cg.log_base.width_f64() < 1e-50);
        // Internal identity: lochs * levy = ln(beta) / 2.
        let prod = cg.lochs.mul(&cg.levy);
        let half_log = cg.log_base.mul(&FixInterval::from_frac(&Int::one(), &Int::from(2)));
        assert!((prod.to_f64() - half_log.to_f64()).abs() < 1e-14);
    }

    #[test]
    fn hand_derived_counter_sequence() {
        // Base 2, x = 7/17 = 0.01101001 0110... (binary period 8), quotients
        // (2, 2, 3).  Worked by hand: J_3 = [3/8, 1/2) fits (1/3, 1/2];
        // J_6 = [13/32, 27/64) fits [2/5, 3/7); nothing ever fits the last
        // cylinder (9/22, 7/17] because every J_n spills past x = 7/17.
        let two = BetaSystem::from_spec("rat:2/1").unwrap();
        let (ks, saturated) = k_series(&two, &rat(7, 17), 8).unwrap();
        assert_eq!(ks, vec![0, 0, 1, 1, 1, 2, 2, 2]);
        assert!(!saturated);
        // Depth 9 onward wants the (missing) 4th quotient: saturation.
        let (ks, saturated) = k_series(&two, &rat(7, 17), 12).unwrap();
        assert_eq!(ks[8..], [2, 2, 2, 2]);
        assert!(saturated);
    }

    #[test]
    fn golden_base_rational_point_sticks_at_zero() {
        // x = 1/2 in the golden base: J_n always spills past 1/2, the single
        // quotient cylinder of x is (1/3, 1/2], so the counter never leaves 0.
        let g = BetaSystem::from_spec("alg:-1,-1,1@[1,2]").unwrap();
        let (ks, saturated) = k_series(&g, &rat(1, 2), 10).unwrap();
        assert_eq!(ks, vec![0; 10]);
        assert!(saturated);
    }

    #[test]
    fn counter_matches_brute_force_inclusion() {
        // Independent oracle: build J_n via the digit-word cylinder and the
        // quotient cylinders via the convergent formulas, then take the
        // deepest inclusion among all cells wide enough to matter.
        for spec in ["rat:2/1", "dec:10", "rat:3/2", "alg:-1,-1,1@[1,2]", "alg:-2,0,1@[1,2]"] {
            let sys = BetaSystem::from_spec(spec).unwrap();
            for x in [rat(7, 17), rat(355, 452), rat(137, 4096), rat(89, 144)] {
                let n_max = 10;
                let digits = sys.digits(&x, n_max).unwrap();
                let (cf_digits, _) = quotients(&x, 64).unwrap();
                let (ks, _) = k_series(&sys, &x, n_max).unwrap();
                for n in 1..=n_max {
                    let j = sys.cylinder(&digits[..n]).unwrap();
                    let mut best = 0usize;
                    for m in 1..=cf_digits.len() {
                        let cell = cf_cylinder(&cf_digits[..m]).unwrap();
                        if j.subset_of(&cell).unwrap() {
                            best = m;
                        }
                    }
                    assert_eq!(
                        ks[n - 1],
                        best,
                        "{spec} x={x} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn width_sandwich_holds() {
        // 1/(6 q_{k+3}^2) <= |J_n| <= 1/q_k^2 for a point with a deep
        // quotient expansion.
        let x = make_rational(Int::from(48_611_766_702_991_209u64), Int::one() << 57).unwrap();
        for spec in ["rat:2/1", "dec:10", "alg:-1,-1,1@[1,2]"] {
            let sys = BetaSystem::from_spec(spec).unwrap();
            for n in [1usize, 2, 3, 5, 8, 12] {
                let report = bridge_check(&sys, &x, n).unwrap();
                assert!(report.upper_ok, "{spec} n={n}");
                assert!(report.lower_ok, "{spec} n={n}");
                assert!(!report.cf_saturated, "{spec} n={n}");
            }
        }
    }

    #[test]
    fn counter_is_monotone_in_depth() {
        // A deep point: 3^126 / 2^200 has a 127-quotient expansion, far more
        // than 30 decimal digits can pin down.
        let ten = BetaSystem::from_spec("dec:10").unwrap();
        let x = make_rational(Int::from(3).pow(126), Int::one() << 200).unwrap();
        let (ks, saturated) = k_series(&ten, &x, 30).unwrap();
        assert!(!saturated);
        assert!(ks.windows(2).all(|w| w[0] <= w[1]));
        // Roughly one quotient per decimal digit at this scale.
        assert!(*ks.last().unwrap() >= 15);
    }

    #[test]
    fn insufficient_depth_is_reported() {
        // x = 1/2 has a single quotient; the sandwich needs depth k+3.
        let two = BetaSystem::from_spec("rat:2/1").unwrap();
        assert!(matches!(
            bridge_check(&two, &rat(1, 2), 4),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn log_width_matches_f64_expectation() {
        // Base 2: |J_n| = 2^{-n} exactly, so ln|J_n| = -n ln 2.
        let two = BetaSystem::from_spec("rat:2/1").unwrap();
        let mut engine = KnEngine::new(&two, &rat(7, 17)).unwrap();
        for n in 1..=20usize {
            engine.step().unwrap();
            let lw = engine.log_width().unwrap();
            let expect = -(n as f64) * std::f64::consts::LN_2;
            assert!((lw.to_f64() - expect).abs() < 1e-12, "n={n}");
        }
        // Golden base: ln|J_n| within [-(n+run+1), -n] * ln(phi).
        let g = BetaSystem::from_spec("alg:-1,-1,1@[1,2]").unwrap();
        let mut engine = KnEngine::new(&g, &rat(137, 4096)).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for n in 1..=15usize {
            engine.step().unwrap();
            let lw = engine.log_width().unwrap().to_f64();
            assert!(lw <= -(n as f64) * phi.ln() + 1e-9, "n={n}");
        }
    }
}
