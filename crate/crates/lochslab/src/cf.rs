//! Regular continued fractions of points in `[0, 1)`.
//!
//! A point `x` is unwound by the map `x -> 1/x - floor(1/x)`; the integer
//! parts `a_1, a_2, ...` are its partial quotients and the truncations
//! `p_m/q_m = [0; a_1, ..., a_m]` its convergents.  All of it is integer
//! arithmetic here: quotients come from exact divisions, convergents from the
//! standard two-term recursion, and the logarithms that appear in growth
//! statements are certified enclosures from the kernel.

use crate::kernel::{
    ln2, ln_frac, ln_int, make_rational, ExactRational, FixInterval, Interval, Value,
};
use crate::{Error, Int, Result};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Streaming partial-quotient generator for a rational point.
///
/// Rational points have finite expansions; the stream yields `None` once the
/// remainder hits zero.  The terminal convention is the canonical one: the
/// last quotient emitted is >= 2 whenever the expansion has length >= 2.
pub struct QuotientStream {
    num: Int,
    den: Int,
    emitted: usize,
}

impl QuotientStream {
    pub fn new(x: &ExactRational) -> Result<QuotientStream> {
        if x.is_negative() || x >= &ExactRational::one() {
            return Err(Error::invalid("continued-fraction input must lie in [0, 1)"));
        }
        Ok(QuotientStream {
            num: x.numer().clone(),
            den: x.denom().clone(),
            emitted: 0,
        })
    }

    /// Current remainder `T^m x` where `m` quotients have been emitted.
    pub fn remainder(&self) -> ExactRational {
        make_rational(self.num.clone(), self.den.clone()).expect("denominator stays positive")
    }

    /// Borrowed numerator/denominator of the current remainder, for callers
    /// that only need an approximation and must not clone large integers.
    pub(crate) fn remainder_refs(&self) -> (&Int, &Int) {
        (&self.num, &self.den)
    }

    pub fn is_exhausted(&self) -> bool {
        self.num.is_zero()
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// Next partial quotient, or `None` once the expansion has ended.
    pub fn next_quotient(&mut self) -> Option<Int> {
        if self.num.is_zero() {
            return None;
        }
        // 1/x = den/num = a + r/num with 0 <= r < num.
        let (a, r) = self.den.div_rem(&self.num);
        self.den = std::mem::replace(&mut self.num, r);
        self.emitted += 1;
        Some(a)
    }
}

/// First `max` partial quotients of `x` and whether the expansion ended
/// within that many.
pub fn quotients(x: &ExactRational, max: usize) -> Result<(Vec<Int>, bool)> {
    let mut stream = QuotientStream::new(x)?;
    let mut out = Vec::new();
    while out.len() < max {
        match stream.next_quotient() {
            Some(a) => out.push(a),
            None => return Ok((out, true)),
        }
    }
    Ok((out, stream.is_exhausted()))
}

/// Convergent state `p_m/q_m` maintained by the recursion
/// `p_m = a_m p_{m-1} + p_{m-2}`, `q_m = a_m q_{m-1} + q_{m-2}` from the
/// seeds `p_0/q_0 = 0/1` and `p_{-1}/q_{-1} = 1/0`.
#[derive(Clone, Debug)]
pub struct ConvergentSeq {
    p_prev: Int,
    q_prev: Int,
    p: Int,
    q: Int,
    depth: usize,
}

impl ConvergentSeq {
    pub fn new() -> ConvergentSeq {
        ConvergentSeq {
            p_prev: Int::one(),
            q_prev: Int::zero(),
            p: Int::zero(),
            q: Int::one(),
            depth: 0,
        }
    }

    /// Consume the next partial quotient (must be >= 1).
    pub fn push(&mut self, a: &Int) -> Result<()> {
        if !a.is_positive() {
            return Err(Error::NonpositiveQuotient { index: self.depth });
        }
        let p_next = a * &self.p + &self.p_prev;
        let q_next = a * &self.q + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p, p_next);
        self.q_prev = std::mem::replace(&mut self.q, q_next);
        self.depth += 1;
        Ok(())
    }

    /// Number of quotients consumed.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn p(&self) -> &Int {
        &self.p
    }

    pub fn q(&self) -> &Int {
        &self.q
    }

    pub fn p_prev(&self) -> &Int {
        &self.p_prev
    }

    pub fn q_prev(&self) -> &Int {
        &self.q_prev
    }

    pub fn value(&self) -> ExactRational {
        make_rational(self.p.clone(), self.q.clone()).expect("q_m >= 1 after the seeds")
    }

    /// `p_{m-1} q_m - p_m q_{m-1}`, which the recursion keeps at `(-1)^m`.
    pub fn determinant(&self) -> Int {
        &self.p_prev * &self.q - &self.p * &self.q_prev
    }
}

impl Default for ConvergentSeq {
    fn default() -> Self {
        ConvergentSeq::new()
    }
}

/// The first `max` convergents `(p_m, q_m)` of `x`, for `m = 1, 2, ...`;
/// stops early when the expansion ends.
pub fn convergents(x: &ExactRational, max: usize) -> Result<Vec<(Int, Int)>> {
    let mut stream = QuotientStream::new(x)?;
    let mut seq = ConvergentSeq::new();
    let mut out = Vec::new();
    while out.len() < max {
        match stream.next_quotient() {
            Some(a) => {
                seq.push(&a)?;
                out.push((seq.p().clone(), seq.q().clone()));
            }
            None => break,
        }
    }
    Ok(out)
}

/// The interval of points whose expansion starts with the given partial
/// quotients: with `p/q` the last convergent and `p'/q'` the one before,
/// the endpoints are `p/q` and `(p+p')/(q+q')`, ordered and closed according
/// to the parity of the depth (the convergents alternate sides of `x`).
/// No quotients at all gives `[0, 1)`.
///
/// With these closures the cells of a fixed depth tile without overlap, and
/// every point lies inside the cell of its own quotient prefix.  Cells of
/// *different* depths share rational endpoints, so they are not literally
/// nested as sets; subset queries between depths must expect that corner.
pub fn cf_cylinder(digits: &[Int]) -> Result<Interval> {
    if digits.is_empty() {
        return Ok(Interval::half_open(
            Value::Rat(ExactRational::zero()),
            Value::Rat(ExactRational::one()),
        ));
    }
    let mut seq = ConvergentSeq::new();
    for a in digits {
        seq.push(a)?;
    }
    let outer = make_rational(seq.p().clone(), seq.q().clone()).unwrap();
    let inner = make_rational(seq.p() + seq.p_prev(), seq.q() + seq.q_prev()).unwrap();
    if digits.len() % 2 == 0 {
        // Even depth: the convergent sits at or below every point. [p/q, ...)
        Ok(Interval {
            lo: Value::Rat(outer),
            hi: Value::Rat(inner),
            lo_closed: true,
            hi_closed: false,
        })
    } else {
        // Odd depth: the convergent sits at or above every point. (..., p/q]
        Ok(Interval {
            lo: Value::Rat(inner),
            hi: Value::Rat(outer),
            lo_closed: false,
            hi_closed: true,
        })
    }
}

/// Certified enclosure of `sum_{i<n} ln(T^i x)` along the quotient orbit.
/// Errors with [`Error::ExpansionTerminated`] when the expansion ends before
/// `n` remainders exist (the logarithm of 0 being off the table).
pub fn orbit_log_sum(x: &ExactRational, n: usize) -> Result<FixInterval> {
    let mut stream = QuotientStream::new(x)?;
    let mut sum = FixInterval::zero();
    for i in 0..n {
        if stream.is_exhausted() {
            return Err(Error::ExpansionTerminated { depth: i, requested: n });
        }
        let r = stream.remainder();
        sum = sum.add(&ln_frac(r.numer(), r.denom())?);
        stream.next_quotient();
    }
    Ok(sum)
}

/// Certified enclosure of `ln q_m` for a convergent denominator.
pub fn log_denominator(q: &Int) -> Result<FixInterval> {
    ln_int(q)
}

/// The Gauss measure of an interval with rational endpoints in `[0, 1]`:
/// `(1/ln 2) * ln((1+b)/(1+a))`.  Endpoint closures do not matter.
pub fn gauss_measure(interval: &Interval) -> Result<FixInterval> {
    let a = interval
        .lo
        .as_rational()
        .ok_or_else(|| Error::invalid("gauss measure needs rational endpoints"))?;
    let b = interval
        .hi
        .as_rational()
        .ok_or_else(|| Error::invalid("gauss measure needs rational endpoints"))?;
    if a.is_negative() || b > ExactRational::one() || a > b {
        return Err(Error::invalid("gauss measure needs 0 <= a <= b <= 1"));
    }
    let one = ExactRational::one();
    let num = &one + &b;
    let den = &one + &a;
    let log = ln_frac(&(num.numer() * den.denom()), &(num.denom() * den.numer()))?;
    log.div(ln2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::cmp::Ordering;

    fn rat(p: i64, q: i64) -> ExactRational {
        make_rational(p, q).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&a| Int::from(a)).collect()
    }

    #[test]
    fn quotients_of_simple_rationals() {
        assert_eq!(quotients(&rat(7, 17), 10).unwrap(), (ints(&[2, 2, 3]), true));
        assert_eq!(quotients(&rat(1, 2), 10).unwrap(), (ints(&[2]), true));
        assert_eq!(quotients(&rat(0, 1), 10).unwrap(), (ints(&[]), true));
        assert_eq!(quotients(&rat(29, 70), 3).unwrap(), (ints(&[2, 2, 2]), false));
        assert!(quotients(&rat(3, 2), 5).is_err());
        assert!(quotients(&rat(-1, 3), 5).is_err());
    }

    #[test]
    fn quotients_rebuild_the_input() {
        // Folding the quotients back up recovers x exactly.
        for x in [rat(7, 17), rat(29, 70), rat(355, 452), rat(1, 97)] {
            let (q, done) = quotients(&x, 100).unwrap();
            assert!(done);
            let mut v = ExactRational::zero();
            for a in q.iter().rev() {
                v = ExactRational::one()
                    / (ExactRational::from_integer(a.clone()) + v);
            }
            assert_eq!(v, x);
        }
    }

    #[test]
    fn canonical_terminal_quotient() {
        // Euclid never ends a length >= 2 expansion with quotient 1.
        for p in 1..60i64 {
            for q in (p + 1)..=60 {
                let (digits, done) = quotients(&rat(p, q), 100).unwrap();
                assert!(done);
                if digits.len() >= 2 {
                    assert!(
                        digits.last().unwrap() >= &Int::from(2),
                        "{p}/{q} -> {digits:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn convergent_denominators_of_29_over_70() {
        let c = convergents(&rat(29, 70), 10).unwrap();
        let qs: Vec<Int> = c.iter().map(|(_, q)| q.clone()).collect();
        assert_eq!(qs, ints(&[2, 5, 12, 29, 70]));
        let ps: Vec<Int> = c.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(ps, ints(&[1, 2, 5, 12, 29]));
        assert_eq!(c.last().unwrap(), &(Int::from(29), Int::from(70)));
    }

    #[test]
    fn determinant_identity() {
        let mut seq = ConvergentSeq::new();
        let mut stream = QuotientStream::new(&rat(355, 452)).unwrap();
        while let Some(a) = stream.next_quotient() {
            seq.push(&a).unwrap();
            let expect = if seq.depth() % 2 == 0 { Int::one() } else { -Int::one() };
            assert_eq!(seq.determinant(), expect);
        }
        assert!(seq.push(&Int::zero()).is_err());
    }

    #[test]
    fn approximation_chain() {
        // 1/(2 q_{m+1}^2) <= 1/(2 q_m q_{m+1}) <= |x - p_m/q_m|
        //                 <= 1/(q_m q_{m+1}) <= 1/q_m^2, all exact.
        for x in [rat(29, 70), rat(355, 452), rat(123456, 999999), rat(1, 97)] {
            let c = convergents(&x, 100).unwrap();
            for m in 0..c.len().saturating_sub(1) {
                let (p_m, q_m) = &c[m];
                let (_, q_next) = &c[m + 1];
                let err = (&x - make_rational(p_m.clone(), q_m.clone()).unwrap()).abs();
                let half_next_sq = make_rational(1, 2).unwrap()
                    / ExactRational::from_integer(q_next * q_next);
                let half_cross = make_rational(1, 2).unwrap()
                    / ExactRational::from_integer(q_m * q_next);
                let cross = ExactRational::one()
                    / ExactRational::from_integer(q_m * q_next);
                let sq = ExactRational::one()
                    / ExactRational::from_integer(q_m * q_m);
                assert!(half_next_sq <= half_cross, "x={x} m={m}");
                assert!(half_cross <= err, "x={x} m={m}");
                assert!(err <= cross, "x={x} m={m}");
                assert!(cross <= sq, "x={x} m={m}");
            }
        }
    }

    #[test]
    fn denominator_growth() {
        // q_n^2 >= 2^{n-k-1} q_k^2 for all k < n (denominators at least
        // double every two steps).
        for x in [rat(29, 70), rat(355, 452), rat(977, 1597)] {
            let c = convergents(&x, 100).unwrap();
            for n in 1..c.len() {
                for k in 0..n {
                    let lhs = &c[n].1 * &c[n].1;
                    let rhs = (&c[k].1 * &c[k].1) << (n - k - 1);
                    assert!(lhs >= rhs, "x={x} n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn cylinder_anchors() {
        let full = cf_cylinder(&[]).unwrap();
        assert!(full.contains(&Value::Rat(rat(0, 1))).unwrap());
        assert!(full.contains(&Value::Rat(rat(99, 100))).unwrap());
        assert!(!full.contains(&Value::Rat(rat(1, 1))).unwrap());

        // Depth 2: [2/5, 3/7), left end closed.
        let c22 = cf_cylinder(&ints(&[2, 2])).unwrap();
        assert_eq!(c22.lo.as_rational().unwrap(), rat(2, 5));
        assert_eq!(c22.hi.as_rational().unwrap(), rat(3, 7));
        assert!(c22.lo_closed && !c22.hi_closed);

        // Depth 3: (7/17, 5/12], right end closed.
        let c222 = cf_cylinder(&ints(&[2, 2, 2])).unwrap();
        assert_eq!(c222.lo.as_rational().unwrap(), rat(7, 17));
        assert_eq!(c222.hi.as_rational().unwrap(), rat(5, 12));
        assert!(!c222.lo_closed && c222.hi_closed);

        // Depth 1: (1/3, 1/2].
        let c2 = cf_cylinder(&ints(&[2])).unwrap();
        assert_eq!(c2.lo.as_rational().unwrap(), rat(1, 3));
        assert_eq!(c2.hi.as_rational().unwrap(), rat(1, 2));
        assert!(!c2.lo_closed && c2.hi_closed);

        assert!(cf_cylinder(&ints(&[2, 0, 1])).is_err());
    }

    #[test]
    fn cylinders_contain_exactly_matching_points() {
        // Endpoint membership honors the closures: 1/2 = [2] belongs to the
        // cylinder of (2), 1/3 = [3] does not.
        let c2 = cf_cylinder(&ints(&[2])).unwrap();
        assert!(c2.contains(&Value::Rat(rat(1, 2))).unwrap());
        assert!(!c2.contains(&Value::Rat(rat(1, 3))).unwrap());
        // Every point lies in the cylinder of its own quotient prefix.
        for x in [rat(7, 17), rat(29, 70), rat(355, 452), rat(123456, 999999)] {
            let (digits, _) = quotients(&x, 6).unwrap();
            for m in 1..=digits.len() {
                let c = cf_cylinder(&digits[..m]).unwrap();
                assert!(c.contains(&Value::Rat(x.clone())).unwrap(), "x={x} m={m}");
            }
        }
        // Same-depth cells tile: (2,2) and (2,3) meet at 3/7 with
        // complementary closures, leaving no gap and no overlap.
        let left = cf_cylinder(&ints(&[2, 2])).unwrap();
        let right = cf_cylinder(&ints(&[2, 3])).unwrap();
        assert_eq!(right.lo.as_rational().unwrap(), rat(3, 7));
        assert_eq!(right.hi.as_rational().unwrap(), rat(4, 9));
        assert!(!left.hi_closed && right.lo_closed);
        assert!(!left.contains(&Value::Rat(rat(3, 7))).unwrap());
        assert!(right.contains(&Value::Rat(rat(3, 7))).unwrap());
        // Depths interleave at rational endpoints rather than nesting:
        // 1/2 has quotient word (2), yet sits in the depth-2 cell of (1,1).
        let c11 = cf_cylinder(&ints(&[1, 1])).unwrap();
        let c1 = cf_cylinder(&ints(&[1])).unwrap();
        assert!(c11.contains(&Value::Rat(rat(1, 2))).unwrap());
        assert!(!c1.contains(&Value::Rat(rat(1, 2))).unwrap());
        assert!(!c11.subset_of(&c1).unwrap());
    }

    #[test]
    fn orbit_log_sum_tracks_denominators() {
        // |ln q_m + sum_{i<m} ln(T^i x)| < ln 2: the Birkhoff sum of ln x
        // along the orbit mirrors the convergent denominator growth.
        for x in [rat(29, 70), rat(355, 452), rat(123456789, 987654321)] {
            let c = convergents(&x, 100).unwrap();
            for m in 1..c.len() {
                let sum = orbit_log_sum(&x, m).unwrap();
                let combined = sum.add(&log_denominator(&c[m - 1].1).unwrap()).abs();
                assert_eq!(
                    combined.try_cmp(ln2()),
                    Some(Ordering::Less),
                    "x={x} m={m}"
                );
            }
        }
    }

    #[test]
    fn orbit_log_sum_needs_enough_depth() {
        assert!(matches!(
            orbit_log_sum(&rat(1, 2), 2),
            Err(Error::ExpansionTerminated { depth: 1, requested: 2 })
        ));
    }

    #[test]
    fn gauss_measure_basics() {
        let full = cf_cylinder(&[]).unwrap();
        let total = gauss_measure(&full).unwrap();
        assert!((total.to_f64() - 1.0).abs() < 1e-40);
        // [0, 1/2]: log2(3/2) = log2(3) - 1.
        let half = Interval::half_open(
            Value::Rat(rat(0, 1)),
            Value::Rat(rat(1, 2)),
        );
        let m = gauss_measure(&half).unwrap();
        assert!((m.to_f64() - (3f64.log2() - 1.0)).abs() < 1e-15);
        // Complementary halves add to 1 exactly (up to enclosure width).
        let upper = Interval::half_open(
            Value::Rat(rat(1, 2)),
            Value::Rat(rat(1, 1)),
        );
        let s = m.add(&gauss_measure(&upper).unwrap());
        assert!((s.to_f64() - 1.0).abs() < 1e-40);
        assert!(s.width_f64() < 1e-40);
    }

    #[test]
    fn gauss_measure_of_quotient_cells_sums_to_one() {
        // The cells {a_1 = a} for a = 1..N leave exactly the measure of
        // (0, 1/(N+1)) uncovered.
        let mut acc = FixInterval::zero();
        for a in 1..=50i64 {
            acc = acc.add(&gauss_measure(&cf_cylinder(&ints(&[a])).unwrap()).unwrap());
        }
        let tail = gauss_measure(&Interval::half_open(
            Value::Rat(rat(0, 1)),
            Value::Rat(rat(1, 51)),
        ))
        .unwrap();
        let total = acc.add(&tail);
        assert!((total.to_f64() - 1.0).abs() < 1e-38);
    }

    proptest! {
        #[test]
        fn determinant_and_chain_hold_on_random_points(p in 1u64..100_000, q in 2u64..100_000) {
            prop_assume!(p < q);
            let x = make_rational(Int::from(p), Int::from(q)).unwrap();
            let c = convergents(&x, 64).unwrap();
            // Last convergent equals x exactly.
            let (lp, lq) = c.last().unwrap();
            prop_assert_eq!(make_rational(lp.clone(), lq.clone()).unwrap(), x.clone());
            // Convergents alternate around x: odd depth above, even below.
            for m in 0..c.len().saturating_sub(1) {
                let v = make_rational(c[m].0.clone(), c[m].1.clone()).unwrap();
                if m % 2 == 0 {
                    prop_assert!(v > x);
                } else {
                    prop_assert!(v < x);
                }
            }
        }

        #[test]
        fn cylinder_depth_matches_quotient_prefix(p in 1u64..50_000, q in 2u64..50_000, m in 1usize..6) {
            prop_assume!(p < q);
            let x = make_rational(Int::from(p), Int::from(q)).unwrap();
            let (digits, _) = quotients(&x, m).unwrap();
            prop_assume!(!digits.is_empty());
            let take = digits.len().min(m);
            let c = cf_cylinder(&digits[..take]).unwrap();
            prop_assert!(c.contains(&Value::Rat(x)).unwrap());
        }
    }
}
