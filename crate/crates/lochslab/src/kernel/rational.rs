//! Exact rational numbers and certified fast comparisons.
//!
//! `ExactRational` is `num_rational::Ratio<BigInt>`: always reduced, always a
//! positive denominator.  On top of it this module provides comparison helpers
//! that look only at the top bits of the operands when that is provably enough
//! and fall back to full-width arithmetic otherwise.  The fast paths matter:
//! the digit-matching loops compare products of integers with hundreds of
//! thousands of bits millions of times.

use crate::{Error, Int, Result};
use num_bigint::{BigInt, Sign};
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// Arbitrary-precision rational in lowest terms with positive denominator.
pub type ExactRational = Ratio<BigInt>;

/// Build `num/den` in canonical form.  Zero denominators are an input error,
/// not a panic.
pub fn make_rational(num: impl Into<Int>, den: impl Into<Int>) -> Result<ExactRational> {
    let num = num.into();
    let den = den.into();
    if den.is_zero() {
        return Err(Error::invalid("rational with zero denominator"));
    }
    Ok(Ratio::new(num, den))
}

/// Compare `a*b` against `c*d` for non-negative integers without forming the
/// full products unless forced to.
///
/// The certificate: a 64-bit truncation `t = floor(x / 2^s)` of a positive `x`
/// gives `t*2^s <= x < (t+1)*2^s`.  Multiplying per-factor brackets gives
/// product brackets `[lo*2^e, hi*2^e]`; when the two brackets are disjoint the
/// order is proved, otherwise the full products are compared exactly.
pub fn cmp_products(a: &Int, b: &Int, c: &Int, d: &Int) -> Ordering {
    debug_assert!(!a.is_negative() && !b.is_negative() && !c.is_negative() && !d.is_negative());
    let zero_left = a.is_zero() || b.is_zero();
    let zero_right = c.is_zero() || d.is_zero();
    match (zero_left, zero_right) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        (false, false) => {}
    }

    // Bit-length prefilter: bitlen(x*y) is bitlen(x)+bitlen(y) or one less.
    let ll = a.bits() + b.bits();
    let lr = c.bits() + d.bits();
    if ll + 1 < lr {
        return Ordering::Less;
    }
    if lr + 1 < ll {
        return Ordering::Greater;
    }

    // 64-bit mantissa brackets; bracket products fit in u128 exactly.
    let (ta, sa) = top64(a);
    let (tb, sb) = top64(b);
    let (tc, sc) = top64(c);
    let (td, sd) = top64(d);
    let lo_l = ta as u128 * tb as u128;
    let hi_l = (ta as u128 + 1) * (tb as u128 + 1);
    let lo_r = tc as u128 * td as u128;
    let hi_r = (tc as u128 + 1) * (td as u128 + 1);
    let el = sa + sb;
    let er = sc + sd;
    if shifted_gt(lo_l, el, hi_r, er) {
        return Ordering::Greater;
    }
    if shifted_gt(lo_r, er, hi_l, el) {
        return Ordering::Less;
    }

    (a * b).cmp(&(c * d))
}

/// `true` iff `x*2^ex > y*2^ey` (mantissas u128, exponents non-negative).
fn shifted_gt(x: u128, ex: u64, y: u128, ey: u64) -> bool {
    if x == 0 {
        return false;
    }
    if y == 0 {
        return true;
    }
    let lx = ex as i128 + (128 - x.leading_zeros()) as i128;
    let ly = ey as i128 + (128 - y.leading_zeros()) as i128;
    if lx != ly {
        // Different binades: x*2^ex >= 2^(lx-1) >= 2^ly > y*2^ey when lx > ly.
        return lx > ly;
    }
    // Same binade implies |ex - ey| < 128, so the shifts below are in range.
    if ex >= ey {
        let sh = (ex - ey) as u32;
        if sh == 0 {
            return x > y;
        }
        // x*2^sh > y  <=>  x > floor(y / 2^sh)
        x > (y >> sh)
    } else {
        let sh = (ey - ex) as u32;
        // x > y*2^sh  <=>  (x >> sh) > y, or equal with a nonzero remainder
        (x >> sh) > y || ((x >> sh) == y && (x & ((1u128 << sh) - 1)) != 0)
    }
}

/// Top (at most) 64 bits of a positive integer: returns `(t, s)` with
/// `t*2^s <= x < (t+1)*2^s`.
fn top64(x: &Int) -> (u64, u64) {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 64 {
        let (_, digits) = x.to_u64_digits();
        return (digits.first().copied().unwrap_or(0), 0);
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    let (_, digits) = top.to_u64_digits();
    (digits[0], shift)
}

/// Compare `p1/q1` with `p2/q2` (denominators positive) using the truncated
/// product fast path.
pub fn cmp_frac(p1: &Int, q1: &Int, p2: &Int, q2: &Int) -> Ordering {
    debug_assert!(q1.is_positive() && q2.is_positive());
    match (p1.sign(), p2.sign()) {
        (Sign::Minus, Sign::NoSign) | (Sign::Minus, Sign::Plus) | (Sign::NoSign, Sign::Plus) => {
            return Ordering::Less
        }
        (Sign::Plus, Sign::NoSign) | (Sign::Plus, Sign::Minus) | (Sign::NoSign, Sign::Minus) => {
            return Ordering::Greater
        }
        (Sign::NoSign, Sign::NoSign) => return Ordering::Equal,
        (Sign::Plus, Sign::Plus) => {}
        (Sign::Minus, Sign::Minus) => {
            return cmp_products(&-p2, q1, &-p1, q2);
        }
    }
    cmp_products(p1, q2, p2, q1)
}

/// Certified floating bracket of a non-negative real: `lo*2^exp <= x <= hi*2^exp`
/// with 64-bit mantissas.  Used to carry running values (truncated digit
/// prefixes, convergent numerators and denominators, powers of the base)
/// through millions of update steps at O(1) cost while keeping a provable
/// enclosure; comparisons the enclosures cannot decide fall back to exact
/// reconstruction at the call site.
#[derive(Clone, Copy, Debug)]
pub struct TopApprox {
    pub lo: u64,
    pub hi: u64,
    pub exp: i64,
}

impl TopApprox {
    pub fn zero() -> Self {
        TopApprox { lo: 0, hi: 0, exp: 0 }
    }

    pub fn from_u64(v: u64) -> Self {
        TopApprox { lo: v, hi: v, exp: 0 }.normalized()
    }

    /// Exact bracket of a non-negative big integer.
    pub fn from_int(x: &Int) -> Self {
        debug_assert!(!x.is_negative());
        if x.is_zero() {
            return TopApprox::zero();
        }
        let bits = x.bits();
        if bits <= 62 {
            let (_, d) = x.to_u64_digits();
            return TopApprox { lo: d[0], hi: d[0], exp: 0 };
        }
        let shift = bits - 62;
        let top: BigInt = x >> shift;
        let (_, d) = top.to_u64_digits();
        let t = d[0];
        TopApprox { lo: t, hi: t + 1, exp: shift as i64 }
    }

    fn normalized(self) -> Self {
        let mut t = self;
        if t.hi == 0 {
            return TopApprox::zero();
        }
        while t.hi >= 1 << 62 {
            t.lo >>= 1;
            t.hi = (t.hi >> 1) + (t.hi & 1); // round the upper endpoint up
            t.exp += 1;
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.hi == 0
    }

    /// `self * m + add` for exact small integers `m >= 1`, `add >= 0`.
    pub fn mul_small_add(self, m: u64, add: u64) -> Self {
        debug_assert!(m > 0 && m < 1 << 32);
        if self.is_zero() {
            return TopApprox::from_u64(add);
        }
        // Bring `add` (exact at scale 2^0) to scale 2^exp with directed rounding.
        let (add_lo, add_hi) = if self.exp <= 0 {
            let sh = (-self.exp).min(63) as u32;
            let a = (add as u128) << sh;
            (a, a)
        } else if self.exp >= 64 {
            (0u128, u128::from(add > 0))
        } else {
            let sh = self.exp as u32;
            let fl = (add >> sh) as u128;
            let rem = add & ((1u64 << sh) - 1);
            (fl, fl + u128::from(rem != 0))
        };
        let lo128 = self.lo as u128 * m as u128 + add_lo;
        let hi128 = self.hi as u128 * m as u128 + add_hi;
        Self::from_u128_bracket(lo128, hi128, self.exp)
    }

    fn from_u128_bracket(lo: u128, hi: u128, exp: i64) -> Self {
        debug_assert!(lo <= hi);
        let bits = 128 - hi.leading_zeros() as i64;
        let shift = (bits - 62).max(0);
        let lo64 = (lo >> shift) as u64;
        let mut hi64 = (hi >> shift) as u64;
        if shift > 0 && hi & ((1u128 << shift) - 1) != 0 {
            hi64 += 1;
        }
        TopApprox { lo: lo64, hi: hi64, exp: exp + shift }.normalized()
    }

    /// Product of two brackets.
    pub fn mul(self, other: TopApprox) -> Self {
        if self.is_zero() || other.is_zero() {
            return TopApprox::zero();
        }
        Self::from_u128_bracket(
            self.lo as u128 * other.lo as u128,
            self.hi as u128 * other.hi as u128,
            self.exp + other.exp,
        )
    }

    /// Certified strict comparison; `None` when the brackets overlap.
    pub fn try_cmp(self, other: TopApprox) -> Option<Ordering> {
        if bracket_lt(self.hi, self.exp, other.lo, other.exp) {
            return Some(Ordering::Less);
        }
        if bracket_lt(other.hi, other.exp, self.lo, self.exp) {
            return Some(Ordering::Greater);
        }
        None
    }
}

/// `true` iff `a*2^ea < b*2^eb` strictly (u64 mantissas, signed exponents).
fn bracket_lt(a: u64, ea: i64, b: u64, eb: i64) -> bool {
    if a == 0 {
        return b > 0;
    }
    if b == 0 {
        return false;
    }
    let la = ea + 64 - a.leading_zeros() as i64;
    let lb = eb + 64 - b.leading_zeros() as i64;
    if la != lb {
        return la < lb;
    }
    // Same binade implies |ea - eb| < 64.
    if ea >= eb {
        let sh = (ea - eb) as u32;
        ((a as u128) << sh) < b as u128
    } else {
        let sh = (eb - ea) as u32;
        (a as u128) < ((b as u128) << sh)
    }
}

/// Floor of `p/q` for `q > 0`.
pub fn floor_div(p: &Int, q: &Int) -> Int {
    debug_assert!(q.is_positive());
    num_integer::Integer::div_floor(p, q)
}

/// Exact floor of an `ExactRational`.
pub fn rational_floor(r: &ExactRational) -> Int {
    floor_div(r.numer(), r.denom())
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn int(v: i64) -> Int {
        Int::from_i64(v).unwrap()
    }

    /// `lo*2^exp <= v <= hi*2^exp`, checked exactly.
    fn bracket_contains(t: &TopApprox, v: &Int) -> bool {
        let (lo, hi, vv) = if t.exp >= 0 {
            (Int::from(t.lo) << t.exp as u64, Int::from(t.hi) << t.exp as u64, v.clone())
        } else {
            (Int::from(t.lo), Int::from(t.hi), v << (-t.exp) as u64)
        };
        lo <= vv && vv <= hi
    }

    #[test]
    fn make_rational_reduces_and_normalizes_sign() {
        let r = make_rational(2, 4).unwrap();
        assert_eq!(r, Ratio::new(int(1), int(2)));
        let r = make_rational(0, 7).unwrap();
        assert!(r.is_zero());
        assert_eq!(r.denom(), &int(1));
        let r = make_rational(-3, -6).unwrap();
        assert_eq!(r, Ratio::new(int(1), int(2)));
        assert!(r.denom().is_positive());
        let r = make_rational(3, -6).unwrap();
        assert_eq!(r, Ratio::new(int(-1), int(2)));
    }

    #[test]
    fn make_rational_rejects_zero_denominator() {
        assert!(matches!(make_rational(1, 0), Err(crate::Error::InvalidInput(_))));
    }

    #[test]
    fn cmp_products_small_cases() {
        assert_eq!(cmp_products(&int(3), &int(4), &int(2), &int(6)), Ordering::Equal);
        assert_eq!(cmp_products(&int(3), &int(4), &int(2), &int(7)), Ordering::Less);
        assert_eq!(cmp_products(&int(5), &int(5), &int(4), &int(6)), Ordering::Greater);
        assert_eq!(cmp_products(&int(0), &int(9), &int(0), &int(3)), Ordering::Equal);
        assert_eq!(cmp_products(&int(0), &int(9), &int(1), &int(3)), Ordering::Less);
    }

    #[test]
    fn cmp_frac_signs() {
        assert_eq!(cmp_frac(&int(-1), &int(2), &int(1), &int(3)), Ordering::Less);
        assert_eq!(cmp_frac(&int(-1), &int(2), &int(-1), &int(3)), Ordering::Less);
        assert_eq!(cmp_frac(&int(-1), &int(3), &int(-1), &int(2)), Ordering::Greater);
        assert_eq!(cmp_frac(&int(1), &int(3), &int(1), &int(2)), Ordering::Less);
        assert_eq!(cmp_frac(&int(2), &int(4), &int(1), &int(2)), Ordering::Equal);
    }

    #[test]
    fn top_approx_tracks_digit_accumulation() {
        // Accumulate decimal digits and keep the exact value alongside: the
        // running bracket must always contain it and stay tight.
        let mut exact = Int::from(0);
        let mut top = TopApprox::zero();
        for i in 0..5000u64 {
            let d = (i * 7 + 3) % 10;
            exact = &exact * 10 + d;
            top = top.mul_small_add(10, d);
            assert!(bracket_contains(&top, &exact), "lost the exact value at step {i}");
        }
        assert!(top.hi - top.lo < 1 << 22, "bracket too wide: {top:?}");
    }

    proptest! {
        #[test]
        fn cmp_products_matches_exact(a in any::<u64>(), b in any::<u64>(),
                                      c in any::<u64>(), d in any::<u64>(),
                                      sa in 0u32..200, sb in 0u32..200) {
            let a = Int::from(a) << sa;
            let b = Int::from(b) << sb;
            let c = Int::from(c) << sb;
            let d = Int::from(d) << sa;
            let fast = cmp_products(&a, &b, &c, &d);
            let exact = (&a * &b).cmp(&(&c * &d));
            prop_assert_eq!(fast, exact);
        }

        #[test]
        fn cmp_products_near_ties(a in 1u64..u64::MAX, shift in 0u32..100, delta in 0i64..3) {
            let x = Int::from(a) << shift;
            let y = Int::from(a) + Int::from(delta);
            prop_assert_eq!(cmp_products(&x, &y, &y, &x), Ordering::Equal);
            prop_assert_eq!(cmp_products(&x, &y, &(&y * &x + 1), &Int::one()), Ordering::Less);
            prop_assert_eq!(cmp_products(&(&y * &x + 1), &Int::one(), &x, &y), Ordering::Greater);
        }

        #[test]
        fn rational_ops_are_exact(p1 in -1000i64..1000, q1 in 1i64..1000,
                                  p2 in -1000i64..1000, q2 in 1i64..1000) {
            let a = make_rational(p1, q1).unwrap();
            let b = make_rational(p2, q2).unwrap();
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            if !b.is_zero() {
                prop_assert_eq!(&(&a * &b) / &b, a);
            }
        }

        #[test]
        fn top_approx_mul_brackets(x in 1u64..u64::MAX, y in 1u64..u64::MAX,
                                   sx in 0u32..500, sy in 0u32..500) {
            let bx = Int::from(x) << sx;
            let by = Int::from(y) << sy;
            let prod = TopApprox::from_int(&bx).mul(TopApprox::from_int(&by));
            prop_assert!(bracket_contains(&prod, &(&bx * &by)));
        }

        #[test]
        fn bracket_cmp_never_contradicts_exact(x in 1u64..u64::MAX, y in 1u64..u64::MAX,
                                               sx in 0u32..80, sy in 0u32..80) {
            let bx = Int::from(x) << sx;
            let by = Int::from(y) << sy;
            let tx = TopApprox::from_int(&bx);
            let ty = TopApprox::from_int(&by);
            if let Some(ord) = tx.try_cmp(ty) {
                prop_assert_eq!(ord, bx.cmp(&by));
            }
        }
    }
}
