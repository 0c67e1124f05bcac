//! Certified fixed-point interval arithmetic.
//!
//! Values are enclosed by `[lo, hi] / 2^FIX_BITS` with `BigInt` endpoints, so
//! magnitudes are unbounded while resolution stays at `FIX_BITS` fractional
//! bits.  Every operation rounds outward (floor for lower endpoints, ceiling
//! for upper), so any real produced by a chain of these operations provably
//! lies inside the final interval.  Logarithms, `ln 2`, and `pi` come with the
//! same guarantee: series truncation errors are added to the enclosure, never
//! dropped.

use crate::kernel::rational::ExactRational;
use crate::{Error, Int, Result};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::sync::OnceLock;

/// Fractional bits of resolution carried by [`FixInterval`].
pub const FIX_BITS: u64 = 192;

/// Mantissa width used when reducing a big integer to `[1,2)` before the log
/// series; chosen so the mantissa lands exactly on the `FIX_BITS` scale.
const MANT_BITS: u64 = FIX_BITS + 1;

/// Closed interval `[lo, hi] / 2^FIX_BITS` enclosing a real number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixInterval {
    lo: Int,
    hi: Int,
}

/// Floor of `x / 2^k` for signed `x`.
pub(crate) fn floor_shr(x: &Int, k: u64) -> Int {
    if x.is_negative() {
        let mag = (-x + (pow2(k) - 1u8)) >> k;
        -mag
    } else {
        x >> k
    }
}

/// Ceiling of `x / 2^k` for signed `x`.
pub(crate) fn ceil_shr(x: &Int, k: u64) -> Int {
    -floor_shr(&-x, k)
}

fn pow2(k: u64) -> Int {
    Int::one() << k
}

/// `x * 2^exp2` as an `f64`, safe for huge `x` (no intermediate overflow).
pub fn int_to_f64_scaled(x: &Int, exp2: i64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits() as i64;
    let (top, shift) = if bits <= 53 {
        (x.clone(), 0i64)
    } else {
        (x >> (bits - 53) as u64, bits - 53)
    };
    let t = top.to_i64().expect("53-bit mantissa fits i64") as f64;
    let e = shift + exp2;
    t * 2f64.powi(e.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

impl FixInterval {
    pub fn new(lo: Int, hi: Int) -> Self {
        debug_assert!(lo <= hi);
        FixInterval { lo, hi }
    }

    /// Exact representation of an integer.
    pub fn from_int(v: impl Into<Int>) -> Self {
        let x: Int = v.into() << FIX_BITS;
        FixInterval { lo: x.clone(), hi: x }
    }

    pub fn zero() -> Self {
        FixInterval { lo: Int::zero(), hi: Int::zero() }
    }

    /// Tight directed enclosure of `p/q`, `q > 0`.
    pub fn from_frac(p: &Int, q: &Int) -> Self {
        debug_assert!(q.is_positive());
        let scaled: Int = p << FIX_BITS;
        let lo = num_integer::Integer::div_floor(&scaled, q);
        let hi = -num_integer::Integer::div_floor(&-&scaled, q);
        FixInterval { lo, hi }
    }

    pub fn from_ratio(r: &ExactRational) -> Self {
        Self::from_frac(r.numer(), r.denom())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        FixInterval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        FixInterval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }

    pub fn neg(&self) -> Self {
        FixInterval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let corners = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = corners.iter().min().unwrap();
        let hi = corners.iter().max().unwrap();
        FixInterval { lo: floor_shr(lo, FIX_BITS), hi: ceil_shr(hi, FIX_BITS) }
    }

    /// Multiplication by an exact integer (no rounding).
    pub fn mul_int(&self, k: impl Into<Int>) -> Self {
        let k: Int = k.into();
        let a = &self.lo * &k;
        let b = &self.hi * &k;
        if k.is_negative() {
            FixInterval { lo: b, hi: a }
        } else {
            FixInterval { lo: a, hi: b }
        }
    }

    /// Division; `rhs` must not contain zero.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if !rhs.lo.is_positive() && !rhs.hi.is_negative() {
            return Err(Error::invalid("interval division by an interval containing zero"));
        }
        let num_lo: Int = &self.lo << FIX_BITS;
        let num_hi: Int = &self.hi << FIX_BITS;
        let mut lo: Option<Int> = None;
        let mut hi: Option<Int> = None;
        for n in [&num_lo, &num_hi] {
            for d in [&rhs.lo, &rhs.hi] {
                let fl = num_integer::Integer::div_floor(n, d);
                let ce = -num_integer::Integer::div_floor(&-n, d);
                lo = Some(match lo {
                    Some(v) => v.min(fl),
                    None => fl,
                });
                hi = Some(match hi {
                    Some(v) => v.max(ce),
                    None => ce,
                });
            }
        }
        Ok(FixInterval { lo: lo.unwrap(), hi: hi.unwrap() })
    }

    /// `|self|` as an interval.
    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            FixInterval { lo: Int::zero(), hi: (&-&self.lo).max(&self.hi).clone() }
        }
    }

    /// Certified comparison against another interval: `Some(ordering)` only
    /// when the intervals are disjoint (or both are single equal points).
    pub fn try_cmp(&self, rhs: &Self) -> Option<Ordering> {
        if self.hi < rhs.lo {
            return Some(Ordering::Less);
        }
        if self.lo > rhs.hi {
            return Some(Ordering::Greater);
        }
        if self.lo == self.hi && rhs.lo == rhs.hi && self.lo == rhs.lo {
            return Some(Ordering::Equal);
        }
        None
    }

    pub fn lo(&self) -> &Int {
        &self.lo
    }

    pub fn hi(&self) -> &Int {
        &self.hi
    }

    /// Interval width as `f64`.
    pub fn width_f64(&self) -> f64 {
        int_to_f64_scaled(&(&self.hi - &self.lo), -(FIX_BITS as i64))
    }

    /// Midpoint as `f64`; with widths kept below `2^-150` this is accurate to
    /// the last `f64` bit for all magnitudes arising here.
    pub fn to_f64(&self) -> f64 {
        int_to_f64_scaled(&(&self.lo + &self.hi), -(FIX_BITS as i64 + 1))
    }
}

/// Enclosure of `ln 2`.
pub fn ln2() -> &'static FixInterval {
    static LN2: OnceLock<FixInterval> = OnceLock::new();
    LN2.get_or_init(|| {
        // ln 2 = 2 atanh(1/3)
        let third = FixInterval::from_frac(&Int::one(), &Int::from(3));
        atanh_small(&third).mul_int(2)
    })
}

/// Enclosure of `pi`.
pub fn pi() -> &'static FixInterval {
    static PI: OnceLock<FixInterval> = OnceLock::new();
    PI.get_or_init(|| {
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
        let a = atan_inv(5).mul_int(16);
        let b = atan_inv(239).mul_int(4);
        a.sub(&b)
    })
}

/// `atanh(t)` for `0 <= t <= 0.35`, via the odd power series with a tail bound.
fn atanh_small(t: &FixInterval) -> FixInterval {
    debug_assert!(!t.lo.is_negative());
    // Tail after K terms: t^(2K+3)/(2K+3) * 1/(1-t^2) <= t^(2K+3) * (8/7).
    const K: usize = 62;
    let t2 = t.mul(t);
    let mut power = t.clone(); // t^(2k+1)
    let mut sum = FixInterval::zero();
    for k in 0..=K {
        let denom = FixInterval::from_int(2 * k as i64 + 1);
        sum = sum.add(&power.div(&denom).expect("odd denominators are positive"));
        power = power.mul(&t2);
    }
    // `power` is now t^(2K+3), on the FIX_BITS scale; bound the tail above by
    // power * 8/7 (the 1/(2K+3) factor is dropped, which only enlarges it).
    let tail_hi = &power.hi * 8u8 / 7u8 + 1u8;
    FixInterval { lo: sum.lo, hi: sum.hi + tail_hi }
}

/// `atan(1/x)` for integer `x >= 2`, alternating series with a tail bound.
fn atan_inv(x: u32) -> FixInterval {
    let xi = Int::from(x);
    let x2 = &xi * &xi;
    let mut denom = xi.clone(); // x^(2k+1)
    let mut sum = FixInterval::zero();
    let mut k = 0u64;
    loop {
        let term = FixInterval::from_frac(&Int::one(), &(&denom * (2 * k + 1)));
        if term.hi <= Int::one() {
            // First omitted term below resolution: widen by it and stop.
            sum = FixInterval { lo: sum.lo - &term.hi, hi: sum.hi + &term.hi };
            break;
        }
        if k % 2 == 0 {
            sum = sum.add(&term);
        } else {
            sum = sum.sub(&term);
        }
        denom *= &x2;
        k += 1;
    }
    sum
}

/// Certified enclosure of `ln x` for a positive big integer.
pub fn ln_int(x: &Int) -> Result<FixInterval> {
    if !x.is_positive() {
        return Err(Error::invalid("logarithm of a non-positive integer"));
    }
    let bits = x.bits();
    let e = bits as i64 - 1;
    // With e = bits-1 the mantissa f = x/2^e lies in [1,2), and on the
    // FIX_BITS scale it is exactly x * 2^(MANT_BITS - bits) (truncated from
    // above by one unit when x is wider than the mantissa).
    let f = if bits <= MANT_BITS {
        let m: Int = x << (MANT_BITS - bits);
        FixInterval { lo: m.clone(), hi: m }
    } else {
        let m: Int = x >> (bits - MANT_BITS);
        FixInterval { lo: m.clone(), hi: m + 1u8 }
    };
    // ln f = 2 atanh((f-1)/(f+1)), with (f-1)/(f+1) in [0, 1/3].
    let one = FixInterval::from_int(1);
    let t = f.sub(&one).div(&f.add(&one))?;
    let ln_f = atanh_small(&t).mul_int(2);
    Ok(ln_f.add(&ln2().mul_int(e)))
}

/// Certified enclosure of `ln(p/q)` for positive `p`, `q`.
pub fn ln_frac(p: &Int, q: &Int) -> Result<FixInterval> {
    Ok(ln_int(p)?.sub(&ln_int(q)?))
}

/// Certified enclosure of `ln r` for a positive rational.
pub fn ln_ratio(r: &ExactRational) -> Result<FixInterval> {
    if !r.is_positive() {
        return Err(Error::invalid("logarithm of a non-positive rational"));
    }
    ln_frac(r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::make_rational;

    fn assert_encloses(iv: &FixInterval, value: f64, max_width: f64) {
        // The f64 conversions truncate, so allow a few ulps of slack around
        // the converted endpoints; the interval itself is exact.
        let slack = (value.abs() + 1.0) * 1e-16 * 8.0;
        let lo = int_to_f64_scaled(iv.lo(), -(FIX_BITS as i64));
        let hi = int_to_f64_scaled(iv.hi(), -(FIX_BITS as i64));
        assert!(
            lo - slack <= value && value <= hi + slack,
            "{value} not in [{lo}, {hi}]"
        );
        assert!(iv.width_f64() <= max_width, "width {} > {max_width}", iv.width_f64());
    }

    #[test]
    fn ln2_matches_reference_digits() {
        // 0.693147180559945309417232121458...
        assert_encloses(ln2(), 0.6931471805599453, 1e-50);
        let r = make_rational(693147180559945309i64, 10i64.pow(18)).unwrap();
        let approx = FixInterval::from_ratio(&r);
        // |ln2 - approx| < 1e-18
        let diff = ln2().sub(&approx).abs();
        let bound = FixInterval::from_frac(&Int::from(1), &Int::from(10u64.pow(18)));
        assert_eq!(diff.try_cmp(&bound), Some(Ordering::Less));
    }

    #[test]
    fn pi_matches_reference_digits() {
        assert_encloses(pi(), std::f64::consts::PI, 1e-50);
        // 3.141592653589793238462643383279... : check 18 digits exactly.
        let r = make_rational(3141592653589793238i64, 10i64.pow(18)).unwrap();
        let approx = FixInterval::from_ratio(&r);
        let diff = pi().sub(&approx).abs();
        let bound = FixInterval::from_frac(&Int::from(1), &Int::from(10u64.pow(18)));
        assert_eq!(diff.try_cmp(&bound), Some(Ordering::Less));
    }

    #[test]
    fn ln_small_integers() {
        assert_encloses(&ln_int(&Int::from(1)).unwrap(), 0.0, 1e-50);
        assert_encloses(&ln_int(&Int::from(10)).unwrap(), 2.302585092994046, 1e-50);
        assert_encloses(&ln_int(&Int::from(2)).unwrap(), 0.6931471805599453, 1e-50);
        // ln(4) = 2 ln(2) certified.
        let ln4 = ln_int(&Int::from(4)).unwrap();
        let twice = ln2().mul_int(2);
        assert!(ln4.sub(&twice).abs().width_f64() < 1e-50);
        assert!(ln4.lo() <= twice.hi() && twice.lo() <= ln4.hi());
    }

    #[test]
    fn ln_huge_integer_scales() {
        // ln(2^100000) = 100000 ln 2; the f64 reference is itself only good to
        // ~1e-11 at this magnitude, so compare midpoints, not endpoints.
        let x: Int = Int::one() << 100000u32;
        let l = ln_int(&x).unwrap();
        assert!(l.width_f64() < 1e-40);
        assert!((l.to_f64() - 100000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        let y: Int = (Int::one() << 100000u32) + (Int::one() << 99999u32) + 12345u32;
        let ly = ln_int(&y).unwrap();
        assert!(ly.width_f64() < 1e-40);
        assert!((ly.to_f64() - (100000.0 * std::f64::consts::LN_2 + 1.5f64.ln())).abs() < 1e-9);
        // Exact cross-check: ln(2^100000) - 100000*ln2 must enclose zero tightly.
        let diff = l.sub(&ln2().mul_int(100000));
        assert!(diff.lo() <= &Int::zero() && &Int::zero() <= diff.hi());
    }

    #[test]
    fn ln_frac_of_rational() {
        let l = ln_frac(&Int::from(3), &Int::from(2)).unwrap();
        assert_encloses(&l, 0.4054651081081644, 1e-50);
        let l = ln_frac(&Int::from(1), &Int::from(7)).unwrap();
        assert_encloses(&l, -(7f64.ln()), 1e-50);
    }

    #[test]
    fn interval_division_is_outward() {
        let a = FixInterval::from_int(1);
        let b = FixInterval::from_int(3);
        let q = a.div(&b).unwrap();
        let third = 1.0 / 3.0;
        assert_encloses(&q, third, 1e-50);
        assert!(a.div(&FixInterval::new(Int::from(-5), Int::from(5))).is_err());
    }

    #[test]
    fn scaled_f64_conversion() {
        assert_eq!(int_to_f64_scaled(&Int::from(3), 0), 3.0);
        assert_eq!(int_to_f64_scaled(&Int::from(1), -1), 0.5);
        let big: Int = Int::one() << 300u32;
        assert_eq!(int_to_f64_scaled(&big, -300), 1.0);
    }
}
