//! Positional expansions in a real base `beta > 1`.
//!
//! The core map is `x -> beta*x - floor(beta*x)` on `[0, 1)`, generating the
//! digit sequence of `x`.  Everything here is exact: digits of rational points
//! are produced by integer arithmetic (batched for integer bases), and digits
//! under an algebraic base ride on certified field arithmetic, so a digit is
//! never the result of a rounded comparison.
//!
//! Beyond digit streams this module knows the combinatorics of the digit
//! language: the expansion of 1 and its termination status, the quasi-greedy
//! reference word, admissibility of finite words, exact counting and
//! enumeration of admissible words, the interval of points sharing a given
//! digit prefix, and runs of zero digits following a position.

use crate::kernel::{
    parse_beta_spec, BetaField, ExactRational, FieldElement, Interval, RealDescriptor, Value,
};
use crate::{Error, Int, Result};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::collections::VecDeque;

/// A single expansion digit.  Bases with more than 2^63 digits are rejected
/// at construction, so `u64` always suffices.
pub type Digit = u64;

/// How the expansion of 1 ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitExpansion {
    /// The orbit of 1 hit zero after exactly `digits.len()` steps; the digit
    /// word is the complete finite expansion (last digit nonzero).
    Terminates { digits: Vec<Digit> },
    /// No termination within the requested horizon; `digits` holds the first
    /// `horizon` digits.
    Open { digits: Vec<Digit> },
}

impl UnitExpansion {
    pub fn digits(&self) -> &[Digit] {
        match self {
            UnitExpansion::Terminates { digits } | UnitExpansion::Open { digits } => digits,
        }
    }

    pub fn terminates(&self) -> bool {
        matches!(self, UnitExpansion::Terminates { .. })
    }
}

enum BasePath {
    /// Integer base: digits come out of radix conversions in batches.
    Integer { beta: Int },
    /// Non-integer rational base p/q in lowest terms, p > q >= 2.
    Rational { p: Int, q: Int },
    /// Irrational algebraic base handled through certified field arithmetic.
    Algebraic,
}

/// A base together with the machinery to expand points under it.
pub struct BetaSystem {
    field: BetaField,
    path: BasePath,
    alphabet: u64,
}

impl BetaSystem {
    pub fn from_spec(spec: &str) -> Result<Self> {
        Self::new(parse_beta_spec(spec)?)
    }

    pub fn new(descriptor: RealDescriptor) -> Result<Self> {
        let field = BetaField::new(descriptor)?;
        let path = match field.descriptor() {
            RealDescriptor::Rational(r) => {
                if r.denom().is_one() {
                    BasePath::Integer { beta: r.numer().clone() }
                } else {
                    BasePath::Rational { p: r.numer().clone(), q: r.denom().clone() }
                }
            }
            RealDescriptor::AlgebraicRoot { .. } => BasePath::Algebraic,
        };
        let alphabet = field
            .digit_alphabet_size()?
            .to_u64()
            .filter(|a| *a <= (1u64 << 63))
            .ok_or_else(|| Error::invalid("digit alphabet larger than 2^63 is unsupported"))?;
        Ok(BetaSystem { field, path, alphabet })
    }

    pub fn field(&self) -> &BetaField {
        &self.field
    }

    /// Number of distinct digits (`ceil` of the base).
    pub fn alphabet_size(&self) -> u64 {
        self.alphabet
    }

    pub fn base_to_f64(&self) -> f64 {
        self.field.beta_to_f64()
    }

    /// Whether the base is an integer (its expansions then terminate exactly
    /// on dyadic-style inputs and the unit expansion is the single digit
    /// `base`).
    pub fn base_is_integer(&self) -> bool {
        matches!(self.path, BasePath::Integer { .. })
    }

    /// Exact digit stream of a rational point in `[0, 1)`.
    pub fn digit_stream(&self, x: &ExactRational) -> Result<DigitStream> {
        if x.is_negative() || x >= &ExactRational::one() {
            return Err(Error::invalid("expansion input must lie in [0, 1)"));
        }
        let state = match &self.path {
            BasePath::Integer { beta } => OrbitState::Integer {
                beta: beta.clone(),
                pow_chunk: beta.pow(INT_CHUNK),
                rem: x.numer().clone(),
                den: x.denom().clone(),
                buf: VecDeque::new(),
            },
            BasePath::Rational { p, q } => OrbitState::Rational {
                p: p.clone(),
                q: q.clone(),
                num: x.numer().clone(),
                den: x.denom().clone(),
            },
            BasePath::Algebraic => OrbitState::Algebraic { y: self.field.from_rational(x) },
        };
        Ok(DigitStream { state })
    }

    /// First `n` digits of `x`.
    pub fn digits(&self, x: &ExactRational, n: usize) -> Result<Vec<Digit>> {
        let mut stream = self.digit_stream(x)?;
        (0..n).map(|_| stream.next_digit()).collect()
    }

    /// The expansion of 1, stopping after `horizon` digits if the orbit has
    /// not reached zero by then.  For an integer base the convention is the
    /// single-digit word `(base)`.
    pub fn unit_expansion(&self, horizon: usize) -> Result<UnitExpansion> {
        match &self.path {
            BasePath::Integer { beta } => {
                let d = beta.to_u64().expect("alphabet validated at construction");
                Ok(UnitExpansion::Terminates { digits: vec![d] })
            }
            BasePath::Rational { p, q } => {
                // A terminating unit expansion would make the base a root of a
                // monic integer polynomial, impossible for non-integer
                // rationals; the loop below therefore never terminates early.
                let mut num = Int::one();
                let mut den = Int::one();
                let mut digits = Vec::with_capacity(horizon);
                for _ in 0..horizon {
                    num *= p;
                    den *= q;
                    let d = num.div_floor(&den);
                    num -= &d * &den;
                    digits.push(
                        d.to_u64().ok_or_else(|| Error::invalid("digit exceeds u64"))?,
                    );
                    if num.is_zero() {
                        return Ok(UnitExpansion::Terminates { digits });
                    }
                }
                Ok(UnitExpansion::Open { digits })
            }
            BasePath::Algebraic => {
                let mut y = self.field.one();
                let mut digits = Vec::with_capacity(horizon.min(1024));
                for _ in 0..horizon {
                    y = y.mul_base();
                    let d = y.floor()?;
                    y = y.sub_int(&d);
                    digits.push(
                        d.to_u64().ok_or_else(|| Error::invalid("digit exceeds u64"))?,
                    );
                    if y.is_zero() || y.sign()? == 0 {
                        return Ok(UnitExpansion::Terminates { digits });
                    }
                }
                Ok(UnitExpansion::Open { digits })
            }
        }
    }

    /// First `n` digits of the quasi-greedy reference word: the expansion of 1
    /// itself when it never terminates, and the periodization
    /// `(e_1, ..., e_{m-1}, e_m - 1)` of a terminating expansion
    /// `(e_1, ..., e_m)`.  Computed from `unit_expansion(n + 1)`, which is
    /// enough lookahead to make the first `n` digits exact in both cases.
    pub fn reference_word(&self, n: usize) -> Result<Vec<Digit>> {
        match self.unit_expansion(n + 1)? {
            UnitExpansion::Terminates { digits } => {
                let m = digits.len();
                debug_assert!(digits[m - 1] >= 1);
                let mut period = digits;
                period[m - 1] -= 1;
                Ok((0..n).map(|i| period[i % m]).collect())
            }
            UnitExpansion::Open { digits } => Ok(digits[..n].to_vec()),
        }
    }

    /// Follower weight after reading `word` from a full interval: the width
    /// of the cylinder of `word` is `t * base^{-len}`.  Errors with
    /// [`Error::InadmissibleWord`] when some prefix already has no extension.
    fn follower_after(&self, word: &[Digit]) -> Result<Follower> {
        let mut t = Follower::one(self);
        for &d in word {
            t = t.step(self, d)?.ok_or(Error::InadmissibleWord)?;
        }
        Ok(t)
    }

    /// Whether `word` is a digit word some point of `[0, 1)` actually begins
    /// with.
    pub fn is_admissible(&self, word: &[Digit]) -> Result<bool> {
        let mut t = Follower::one(self);
        for &d in word {
            match t.step(self, d)? {
                Some(next) => t = next,
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Exact number of admissible words of length `n`.
    ///
    /// Runs a dynamic program over follower weights; distinct prefixes with
    /// the same follower weight are merged, so the state count stays at the
    /// number of distinct weights (finite and small for the bases of
    /// interest) rather than the word count.
    pub fn count_admissible(&self, n: usize) -> Result<Int> {
        if let BasePath::Integer { beta } = &self.path {
            return Ok(beta.pow(n as u32));
        }
        // states: canonical key -> (weight, number of words reaching it)
        let mut states: HashMap<Vec<u8>, (Follower, Int)> = HashMap::new();
        let one = Follower::one(self);
        states.insert(one.key(), (one, Int::one()));
        for _ in 0..n {
            let mut next: HashMap<Vec<u8>, (Follower, Int)> = HashMap::new();
            for (_, (t, count)) in states {
                let d = t.digit_count(self)?; // digits 0 .. d-1 are allowed
                debug_assert!(d >= 1);
                if d > 1 {
                    // All but the largest digit leave a full follower weight.
                    let full = Follower::one(self);
                    let entry = next
                        .entry(full.key())
                        .or_insert_with(|| (full, Int::zero()));
                    entry.1 += &count * Int::from(d - 1);
                }
                let last = t
                    .step(self, d - 1)?
                    .expect("largest allowed digit is appendable");
                let entry = next.entry(last.key()).or_insert_with(|| (last, Int::zero()));
                entry.1 += count;
            }
            states = next;
        }
        Ok(states.into_values().map(|(_, c)| c).sum())
    }

    /// All admissible words of length `n`, in lexicographic order.  Errors
    /// with [`Error::BudgetExceeded`] if there are more than `budget` words.
    pub fn enumerate_admissible(&self, n: usize, budget: u64) -> Result<Vec<Vec<Digit>>> {
        let total = self.count_admissible(n)?;
        if total > Int::from(budget) {
            return Err(Error::BudgetExceeded {
                budget,
                needed: total.to_u64().unwrap_or(u64::MAX),
            });
        }
        let mut out = Vec::new();
        let mut word: Vec<Digit> = Vec::with_capacity(n);
        self.enumerate_rec(n, &Follower::one(self), &mut word, &mut out)?;
        Ok(out)
    }

    fn enumerate_rec(
        &self,
        n: usize,
        t: &Follower,
        word: &mut Vec<Digit>,
        out: &mut Vec<Vec<Digit>>,
    ) -> Result<()> {
        if word.len() == n {
            out.push(word.clone());
            return Ok(());
        }
        let d = t.digit_count(self)?;
        for digit in 0..d {
            let next = t.step(self, digit)?.expect("digit below the allowed count");
            word.push(digit);
            self.enumerate_rec(n, &next, word, out)?;
            word.pop();
        }
        Ok(())
    }

    /// The half-open interval of points whose expansion begins with `word`:
    /// `[omega, omega + t * base^{-n})` with `omega` the value of the word
    /// read as a fraction and `t` the follower weight.
    pub fn cylinder(&self, word: &[Digit]) -> Result<Interval> {
        let t = self.follower_after(word)?;
        match &self.path {
            BasePath::Integer { .. } | BasePath::Rational { .. } => {
                let beta = self.field.descriptor().as_rational().unwrap().clone();
                let mut omega = ExactRational::zero();
                for &d in word.iter().rev() {
                    omega = (omega + ExactRational::from_integer(Int::from(d))) / &beta;
                }
                let width = match &t {
                    Follower::Rat(r) => r.clone(),
                    Follower::Alg(_) => unreachable!("rational base has rational followers"),
                } / beta.pow(word.len() as i32);
                Ok(Interval::half_open(
                    Value::Rat(omega.clone()),
                    Value::Rat(omega + width),
                ))
            }
            BasePath::Algebraic => {
                let mut omega = self.field.zero();
                for &d in word.iter().rev() {
                    omega = omega.add_int(&Int::from(d)).div_base();
                }
                let mut width = match t {
                    Follower::Alg(e) => e,
                    Follower::Rat(r) => self.field.from_rational(&r),
                };
                for _ in 0..word.len() {
                    width = width.div_base();
                }
                let hi = omega.add(&width);
                Ok(Interval::half_open(Value::Alg(omega), Value::Alg(hi)))
            }
        }
    }

    /// Follower weight of `word`: the length of the image of its cylinder
    /// under `n` applications of the expansion map, so the cylinder itself
    /// has width `t * base^(-n)`.
    pub fn follower_weight(&self, word: &[Digit]) -> Result<Value> {
        Ok(match self.follower_after(word)? {
            Follower::Rat(r) => Value::Rat(r),
            Follower::Alg(e) => Value::Alg(e),
        })
    }

    /// Exact ordering of the width of `word`'s cylinder against `base^(-e)`.
    ///
    /// The width is `t * base^(-n)` with `n = word.len()` and `t` the
    /// follower weight, so this is the ordering of `t * base^(e-n)`
    /// against 1 — exact in every base representation.
    pub fn cmp_cylinder_width(&self, word: &[Digit], e: usize) -> Result<std::cmp::Ordering> {
        let t = self.follower_after(word)?;
        let n = word.len();
        match t {
            Follower::Rat(r) => {
                let beta = self.field.descriptor().as_rational().unwrap();
                let exp = i32::try_from(e as i64 - n as i64)
                    .map_err(|_| Error::invalid("width exponent out of range"))?;
                let scaled = r * beta.pow(exp);
                Ok(scaled.cmp(&ExactRational::one()))
            }
            Follower::Alg(mut f) => {
                if e >= n {
                    for _ in 0..e - n {
                        f = f.mul_base();
                    }
                } else {
                    for _ in 0..n - e {
                        f = f.div_base();
                    }
                }
                f.cmp_rational(&ExactRational::one())
            }
        }
    }

    /// Length of the run of zero digits right after position `n` in the
    /// expansion of `x`: the number of consecutive zeros among digits
    /// `n+1, n+2, ...` before the next nonzero digit.
    ///
    /// Scanning is capped at `max_scan` digits beyond `n`; hitting the cap
    /// raises [`Error::LookaheadExhausted`], and an expansion that terminates
    /// inside the scan (making the run infinite) raises
    /// [`Error::ExpansionTerminated`].
    pub fn zero_run_after(
        &self,
        x: &ExactRational,
        n: usize,
        max_scan: u64,
    ) -> Result<u64> {
        let mut stream = self.digit_stream(x)?;
        for _ in 0..n {
            stream.next_digit()?;
            if stream.terminated() {
                return Err(Error::ExpansionTerminated { depth: n, requested: n });
            }
        }
        let mut run = 0u64;
        loop {
            if stream.terminated() {
                return Err(Error::ExpansionTerminated {
                    depth: n + run as usize,
                    requested: n,
                });
            }
            if run >= max_scan {
                return Err(Error::LookaheadExhausted { position: n, len: max_scan as usize });
            }
            if stream.next_digit()? != 0 {
                return Ok(run);
            }
            run += 1;
        }
    }
}

/// Digits are extracted from integer bases in batches of this size via one
/// big division and a radix conversion.
const INT_CHUNK: u32 = 512;

enum OrbitState {
    Integer {
        beta: Int,
        pow_chunk: Int,
        rem: Int,
        den: Int,
        buf: VecDeque<Digit>,
    },
    Rational {
        p: Int,
        q: Int,
        num: Int,
        den: Int,
    },
    Algebraic {
        y: FieldElement,
    },
}

/// Streaming digit generator for one point.
pub struct DigitStream {
    state: OrbitState,
}

impl DigitStream {
    /// Whether the orbit has reached exactly zero (every further digit is 0).
    /// For degree >= 3 bases with a reducible defining polynomial this test
    /// can lag behind the truth; it never falsely reports termination.
    pub fn terminated(&self) -> bool {
        match &self.state {
            OrbitState::Integer { rem, buf, .. } => rem.is_zero() && buf.iter().all(|d| *d == 0),
            OrbitState::Rational { num, .. } => num.is_zero(),
            OrbitState::Algebraic { y } => y.is_zero(),
        }
    }

    pub fn next_digit(&mut self) -> Result<Digit> {
        match &mut self.state {
            OrbitState::Integer { beta, pow_chunk, rem, den, buf } => {
                if let Some(d) = buf.pop_front() {
                    return Ok(d);
                }
                // Produce the next INT_CHUNK digits with one multiply/divmod:
                // head = floor(rem * beta^chunk / den), new rem the remainder.
                let scaled: Int = &*rem * &*pow_chunk;
                let (head, next_rem) = scaled.div_rem(den);
                *rem = next_rem;
                push_radix_digits(&head, beta, INT_CHUNK as usize, buf)?;
                Ok(buf.pop_front().expect("chunk is non-empty"))
            }
            OrbitState::Rational { p, q, num, den } => {
                *num *= &*p;
                *den *= &*q;
                let d = num.div_floor(den);
                *num -= &d * &*den;
                d.to_u64().ok_or_else(|| Error::invalid("digit exceeds u64"))
            }
            OrbitState::Algebraic { y } => {
                let next = y.mul_base();
                let d = next.floor()?;
                *y = next.sub_int(&d);
                d.to_u64().ok_or_else(|| Error::invalid("digit exceeds u64"))
            }
        }
    }
}

/// Append the base-`beta` digits of `value`, zero-padded to `width`, to `buf`
/// most-significant first.
fn push_radix_digits(
    value: &Int,
    beta: &Int,
    width: usize,
    buf: &mut VecDeque<Digit>,
) -> Result<()> {
    debug_assert!(!value.is_negative());
    let start = buf.len();
    if let Some(radix) = beta.to_u32().filter(|b| *b >= 2 && *b <= 256) {
        let (_, mag) = value.to_radix_le(radix);
        for d in &mag {
            buf.push_back(*d as Digit);
        }
    } else {
        let mut v = value.clone();
        while !v.is_zero() {
            let (q, r) = v.div_rem(beta);
            buf.push_back(r.to_u64().ok_or_else(|| Error::invalid("digit exceeds u64"))?);
            v = q;
        }
    }
    debug_assert!(buf.len() - start <= width);
    while buf.len() - start < width {
        buf.push_back(0);
    }
    // Digits were appended least-significant first; flip the fresh block so
    // the stream pops most-significant first.
    let mut fresh: Vec<Digit> = buf.drain(start..).collect();
    fresh.reverse();
    buf.extend(fresh);
    Ok(())
}

/// The follower weight of a digit prefix: the cylinder of a word of length n
/// has width `t * base^{-n}` with `t` in `(0, 1]`.  Reading digit `e` from
/// weight `t` is possible iff `e < base * t`, and leaves
/// `min(1, base*t - e)`.
#[derive(Clone, Debug)]
enum Follower {
    Rat(ExactRational),
    Alg(FieldElement),
}

impl Follower {
    fn one(system: &BetaSystem) -> Follower {
        match system.path {
            BasePath::Algebraic => Follower::Alg(system.field.one()),
            _ => Follower::Rat(ExactRational::one()),
        }
    }

    /// Canonical hashable key for state merging.
    fn key(&self) -> Vec<u8> {
        match self {
            Follower::Rat(r) => {
                let mut k = vec![0u8];
                k.extend(r.numer().to_signed_bytes_le());
                k.push(255);
                k.extend(r.denom().to_signed_bytes_le());
                k
            }
            Follower::Alg(e) => {
                let e = e.reduce();
                let mut k = vec![1u8];
                let (nums, den) = e.raw_parts();
                for n in nums {
                    k.extend(n.to_signed_bytes_le());
                    k.push(255);
                }
                k.push(254);
                k.extend(den.to_signed_bytes_le());
                k
            }
        }
    }

    /// Number of digits appendable from this weight: `ceil(base * t)`.
    fn digit_count(&self, system: &BetaSystem) -> Result<u64> {
        match self {
            Follower::Rat(t) => {
                let beta = system.field.descriptor().as_rational().unwrap();
                let bt = beta * t;
                let ceil: Int = -((-bt.numer()).div_floor(bt.denom()));
                ceil.to_u64().ok_or_else(|| Error::invalid("digit count exceeds u64"))
            }
            Follower::Alg(t) => {
                let bt = t.mul_base();
                let fl = bt.floor()?;
                let exact = bt.sub_int(&fl).sign()? == 0;
                let ceil = if exact { fl } else { fl + 1u8 };
                ceil.to_u64().ok_or_else(|| Error::invalid("digit count exceeds u64"))
            }
        }
    }

    /// Weight after reading digit `e`, or `None` when `e` is not appendable.
    fn step(&self, system: &BetaSystem, e: Digit) -> Result<Option<Follower>> {
        match self {
            Follower::Rat(t) => {
                let beta = system.field.descriptor().as_rational().unwrap();
                let w = beta * t - ExactRational::from_integer(Int::from(e));
                if !w.is_positive() {
                    return Ok(None);
                }
                Ok(Some(Follower::Rat(w.min(ExactRational::one()))))
            }
            Follower::Alg(t) => {
                let w = t.mul_base().sub_int(&Int::from(e));
                if w.sign()? <= 0 {
                    return Ok(None);
                }
                Ok(Some(match w.cmp_rational(&ExactRational::one())? {
                    Ordering::Greater => Follower::Alg(system.field.one()),
                    _ => Follower::Alg(w),
                }))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::make_rational;

    fn system(spec: &str) -> BetaSystem {
        BetaSystem::from_spec(spec).unwrap()
    }

    fn rat(p: i64, q: i64) -> ExactRational {
        make_rational(p, q).unwrap()
    }

    #[test]
    fn decimal_digits_of_simple_fractions() {
        let ten = system("dec:10");
        assert_eq!(ten.digits(&rat(1, 4), 5).unwrap(), vec![2, 5, 0, 0, 0]);
        assert_eq!(ten.digits(&rat(1, 3), 6).unwrap(), vec![3, 3, 3, 3, 3, 3]);
        assert_eq!(
            ten.digits(&rat(1, 7), 12).unwrap(),
            vec![1, 4, 2, 8, 5, 7, 1, 4, 2, 8, 5, 7]
        );
        let two = system("rat:2/1");
        assert_eq!(two.digits(&rat(5, 16), 6).unwrap(), vec![0, 1, 0, 1, 0, 0]);
        // Digit batching must agree with the naive orbit across chunk edges.
        let x = rat(123456789, 999999937);
        let digits = ten.digits(&x, 2 * INT_CHUNK as usize + 17).unwrap();
        let mut num = x.numer().clone();
        let den = x.denom().clone();
        for (i, d) in digits.iter().enumerate() {
            num *= 10;
            let expect = num.div_floor(&den);
            num -= &expect * &den;
            assert_eq!(Int::from(*d), expect, "digit {i}");
        }
    }

    #[test]
    fn golden_base_periodic_point() {
        // Under the golden base, 1/2 maps 1/2 -> phi/2 -> (phi-1)/2 -> 1/2,
        // giving digits (0, 1, 0) repeated.
        let g = system("alg:-1,-1,1@[1,2]");
        assert_eq!(
            g.digits(&rat(1, 2), 9).unwrap(),
            vec![0, 1, 0, 0, 1, 0, 0, 1, 0]
        );
    }

    #[test]
    fn sqrt2_base_terminating_point() {
        // 1/2 = (sqrt 2)^{-2}: digits (0, 1) then exact termination.
        let s = system("alg:-2,0,1@[1,2]");
        let mut stream = s.digit_stream(&rat(1, 2)).unwrap();
        assert_eq!(stream.next_digit().unwrap(), 0);
        assert!(!stream.terminated());
        assert_eq!(stream.next_digit().unwrap(), 1);
        assert!(stream.terminated());
        assert_eq!(stream.next_digit().unwrap(), 0);
    }

    #[test]
    fn input_domain_is_validated() {
        let ten = system("dec:10");
        assert!(ten.digit_stream(&rat(1, 1)).is_err());
        assert!(ten.digit_stream(&rat(-1, 2)).is_err());
        assert!(ten.digit_stream(&rat(0, 1)).is_ok());
    }

    #[test]
    fn unit_expansions() {
        // Integer base: single digit (base), terminating.
        let ten = system("dec:10");
        assert_eq!(
            ten.unit_expansion(50).unwrap(),
            UnitExpansion::Terminates { digits: vec![10] }
        );
        // Golden: (1, 1), terminating.
        let g = system("alg:-1,-1,1@[1,2]");
        assert_eq!(
            g.unit_expansion(50).unwrap(),
            UnitExpansion::Terminates { digits: vec![1, 1] }
        );
        // sqrt(2): 1 -> sqrt2 - 1 (digit 1), then 2 - sqrt2 ~ 0.586 (digit 0),
        // then 2 sqrt2 - 2 ~ 0.828 (digit 0), then 4 - 2 sqrt2 ~ 1.17 (digit 1);
        // non-terminating (sqrt2 is not a root of any digit polynomial).
        let s = system("alg:-2,0,1@[1,2]");
        let u = s.unit_expansion(12).unwrap();
        assert!(!u.terminates());
        assert_eq!(&u.digits()[..4], &[1, 0, 0, 1]);
        // Rational non-integer base: provably never terminates.
        let r = system("rat:3/2");
        let u = r.unit_expansion(200).unwrap();
        assert!(!u.terminates());
        assert_eq!(&u.digits()[..9], &[1, 0, 1, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn reference_words() {
        let g = system("alg:-1,-1,1@[1,2]");
        assert_eq!(g.reference_word(8).unwrap(), vec![1, 0, 1, 0, 1, 0, 1, 0]);
        let ten = system("dec:10");
        assert_eq!(ten.reference_word(5).unwrap(), vec![9, 9, 9, 9, 9]);
        let r = system("rat:3/2");
        assert_eq!(r.reference_word(9).unwrap(), vec![1, 0, 1, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn admissibility_follows_the_reference_word() {
        let g = system("alg:-1,-1,1@[1,2]");
        assert!(g.is_admissible(&[1, 0, 1, 0, 1]).unwrap());
        assert!(g.is_admissible(&[0, 1, 0, 0, 1]).unwrap());
        assert!(!g.is_admissible(&[1, 1]).unwrap());
        assert!(!g.is_admissible(&[0, 1, 1, 0]).unwrap());
        assert!(!g.is_admissible(&[2]).unwrap());
        // Lexicographic characterization: a word is admissible iff every
        // suffix, zero-extended, is lexicographically below the reference
        // word.  Cross-check all words over {0,1,2} up to length 6.
        for base in ["alg:-1,-1,1@[1,2]", "rat:3/2", "alg:-2,0,1@[1,2]"] {
            let sys = system(base);
            for len in 1..=6usize {
                for code in 0..3usize.pow(len as u32) {
                    let mut c = code;
                    let word: Vec<Digit> = (0..len)
                        .map(|_| {
                            let d = (c % 3) as Digit;
                            c /= 3;
                            d
                        })
                        .collect();
                    let expected = {
                        let reference = sys.reference_word(len + 32).unwrap();
                        (0..len).all(|k| {
                            // compare (word[k..], 0, 0, ...) < reference
                            let suffix = &word[k..];
                            let mut strictly_less = false;
                            for (i, r) in reference.iter().enumerate() {
                                let w = suffix.get(i).copied().unwrap_or(0);
                                if w != *r {
                                    strictly_less = w < *r;
                                    break;
                                }
                            }
                            strictly_less
                        })
                    };
                    assert_eq!(
                        sys.is_admissible(&word).unwrap(),
                        expected,
                        "base {base} word {word:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn admissible_counts() {
        let g = system("alg:-1,-1,1@[1,2]");
        // Fibonacci counts: 2, 3, 5, 8, 13 for lengths 1..=5.
        for (n, expect) in [(1u64, 2u64), (2, 3), (3, 5), (4, 8), (5, 13)] {
            assert_eq!(g.count_admissible(n as usize).unwrap(), Int::from(expect));
        }
        let ten = system("dec:10");
        assert_eq!(ten.count_admissible(3).unwrap(), Int::from(1000));
        let r = system("rat:3/2");
        assert_eq!(r.count_admissible(3).unwrap(), Int::from(5));
        // Enumeration matches the count and every word is admissible.
        let words = g.enumerate_admissible(5, 100).unwrap();
        assert_eq!(words.len(), 13);
        for w in &words {
            assert!(g.is_admissible(w).unwrap());
        }
        assert!(words.windows(2).all(|p| p[0] < p[1]));
        assert!(matches!(
            g.enumerate_admissible(5, 12),
            Err(Error::BudgetExceeded { budget: 12, .. })
        ));
    }

    #[test]
    fn growth_bounds_on_admissible_counts() {
        // base^n <= count(n), and count(n) <= base^{n+1}/(base-1), certified
        // in exact arithmetic.
        for spec in ["alg:-1,-1,1@[1,2]", "alg:-2,0,1@[1,2]", "rat:3/2"] {
            let sys = system(spec);
            let f = sys.field();
            for n in 1..=12usize {
                let count = sys.count_admissible(n).unwrap();
                let mut pow = f.one();
                for _ in 0..n {
                    pow = pow.mul_base();
                }
                // pow = base^n <= count
                assert!(
                    pow.cmp_rational(&ExactRational::from_integer(count.clone()))
                        .unwrap()
                        != Ordering::Greater,
                    "{spec} n={n}: lower bound"
                );
                // count * (base - 1) <= base^{n+1}
                let lhs = f
                    .beta()
                    .sub_int(&Int::one())
                    .scale_int(&count);
                let rhs = pow.mul_base();
                assert!(
                    lhs.cmp_exact(&rhs).unwrap() != Ordering::Greater,
                    "{spec} n={n}: upper bound"
                );
            }
        }
    }

    #[test]
    fn golden_cylinders_tile_the_interval() {
        let g = system("alg:-1,-1,1@[1,2]");
        let words = g.enumerate_admissible(2, 10).unwrap();
        assert_eq!(words, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        let cyls: Vec<Interval> = words.iter().map(|w| g.cylinder(w).unwrap()).collect();
        // Adjacent cylinders share endpoints exactly; the union is [0, 1).
        assert_eq!(
            cyls[0].lo.cmp_exact(&Value::Rat(ExactRational::zero())).unwrap(),
            Ordering::Equal
        );
        for i in 0..cyls.len() - 1 {
            assert_eq!(
                cyls[i].hi.cmp_exact(&cyls[i + 1].lo).unwrap(),
                Ordering::Equal,
                "gap between cylinder {i} and {}",
                i + 1
            );
        }
        assert_eq!(
            cyls.last().unwrap().hi.cmp_exact(&Value::Rat(ExactRational::one())).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn integer_base_cylinder() {
        let two = system("rat:2/1");
        let c = two.cylinder(&[0, 1, 1, 0]).unwrap();
        assert_eq!(
            c.lo.cmp_exact(&Value::Rat(rat(6, 16))).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            c.hi.cmp_exact(&Value::Rat(rat(7, 16))).unwrap(),
            Ordering::Equal
        );
        assert!(c.lo_closed && !c.hi_closed);
        // A cylinder contains exactly the points whose digits extend the word.
        let inside = rat(13, 32); // 0.01101
        let outside = rat(7, 16);
        assert!(c.contains(&Value::Rat(inside)).unwrap());
        assert!(!c.contains(&Value::Rat(outside)).unwrap());
        assert!(two.cylinder(&[2, 0]).is_err());
    }

    #[test]
    fn cylinders_contain_their_points() {
        // For several bases and points: the depth-n cylinder of x's own digit
        // word contains x, and deeper cylinders nest.
        for spec in ["dec:10", "rat:3/2", "alg:-1,-1,1@[1,2]", "alg:-2,0,1@[1,2]"] {
            let sys = system(spec);
            let x = rat(137, 1024);
            let digits = sys.digits(&x, 9).unwrap();
            let mut previous: Option<Interval> = None;
            for n in 1..=9usize {
                let c = sys.cylinder(&digits[..n]).unwrap();
                assert!(
                    c.contains(&Value::Rat(x.clone())).unwrap(),
                    "{spec}: x outside its own depth-{n} cylinder"
                );
                if let Some(p) = previous {
                    assert!(c.subset_of(&p).unwrap(), "{spec}: depth {n} not nested");
                }
                previous = Some(c);
            }
        }
    }

    #[test]
    fn cylinder_width_matches_follower_weight() {
        // |J(w)| = t * base^{-n}, and base^{-n-1} < |J(w)| <= base^{-n}.
        let g = system("alg:-1,-1,1@[1,2]");
        for w in g.enumerate_admissible(6, 100).unwrap() {
            let c = g.cylinder(&w).unwrap();
            let f = g.field();
            let (lo, hi) = match (&c.lo, &c.hi) {
                (Value::Alg(a), Value::Alg(b)) => (a.clone(), b.clone()),
                _ => unreachable!(),
            };
            let width = hi.sub(&lo);
            // Golden follower weights are exactly 1 or 1/base, so
            // base^{-7} <= width <= base^{-6}, both ends attained.
            let mut pow = f.one();
            for _ in 0..6 {
                pow = pow.div_base();
            }
            assert!(width.cmp_exact(&pow).unwrap() != Ordering::Greater);
            assert!(width.cmp_exact(&pow.div_base()).unwrap() != Ordering::Less);
        }
    }

    #[test]
    fn zero_runs() {
        let two = system("rat:2/1");
        // 1/3 = 0.010101...: after position 1 comes the digit 1 (run 0);
        // after position 2 comes 0 then 1 (run 1).
        assert_eq!(two.zero_run_after(&rat(1, 3), 1, 100).unwrap(), 0);
        assert_eq!(two.zero_run_after(&rat(1, 3), 2, 100).unwrap(), 1);
        // 3/8 = 0.011: the expansion terminates, so the run after position 3
        // is infinite.
        assert!(matches!(
            two.zero_run_after(&rat(3, 8), 3, 100),
            Err(Error::ExpansionTerminated { .. })
        ));
        // Lookahead cap is honored.
        assert!(matches!(
            two.zero_run_after(&rat(1, 1024), 0, 5),
            Err(Error::LookaheadExhausted { .. })
        ));
        // Golden base, x = 1/2, digits 010010010...
        let g = system("alg:-1,-1,1@[1,2]");
        assert_eq!(g.zero_run_after(&rat(1, 2), 1, 100).unwrap(), 0);
        assert_eq!(g.zero_run_after(&rat(1, 2), 2, 100).unwrap(), 2);
        assert_eq!(g.zero_run_after(&rat(1, 2), 3, 100).unwrap(), 1);
        assert_eq!(g.zero_run_after(&rat(1, 2), 4, 100).unwrap(), 0);
    }

    #[test]
    fn cylinder_width_vs_zero_run_bound() {
        // base^{-n - run - 1} <= |J_n(x)| <= base^{-n}: the cylinder width is
        // pinned between powers of the base determined by the zero run.
        let g = system("alg:-1,-1,1@[1,2]");
        let f = g.field();
        let x = rat(1, 2);
        for n in 1..=9usize {
            let digits = g.digits(&x, n).unwrap();
            let c = g.cylinder(&digits).unwrap();
            let (lo, hi) = match (&c.lo, &c.hi) {
                (Value::Alg(a), Value::Alg(b)) => (a.clone(), b.clone()),
                _ => unreachable!(),
            };
            let width = hi.sub(&lo);
            let run = g.zero_run_after(&x, n, 200).unwrap();
            let mut upper = f.one();
            for _ in 0..n {
                upper = upper.div_base();
            }
            let mut lower = upper.clone();
            for _ in 0..=run {
                lower = lower.div_base();
            }
            assert!(width.cmp_exact(&upper).unwrap() != Ordering::Greater, "n={n}");
            assert!(width.cmp_exact(&lower).unwrap() != Ordering::Less, "n={n}");
        }
    }
}
