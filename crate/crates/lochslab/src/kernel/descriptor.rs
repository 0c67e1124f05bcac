//! Descriptions of exactly-representable real constants and their certified
//! refinement to dyadic enclosures.
//!
//! A constant is either an exact rational or the unique root of an integer
//! polynomial inside a rational isolating interval.  Construction normalizes
//! the polynomial (primitive, squarefree, small rational roots split off),
//! certifies via a Sturm chain that the interval isolates exactly one root,
//! and collapses to the rational form whenever the isolated root turns out to
//! be rational.  Refinement then keeps a sign-change bracket and shrinks it by
//! bisection with Newton acceleration, so enclosures of increasing precision
//! are nested and always genuinely contain the root.

use crate::kernel::ball::Ball;
use crate::kernel::rational::{make_rational, ExactRational};
use crate::{Error, Int, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

/// Maximum |constant/leading| coefficient magnitude for which rational-root
/// splitting is attempted.  Larger coefficients merely skip an optimization;
/// certification does not depend on it.
const RATIONAL_ROOT_SEARCH_LIMIT: u64 = 10_000_000;

/// An exactly-described real number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealDescriptor {
    /// An exact rational (decimal literals are converted on construction).
    Rational(ExactRational),
    /// The unique root of `poly` (integer coefficients, constant term first)
    /// in the closed interval `[lo, hi]`.  Invariants established at
    /// construction: `poly` is primitive, squarefree, positive leading
    /// coefficient, degree >= 2, neither endpoint is a root, and the Sturm
    /// count of roots in the interval is exactly one.
    AlgebraicRoot {
        poly: Vec<Int>,
        lo: ExactRational,
        hi: ExactRational,
    },
}

impl RealDescriptor {
    pub fn rational(r: ExactRational) -> Self {
        RealDescriptor::Rational(r)
    }

    /// Validate and normalize an algebraic-root description.
    pub fn algebraic(coeffs: Vec<Int>, lo: ExactRational, hi: ExactRational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::invalid("isolating interval must satisfy lo < hi"));
        }
        let mut poly = coeffs;
        while poly.last().map(Zero::is_zero).unwrap_or(false) {
            poly.pop();
        }
        if poly.len() < 2 {
            return Err(Error::invalid("polynomial must have degree >= 1"));
        }
        // Split off z^k factors; 0 is then a candidate root like any other.
        let mut rational_roots: Vec<ExactRational> = Vec::new();
        let zero_order = poly.iter().take_while(|c| c.is_zero()).count();
        if zero_order > 0 {
            poly.drain(..zero_order);
            rational_roots.push(ExactRational::zero());
        }
        let mut poly = primitive_part(poly);
        poly = squarefree_part(poly);
        if poly_degree(&poly) >= 1 {
            // The Sturm certificate runs on the squarefree polynomial (plus the
            // split-off zero root, if the interval contains it).
            let at_lo = eval_poly_rational(&poly, &lo);
            let at_hi = eval_poly_rational(&poly, &hi);
            if at_lo.is_zero() || at_hi.is_zero() {
                return Err(Error::invalid(
                    "isolating interval endpoint is itself a root; shrink or shift the interval",
                ));
            }
            let mut count = sturm_count(&poly, &lo, &hi);
            let zero_in = rational_roots.iter().any(|r| &lo <= r && r <= &hi);
            if zero_in {
                count += 1;
            }
            if count != 1 {
                return Err(Error::invalid(format!(
                    "isolating interval contains {count} roots; exactly one is required"
                )));
            }
        }
        // Split small rational roots off so quadratic survivors are irreducible.
        let (mut poly, mut found) = split_rational_roots(poly);
        rational_roots.append(&mut found);
        if let Some(r) = rational_roots.iter().find(|r| &&lo <= r && r <= &&hi) {
            // The unique isolated root is this rational number.
            return Ok(RealDescriptor::Rational(r.clone()));
        }
        if poly_degree(&poly) < 1 {
            return Err(Error::invalid(
                "polynomial has no root in the isolating interval",
            ));
        }
        if poly_degree(&poly) == 1 {
            // -c0/c1 fell outside the search limit but is still rational.
            let r = make_rational(-poly[0].clone(), poly[1].clone())?;
            if lo <= r && r <= hi {
                return Ok(RealDescriptor::Rational(r));
            }
            return Err(Error::invalid(
                "polynomial has no root in the isolating interval",
            ));
        }
        if poly.last().map(Signed::is_negative).unwrap_or(false) {
            for c in &mut poly {
                *c = -&*c;
            }
        }
        let desc = RealDescriptor::AlgebraicRoot { poly, lo, hi };
        // Re-certify on the final polynomial: the root survived the splitting.
        if let RealDescriptor::AlgebraicRoot { poly, lo, hi } = &desc {
            if sturm_count(poly, lo, hi) != 1 {
                return Err(Error::invalid(
                    "polynomial has no irrational root in the isolating interval",
                ));
            }
        }
        Ok(desc)
    }

    /// Degree of the minimal description: 1 for rationals.
    pub fn degree(&self) -> usize {
        match self {
            RealDescriptor::Rational(_) => 1,
            RealDescriptor::AlgebraicRoot { poly, .. } => poly_degree(poly),
        }
    }

    pub fn as_rational(&self) -> Option<&ExactRational> {
        match self {
            RealDescriptor::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Certified enclosure with radius at most `2^-bits`.  Rational values
    /// come back exact.  Enclosures for increasing `bits` are nested.
    pub fn refine_to(&self, bits: u64) -> Result<Ball> {
        match self {
            RealDescriptor::Rational(r) => Ok(Ball::exact(r.clone())),
            RealDescriptor::AlgebraicRoot { poly, lo, hi } => {
                let (num_lo, num_hi, prec) = refine_root(poly, lo, hi, bits)?;
                let denom: Int = Int::one() << prec;
                Ok(Ball::from_endpoints(
                    make_rational(num_lo, denom.clone())?,
                    make_rational(num_hi, denom)?,
                ))
            }
        }
    }

    /// Dyadic enclosure `[m, m+1] / 2^bits` (collapsed for exact dyadics).
    /// This is the representation the hot evaluation paths consume.
    pub fn refine_dyadic(&self, bits: u64) -> Result<(Int, Int, u64)> {
        match self {
            RealDescriptor::Rational(r) => {
                let scaled: Int = r.numer() << bits;
                let lo = scaled.div_floor(r.denom());
                let hi = -(-&scaled).div_floor(r.denom());
                Ok((lo, hi, bits))
            }
            RealDescriptor::AlgebraicRoot { poly, lo, hi } => refine_root(poly, lo, hi, bits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealDescriptor::Rational(r) => {
                crate::kernel::fix::FixInterval::from_ratio(r).to_f64()
            }
            RealDescriptor::AlgebraicRoot { .. } => self
                .refine_to(80)
                .map(|b| b.to_f64())
                .unwrap_or(f64::NAN),
        }
    }
}

/// Parse a base specification string:
/// `rat:<num>/<den>`, `dec:<decimal>`, or `alg:<c0,c1,...,ck>@[<lo>,<hi>]`.
pub fn parse_beta_spec(spec: &str) -> Result<RealDescriptor> {
    if let Some(body) = spec.strip_prefix("rat:") {
        return Ok(RealDescriptor::Rational(parse_rational_literal(body)?));
    }
    if let Some(body) = spec.strip_prefix("dec:") {
        return Ok(RealDescriptor::Rational(parse_decimal_literal(body)?));
    }
    if let Some(body) = spec.strip_prefix("alg:") {
        let (coeff_part, interval_part) = body
            .split_once('@')
            .ok_or_else(|| Error::invalid("alg: spec needs @[lo,hi] after coefficients"))?;
        let coeffs = coeff_part
            .split(',')
            .map(|c| {
                BigInt::from_str(c.trim())
                    .map_err(|_| Error::invalid(format!("bad integer coefficient {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let inner = interval_part
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::invalid("interval must look like [lo,hi]"))?;
        let (lo_s, hi_s) = inner
            .split_once(',')
            .ok_or_else(|| Error::invalid("interval must look like [lo,hi]"))?;
        return RealDescriptor::algebraic(
            coeffs,
            parse_rational_literal(lo_s)?,
            parse_rational_literal(hi_s)?,
        );
    }
    Err(Error::invalid(format!(
        "base spec {spec:?} must start with rat:, dec:, or alg:"
    )))
}

/// Accepts `p/q`, plain integers, and decimal literals.
pub fn parse_rational_literal(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|_| Error::invalid(format!("bad numerator {num:?}")))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| Error::invalid(format!("bad denominator {den:?}")))?;
        return make_rational(n, d);
    }
    if s.contains('.') {
        return parse_decimal_literal(s);
    }
    let n = BigInt::from_str(s).map_err(|_| Error::invalid(format!("bad integer {s:?}")))?;
    Ok(ExactRational::from_integer(n))
}

fn parse_decimal_literal(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::invalid(format!("bad decimal literal {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::invalid(format!("bad decimal literal {s:?}")));
    }
    let num = BigInt::from_str(&digits).map_err(|_| Error::invalid("bad decimal literal"))?;
    let den = Int::from(10u8).pow(frac_part.len() as u32);
    make_rational(num * sign, den)
}

// ---------------------------------------------------------------------------
// Integer / rational polynomial helpers
// ---------------------------------------------------------------------------

pub(crate) fn poly_degree(p: &[Int]) -> usize {
    p.len().saturating_sub(1)
}

/// Evaluate an integer polynomial at a rational point, exactly.
pub(crate) fn eval_poly_rational(p: &[Int], x: &ExactRational) -> ExactRational {
    let mut acc = ExactRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + ExactRational::from_integer(c.clone());
    }
    acc
}

/// Sign of `p(m / 2^q)`, computed exactly in integers.
pub(crate) fn sign_at_dyadic(p: &[Int], m: &Int, q: u64) -> i32 {
    // p(m/2^q) * 2^(q*deg) = sum c_i m^i 2^(q(deg-i))
    let deg = poly_degree(p) as u64;
    let mut acc = Int::zero();
    let mut mpow = Int::one();
    for (i, c) in p.iter().enumerate() {
        let shift = q * (deg - i as u64);
        acc += c * &mpow << shift;
        mpow *= m;
    }
    match acc.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

pub(crate) fn primitive_part(mut p: Vec<Int>) -> Vec<Int> {
    let mut g = Int::zero();
    for c in &p {
        g = g.gcd(c);
    }
    if g > Int::one() {
        for c in &mut p {
            *c = &*c / &g;
        }
    }
    p
}

fn derivative(p: &[Int]) -> Vec<Int> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Int::from(i))
        .collect()
}

/// Rational-coefficient polynomial remainder (for gcd / Sturm chains).
fn rational_rem(a: &[ExactRational], b: &[ExactRational]) -> Vec<ExactRational> {
    let mut r: Vec<ExactRational> = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    while r.len() >= b.len() && r.len() > 0 {
        let dr = r.len() - 1;
        let factor = &r[dr] / lead;
        if !factor.is_zero() {
            for i in 0..=db {
                let idx = dr - db + i;
                let sub = &b[i] * &factor;
                r[idx] = &r[idx] - &sub;
            }
        }
        r.pop();
        while r.last().map(Zero::is_zero).unwrap_or(false) {
            r.pop();
        }
        if r.len() < b.len() {
            break;
        }
    }
    r
}

fn to_rational_poly(p: &[Int]) -> Vec<ExactRational> {
    p.iter()
        .map(|c| ExactRational::from_integer(c.clone()))
        .collect()
}

fn from_rational_poly(p: &[ExactRational]) -> Vec<Int> {
    // Clear denominators and take the primitive part.
    let mut lcm = Int::one();
    for c in p {
        lcm = lcm.lcm(c.denom());
    }
    let ints: Vec<Int> = p.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    primitive_part(ints)
}

pub(crate) fn rational_gcd_poly(a: &[Int], b: &[Int]) -> Vec<Int> {
    let mut x = to_rational_poly(a);
    let mut y = to_rational_poly(b);
    while !y.is_empty() {
        let r = rational_rem(&x, &y);
        x = y;
        y = r;
    }
    from_rational_poly(&x)
}

/// Exact division of integer polynomials known to divide evenly (over Q).
pub(crate) fn exact_div_poly(num: &[Int], den: &[Int]) -> Vec<Int> {
    let n = to_rational_poly(num);
    let d = to_rational_poly(den);
    let mut rem = n;
    let deg_d = d.len() - 1;
    let mut quot = vec![ExactRational::zero(); rem.len() - deg_d];
    let lead = d[deg_d].clone();
    for k in (0..quot.len()).rev() {
        let idx = k + deg_d;
        if idx >= rem.len() {
            continue;
        }
        let f = &rem[idx] / &lead;
        quot[k] = f.clone();
        for i in 0..=deg_d {
            let sub = &d[i] * &f;
            rem[k + i] = &rem[k + i] - &sub;
        }
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "non-exact polynomial division");
    from_rational_poly(&quot)
}

fn squarefree_part(p: Vec<Int>) -> Vec<Int> {
    if poly_degree(&p) < 2 {
        return p;
    }
    let d = derivative(&p);
    let g = rational_gcd_poly(&p, &d);
    if poly_degree(&g) == 0 {
        return p;
    }
    primitive_part(exact_div_poly(&p, &g))
}

/// Number of sign variations in a sequence, ignoring zeros.
fn sign_variations(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut count = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

pub(crate) fn rational_sign(r: &ExactRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_negative() {
        -1
    } else {
        1
    }
}

/// Count distinct real roots of squarefree `p` in `(lo, hi]`, by Sturm's
/// theorem.  With `p(lo) != 0 != p(hi)` (checked by callers) this equals the
/// count in the closed interval.
pub(crate) fn sturm_count(p: &[Int], lo: &ExactRational, hi: &ExactRational) -> usize {
    let mut chain: Vec<Vec<ExactRational>> = Vec::new();
    chain.push(to_rational_poly(p));
    chain.push(to_rational_poly(&derivative(p)));
    while chain.last().map(|c| !c.is_empty()).unwrap_or(false)
        && chain.last().unwrap().len() > 1
    {
        let n = chain.len();
        let mut r = rational_rem(&chain[n - 2], &chain[n - 1]);
        for c in &mut r {
            *c = -&*c;
        }
        if r.is_empty() {
            break;
        }
        chain.push(r);
    }
    let eval_signs = |x: &ExactRational| -> Vec<i32> {
        chain
            .iter()
            .map(|poly| {
                let mut acc = ExactRational::zero();
                for c in poly.iter().rev() {
                    acc = acc * x + c;
                }
                rational_sign(&acc)
            })
            .collect()
    };
    let va = sign_variations(eval_signs(lo).into_iter());
    let vb = sign_variations(eval_signs(hi).into_iter());
    va.saturating_sub(vb)
}

/// Find and split off rational roots with small numerator/denominator
/// candidates.  Returns the reduced polynomial and the roots found.
fn split_rational_roots(mut p: Vec<Int>) -> (Vec<Int>, Vec<ExactRational>) {
    let mut roots = Vec::new();
    if poly_degree(&p) < 1 {
        return (p, roots);
    }
    loop {
        if poly_degree(&p) < 1 || p[0].is_zero() {
            break;
        }
        let c0 = p[0].magnitude().clone();
        let cd = p.last().unwrap().magnitude().clone();
        let limit = Int::from(RATIONAL_ROOT_SEARCH_LIMIT).into_parts().1;
        if c0 > limit || cd > limit {
            break;
        }
        let c0 = c0.to_u64_digits().first().copied().unwrap_or(0);
        let cd = cd.to_u64_digits().first().copied().unwrap_or(0);
        let mut found = None;
        'outer: for num in divisors(c0) {
            for den in divisors(cd) {
                if Int::from(num).gcd(&Int::from(den)) != Int::one() {
                    continue;
                }
                for sign in [1i64, -1] {
                    let cand = make_rational(Int::from(num) * sign, Int::from(den)).unwrap();
                    if eval_poly_rational(&p, &cand).is_zero() {
                        found = Some(cand);
                        break 'outer;
                    }
                }
            }
        }
        match found {
            Some(r) => {
                // Divide by (den*z - num).
                let lin = vec![-r.numer().clone(), r.denom().clone()];
                p = exact_div_poly(&p, &lin);
                roots.push(r);
            }
            None => break,
        }
    }
    (p, roots)
}

fn divisors(n: u64) -> Vec<u64> {
    if n == 0 {
        return vec![];
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

// ---------------------------------------------------------------------------
// Root refinement
// ---------------------------------------------------------------------------

/// Refine the unique root of `p` in `[lo, hi]` to a dyadic enclosure
/// `[m_lo, m_hi] / 2^prec` with width at most `2^-bits`.
///
/// The returned enclosure is a true bracket: `p` changes sign across it (or an
/// endpoint is an exact dyadic root).  Deterministic, so enclosures for
/// growing `bits` are nested.
fn refine_root(
    p: &[Int],
    lo: &ExactRational,
    hi: &ExactRational,
    bits: u64,
) -> Result<(Int, Int, u64)> {
    if poly_degree(p) == 2 {
        if let Some(res) = refine_quadratic(p, lo, hi, bits)? {
            return Ok(res);
        }
    }
    // Locate a dyadic bracket inside [lo, hi].
    let (mut a, mut b, mut prec) = initial_dyadic_bracket(p, lo, hi)?;
    if a == b {
        // Exact dyadic root; rescale to the requested precision.
        if prec < bits {
            let shift = bits - prec;
            return Ok((&a << shift, &b << shift, bits));
        }
        return Ok((a, b, prec));
    }
    let mut sign_a = sign_at_dyadic(p, &a, prec);
    debug_assert!(sign_a != 0);
    // Invariant: sign(p(a/2^prec)) = sign_a != 0, sign(p(b/2^prec)) = -sign_a
    // (or the loop below already returned an exact hit).
    while prec < bits || &b - &a > Int::one() {
        // Normalize to a one-ulp bracket at current precision by bisection.
        while &b - &a > Int::one() {
            let mid = (&a + &b) >> 1;
            let s = sign_at_dyadic(p, &mid, prec);
            if s == 0 {
                return Ok((mid.clone(), mid, prec));
            }
            if s == sign_a {
                a = mid;
            } else {
                b = mid;
            }
        }
        if prec >= bits {
            break;
        }
        // Try a Newton jump to roughly double the precision.
        let target = (prec * 2).min(bits).max(prec + 1);
        if let Some((na, nb)) = newton_jump(p, &a, prec, target, sign_a) {
            a = na;
            b = nb;
            prec = target;
            sign_a = sign_at_dyadic(p, &a, prec);
            if sign_a == 0 {
                return Ok((a.clone(), a, prec));
            }
        } else {
            // Fall back to one halving step.
            a = &a << 1u32;
            b = &b << 1u32;
            prec += 1;
        }
    }
    Ok((a, b, prec))
}

/// Find a bracket `[a, a+1] / 2^prec` inside `[lo, hi]` across which `p`
/// changes sign (or an exact dyadic root, returned as `a == b`).
///
/// Works by rational bisection: a simple isolated root makes the endpoint
/// signs opposite, each round either finds adjacent dyadic grid points that
/// bracket the root or shrinks the rational bracket by half, and the root's
/// positive distance to any non-dyadic endpoint guarantees termination.
fn initial_dyadic_bracket(
    p: &[Int],
    lo: &ExactRational,
    hi: &ExactRational,
) -> Result<(Int, Int, u64)> {
    let mut rlo = lo.clone();
    let mut rhi = hi.clone();
    let sign_lo = rational_sign(&eval_poly_rational(p, &rlo));
    let sign_hi = rational_sign(&eval_poly_rational(p, &rhi));
    if sign_lo == 0 || sign_hi == 0 || sign_lo == sign_hi {
        return Err(Error::RefinementFailure(
            "isolating interval does not show a sign change".into(),
        ));
    }
    for _ in 0..200_000 {
        // Grid precision chosen so [rlo, rhi] spans at least 4 ulps.
        let width = &rhi - &rlo;
        let prec = (width.denom().bits() as i64 - width.numer().bits() as i64 + 3).max(2) as u64;
        let scale: Int = Int::one() << prec;
        let first: Int = -(-(rlo.numer() * &scale)).div_floor(rlo.denom()); // ceil
        let last: Int = (rhi.numer() * &scale).div_floor(rhi.denom()); // floor
        let mut prev = first.clone();
        let mut prev_sign = sign_at_dyadic(p, &prev, prec);
        if prev_sign == 0 {
            return Ok((prev.clone(), prev, prec));
        }
        let mut cur = &prev + 1u8;
        while cur <= last {
            let s = sign_at_dyadic(p, &cur, prec);
            if s == 0 {
                return Ok((cur.clone(), cur, prec));
            }
            if s != prev_sign {
                // Adjacent grid points with opposite signs bracket the unique
                // root of the interval.
                return Ok((prev, cur, prec));
            }
            prev = cur.clone();
            prev_sign = s;
            cur += 1u8;
        }
        // The sign change hides between a rational endpoint and the nearest
        // grid point; shrink the rational bracket by bisection and retry.
        let mid = (&rlo + &rhi) / ExactRational::from_integer(Int::from(2));
        let sm = rational_sign(&eval_poly_rational(p, &mid));
        if sm == 0 {
            // The unique root is this exact rational.  Produce a one-ulp
            // dyadic bracket strictly inside the current rational bracket so
            // the sign-change invariant holds for the caller.
            let mut prec = mid.denom().bits() + 1;
            loop {
                let m: Int = (mid.numer() << prec).div_floor(mid.denom());
                let m_r = make_rational(m.clone(), Int::one() << prec)?;
                if m_r == mid {
                    return Ok((m.clone(), m, prec)); // dyadic root, exact
                }
                let m1_r = make_rational(&m + 1u8, Int::one() << prec)?;
                if m_r > rlo && m1_r < rhi {
                    return Ok((m.clone(), m + 1u8, prec));
                }
                prec += 8;
            }
        }
        if sm == sign_lo {
            rlo = mid;
        } else {
            rhi = mid;
        }
    }
    Err(Error::RefinementFailure(
        "could not bracket the root on a dyadic grid".into(),
    ))
}

/// Attempt one Newton step from the bracket `[a, a+1]/2^prec` to a one-or-few
/// ulp bracket at precision `target`.  Returns `None` if the candidate fails
/// to bracket (caller falls back to bisection).
fn newton_jump(p: &[Int], a: &Int, prec: u64, target: u64, sign_a: i32) -> Option<(Int, Int)> {
    // Exact p(x0) and p'(x0) at x0 = (2a+1)/2^(prec+1).
    let q = prec + 1;
    let x0: Int = (a << 1u32) + 1u8;
    let deg = poly_degree(p) as u64;
    let mut val = Int::zero();
    let mut der = Int::zero();
    let mut xpow = Int::one();
    let dp = derivative(p);
    for (i, c) in p.iter().enumerate() {
        val += c * &xpow << (q * (deg - i as u64));
        if i < p.len() - 1 {
            der += &dp[i] * &xpow << ((q * (deg - 1 - i as u64)).min(q * deg));
        }
        xpow *= &x0;
    }
    // val is p(x0)*2^(q*deg); der is p'(x0)*2^(q*(deg-1)).
    if der.is_zero() {
        return None;
    }
    // Newton: x1 = x0 - p(x0)/p'(x0)
    //       = x0 - (val / 2^(q deg)) * (2^(q(deg-1)) / der)
    //       = x0 - val / (der * 2^q).
    // Work at scale 2^target: m1 = round(x1 * 2^target).
    let shift = target; // x0*2^target = x0 << (target - q) ... careful below
    let x0_scaled: Int = if shift >= q { &x0 << (shift - q) } else { &x0 >> (q - shift) };
    let correction_num: Int = &val << shift;
    let correction_den: Int = &der << q;
    let correction = correction_num.div_floor(&correction_den);
    let m1 = x0_scaled - correction;
    // Candidate bracket of a few ulps around m1 at precision `target`.
    for radius in [1u8, 2, 4] {
        let ca: Int = &m1 - radius;
        let cb: Int = &m1 + radius;
        let sa = sign_at_dyadic(p, &ca, target);
        let sb = sign_at_dyadic(p, &cb, target);
        if sa == 0 {
            return Some((ca.clone(), ca));
        }
        if sb == 0 {
            return Some((cb.clone(), cb));
        }
        if sa == sign_a && sb == -sign_a {
            return Some((ca, cb));
        }
    }
    None
}

/// Quadratic fast path: enclose the root via an integer square root.
/// Returns `Ok(None)` if the discriminant is not positive (degenerate input
/// falls back to the generic path, which will fail loudly).
fn refine_quadratic(
    p: &[Int],
    lo: &ExactRational,
    hi: &ExactRational,
    bits: u64,
) -> Result<Option<(Int, Int, u64)>> {
    let (c0, c1, c2) = (&p[0], &p[1], &p[2]);
    let disc: Int = c1 * c1 - Int::from(4) * c0 * c2;
    if !disc.is_positive() {
        return Ok(None);
    }
    // Pick the branch by an exact test: with positive leading coefficient,
    // root(+) = (-c1 + sqrt(D))/(2 c2) >= lo  iff  sqrt(D) >= 2*c2*lo + c1,
    // decided by sign inspection and squaring.  Endpoints are never roots, so
    // equality cannot occur and the comparisons are strict.
    let disc_q = ExactRational::from_integer(disc.clone());
    let two_c2 = ExactRational::from_integer(c2 * 2);
    let c1_q = ExactRational::from_integer(c1.clone());
    let sqrt_ge = |t: &ExactRational| -> bool {
        // sqrt(D) >= t, with D > 0.
        !t.is_positive() || &disc_q >= &(t * t)
    };
    let t_lo = &two_c2 * lo + &c1_q;
    let t_hi = &two_c2 * hi + &c1_q;
    let plus_in = sqrt_ge(&t_lo) && !sqrt_ge(&t_hi);
    let branch: i8 = if plus_in { 1 } else { -1 };
    // Guard bits so the final division still meets the width target.
    let prec = bits + 8;
    let sq: Int = (&disc) << (2 * prec);
    let s = sq.sqrt(); // floor sqrt: s^2 <= disc*4^prec < (s+1)^2
    // root = (-c1 + branch*sqrt(disc)) / (2 c2), with sqrt in [s, s+1]/2^prec.
    let (rn_lo, rn_hi) = if branch == 1 {
        ((-c1 << prec) + &s, (-c1 << prec) + &s + 1u8)
    } else {
        ((-c1 << prec) - &s - 1u8, (-c1 << prec) - &s)
    };
    let den: Int = (c2 * 2) << prec; // positive: leading coeff normalized > 0
    // Enclosure endpoints as dyadic numbers at precision `prec`:
    // m_lo/2^prec <= root <= m_hi/2^prec.
    let m_lo = (&rn_lo << prec).div_floor(&den);
    let m_hi = -(-(&rn_hi << prec)).div_floor(&den);
    debug_assert!({
        let root_lo = make_rational(m_lo.clone(), Int::one() << prec)?;
        let root_hi = make_rational(m_hi.clone(), Int::one() << prec)?;
        &root_hi >= lo && &root_lo <= hi
    });
    Ok(Some((m_lo, m_hi, prec)))
}
