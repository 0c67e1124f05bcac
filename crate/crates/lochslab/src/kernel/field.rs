//! Exact arithmetic in the number field generated by the base.
//!
//! Elements are represented as integer polynomial combinations
//! `(n_0 + n_1 b + ... + n_{d-1} b^{d-1}) / den` of the base `b`, reduced by
//! the defining polynomial.  Every predicate that leaves this representation
//! (sign, floor, comparison) is certified: quadratic bases get closed-form
//! integer sign tests, and higher degrees refine a dyadic enclosure of the
//! base until a separation bound proves the answer.  A reducible defining
//! polynomial cannot produce a wrong answer, only a slower one: when
//! refinement stalls at the bound, a polynomial gcd decides exact vanishing.
//!
//! No silent floating-point fallback exists anywhere in this module; `f64`
//! appears only in explicitly-named approximation accessors.

use crate::kernel::ball::Ball;
use crate::kernel::descriptor::{
    eval_poly_rational, exact_div_poly, poly_degree, rational_gcd_poly, sturm_count,
    RealDescriptor,
};
use crate::kernel::fix::floor_shr;
use crate::kernel::rational::{cmp_products, make_rational, ExactRational};
use crate::{Error, Int, Result};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::sync::{Arc, Mutex};

/// Hard ceiling on working precision for certified sign refinement.  The
/// mathematical separation bounds stay far below this for sane inputs; hitting
/// it produces an honest error instead of an unbounded computation.
pub(crate) const SIGN_PRECISION_CEILING: u64 = 1 << 23;

#[derive(Debug)]
struct BallCache {
    lo: Int,
    hi: Int,
    prec: u64,
}

/// Degree-2 branch data: the base equals `(-c1 + branch*sqrt(disc)) / (2 c2)`.
#[derive(Debug)]
struct QuadBranch {
    disc: Int,
    branch: i8,
}

#[derive(Debug)]
pub(crate) struct FieldCore {
    /// Defining polynomial, constant term first, positive leading coefficient.
    /// Degree 1 encodes a rational base.
    poly: Vec<Int>,
    degree: usize,
    descriptor: RealDescriptor,
    /// b^d = (sum red_nums[i] b^i) / red_den, red_den > 0 (degree >= 2).
    red_nums: Vec<Int>,
    red_den: Int,
    /// b^{-1} = (sum inv_nums[i] b^i) / inv_den, inv_den > 0.
    inv_nums: Vec<Int>,
    inv_den: Int,
    quad: Option<QuadBranch>,
    ball: Mutex<BallCache>,
}

impl FieldCore {
    /// Dyadic enclosure of the base with at least `prec` fractional bits.
    /// The cache only ever refines, so successive enclosures are nested.
    fn ball_at(&self, prec: u64) -> Result<(Int, Int, u64)> {
        let mut guard = self
            .ball
            .lock()
            .map_err(|_| Error::RefinementFailure("base enclosure cache poisoned".into()))?;
        if guard.prec < prec {
            let (lo, hi, p) = self.descriptor.refine_dyadic(prec)?;
            debug_assert!(p >= prec);
            *guard = BallCache { lo, hi, prec: p };
        }
        Ok((guard.lo.clone(), guard.hi.clone(), guard.prec))
    }
}

/// The number field Q(b) for a fixed base b > 1.
#[derive(Clone, Debug)]
pub struct BetaField {
    core: Arc<FieldCore>,
}

impl BetaField {
    pub fn new(descriptor: RealDescriptor) -> Result<Self> {
        let core = match &descriptor {
            RealDescriptor::Rational(r) => Self::rational_core(r.clone()),
            RealDescriptor::AlgebraicRoot { poly, lo, hi } => {
                if poly_degree(poly) == 2 {
                    // A square discriminant means the roots are rational after
                    // all (possible when coefficients were too large for the
                    // descriptor's rational-root search); collapse exactly.
                    let (c0, c1, c2) = (&poly[0], &poly[1], &poly[2]);
                    let disc: Int = c1 * c1 - Int::from(4) * c0 * c2;
                    let s = disc.sqrt();
                    if &s * &s == disc {
                        let denom: Int = c2 * 2;
                        let plus = make_rational(-c1 + &s, denom.clone())?;
                        let minus = make_rational(-c1 - &s, denom)?;
                        let root = if (lo..=hi).contains(&&plus) { plus } else { minus };
                        Self::rational_core(root)
                    } else {
                        Self::algebraic_core(poly.clone(), descriptor.clone(), {
                            // Branch test: root(+) >= lo iff sqrt(disc) >= 2 c2 lo + c1,
                            // decided by signs and squaring (endpoints are non-roots,
                            // so equality cannot occur).
                            let disc_q = ExactRational::from_integer(disc.clone());
                            let t_lo = ExactRational::from_integer(c2 * 2) * lo
                                + ExactRational::from_integer(c1.clone());
                            let t_hi = ExactRational::from_integer(c2 * 2) * hi
                                + ExactRational::from_integer(c1.clone());
                            let sqrt_ge =
                                |t: &ExactRational| !t.is_positive() || disc_q >= t * t;
                            let plus_in = sqrt_ge(&t_lo) && !sqrt_ge(&t_hi);
                            Some(QuadBranch {
                                disc,
                                branch: if plus_in { 1 } else { -1 },
                            })
                        })?
                    }
                } else {
                    Self::algebraic_core(poly.clone(), descriptor.clone(), None)?
                }
            }
        };
        let field = BetaField { core: Arc::new(core) };
        // The library only ever works with bases strictly above 1.
        let above_one = match field.core.degree {
            1 => field.core.descriptor.as_rational().unwrap() > &ExactRational::one(),
            _ => field.beta().sub_int(&Int::one()).sign()? > 0,
        };
        if !above_one {
            return Err(Error::invalid("base must be greater than 1"));
        }
        Ok(field)
    }

    fn rational_core(r: ExactRational) -> FieldCore {
        let poly = vec![-r.numer().clone(), r.denom().clone()];
        FieldCore {
            poly,
            degree: 1,
            descriptor: RealDescriptor::Rational(r),
            red_nums: vec![],
            red_den: Int::one(),
            inv_nums: vec![],
            inv_den: Int::one(),
            quad: None,
            ball: Mutex::new(BallCache { lo: Int::zero(), hi: Int::zero(), prec: 0 }),
        }
    }

    fn algebraic_core(
        poly: Vec<Int>,
        descriptor: RealDescriptor,
        quad: Option<QuadBranch>,
    ) -> Result<FieldCore> {
        let d = poly_degree(&poly);
        debug_assert!(poly[d].is_positive());
        if poly[0].is_zero() {
            return Err(Error::invalid("defining polynomial must have nonzero constant term"));
        }
        let red_nums: Vec<Int> = poly[..d].iter().map(|c| -c).collect();
        let red_den = poly[d].clone();
        // b^{-1} = -(c_1 + c_2 b + ... + c_d b^{d-1}) / c_0.
        let (inv_nums, inv_den) = if poly[0].is_positive() {
            (poly[1..].iter().map(|c| -c).collect::<Vec<_>>(), poly[0].clone())
        } else {
            (poly[1..].to_vec(), -&poly[0])
        };
        let (lo, hi, prec) = descriptor.refine_dyadic(128)?;
        Ok(FieldCore {
            poly,
            degree: d,
            descriptor,
            red_nums,
            red_den,
            inv_nums,
            inv_den,
            quad,
            ball: Mutex::new(BallCache { lo, hi, prec }),
        })
    }

    pub fn descriptor(&self) -> &RealDescriptor {
        &self.core.descriptor
    }

    /// Degree of the representation (1 for a rational base).
    pub fn degree(&self) -> usize {
        self.core.degree
    }

    pub fn same_field(&self, other: &BetaField) -> bool {
        Arc::ptr_eq(&self.core, &other.core)
    }

    pub fn zero(&self) -> FieldElement {
        self.from_coeffs(vec![Int::zero(); self.core.degree.max(1)], Int::one())
    }

    pub fn one(&self) -> FieldElement {
        let mut nums = vec![Int::zero(); self.core.degree.max(1)];
        nums[0] = Int::one();
        self.from_coeffs(nums, Int::one())
    }

    /// The base itself as a field element.
    pub fn beta(&self) -> FieldElement {
        if self.core.degree == 1 {
            let r = self.core.descriptor.as_rational().unwrap();
            return self.from_coeffs(vec![r.numer().clone()], r.denom().clone());
        }
        let mut nums = vec![Int::zero(); self.core.degree];
        nums[1] = Int::one();
        self.from_coeffs(nums, Int::one())
    }

    pub fn from_rational(&self, r: &ExactRational) -> FieldElement {
        let mut nums = vec![Int::zero(); self.core.degree.max(1)];
        nums[0] = r.numer().clone();
        self.from_coeffs(nums, r.denom().clone())
    }

    pub fn from_int(&self, n: &Int) -> FieldElement {
        let mut nums = vec![Int::zero(); self.core.degree.max(1)];
        nums[0] = n.clone();
        self.from_coeffs(nums, Int::one())
    }

    pub(crate) fn from_coeffs(&self, nums: Vec<Int>, den: Int) -> FieldElement {
        debug_assert!(den.is_positive());
        debug_assert_eq!(nums.len(), self.core.degree.max(1));
        FieldElement { core: Arc::clone(&self.core), nums, den }
    }

    /// Certified enclosure of the base with radius at most 2^-bits.
    pub fn beta_ball(&self, bits: u64) -> Result<Ball> {
        self.core.descriptor.refine_to(bits)
    }

    pub fn beta_to_f64(&self) -> f64 {
        self.core.descriptor.to_f64()
    }

    /// Number of admissible digits: digits run over 0 .. ceil(base) - 1.
    pub fn digit_alphabet_size(&self) -> Result<Int> {
        match self.core.descriptor.as_rational() {
            Some(r) => {
                // ceil(p/q): for integers ceil == the value itself.
                Ok(-((-r.numer()).div_floor(r.denom())))
            }
            None => Ok(self.beta().floor()? + 1u8),
        }
    }
}

/// An element of Q(b), held exactly.
///
/// Equality compares canonical representations, which coincides with equality
/// of real values whenever the defining polynomial is irreducible (always the
/// case for degree <= 2 after construction).  For value comparisons that stay
/// correct even in the reducible corner, use [`FieldElement::cmp_exact`].
#[derive(Clone, Debug)]
pub struct FieldElement {
    core: Arc<FieldCore>,
    nums: Vec<Int>,
    den: Int,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        debug_assert!(Arc::ptr_eq(&self.core, &other.core));
        self.nums
            .iter()
            .zip(&other.nums)
            .all(|(a, b)| a * &other.den == b * &self.den)
    }
}
impl Eq for FieldElement {}

impl FieldElement {
    fn with(&self, nums: Vec<Int>, den: Int) -> FieldElement {
        FieldElement { core: Arc::clone(&self.core), nums, den }
    }

    pub fn degree(&self) -> usize {
        self.core.degree
    }

    pub(crate) fn raw_parts(&self) -> (&[Int], &Int) {
        (&self.nums, &self.den)
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        debug_assert!(Arc::ptr_eq(&self.core, &other.core));
        if self.den == other.den {
            let nums = self.nums.iter().zip(&other.nums).map(|(a, b)| a + b).collect();
            return self.with(nums, self.den.clone());
        }
        let nums = self
            .nums
            .iter()
            .zip(&other.nums)
            .map(|(a, b)| a * &other.den + b * &self.den)
            .collect();
        self.with(nums, &self.den * &other.den)
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        debug_assert!(Arc::ptr_eq(&self.core, &other.core));
        if self.den == other.den {
            let nums = self.nums.iter().zip(&other.nums).map(|(a, b)| a - b).collect();
            return self.with(nums, self.den.clone());
        }
        let nums = self
            .nums
            .iter()
            .zip(&other.nums)
            .map(|(a, b)| a * &other.den - b * &self.den)
            .collect();
        self.with(nums, &self.den * &other.den)
    }

    pub fn neg(&self) -> FieldElement {
        self.with(self.nums.iter().map(|n| -n).collect(), self.den.clone())
    }

    pub fn add_int(&self, k: &Int) -> FieldElement {
        let mut nums = self.nums.clone();
        nums[0] += k * &self.den;
        self.with(nums, self.den.clone())
    }

    pub fn sub_int(&self, k: &Int) -> FieldElement {
        let mut nums = self.nums.clone();
        nums[0] -= k * &self.den;
        self.with(nums, self.den.clone())
    }

    pub fn scale_int(&self, k: &Int) -> FieldElement {
        self.with(self.nums.iter().map(|n| n * k).collect(), self.den.clone())
    }

    pub fn scale_rational(&self, r: &ExactRational) -> FieldElement {
        let nums: Vec<Int> = self.nums.iter().map(|n| n * r.numer()).collect();
        let den = &self.den * r.denom();
        if den.is_negative() {
            self.with(nums.iter().map(|n| -n).collect(), -den)
        } else {
            self.with(nums, den)
        }
    }

    /// Multiply by the base.  For a monic defining polynomial the denominator
    /// is untouched, which keeps digit orbits denominator-stable.
    pub fn mul_base(&self) -> FieldElement {
        let d = self.core.degree;
        if d == 1 {
            let r = self.core.descriptor.as_rational().unwrap();
            let nums = vec![&self.nums[0] * r.numer()];
            return self.with(nums, &self.den * r.denom());
        }
        let top = &self.nums[d - 1];
        let mut nums: Vec<Int> = Vec::with_capacity(d);
        nums.push(Int::zero());
        for i in 0..d - 1 {
            nums.push(self.nums[i].clone());
        }
        if top.is_zero() {
            return self.with(nums, self.den.clone());
        }
        if self.core.red_den.is_one() {
            for i in 0..d {
                nums[i] += top * &self.core.red_nums[i];
            }
            self.with(nums, self.den.clone())
        } else {
            for i in 0..d {
                nums[i] = &nums[i] * &self.core.red_den + top * &self.core.red_nums[i];
            }
            self.with(nums, &self.den * &self.core.red_den)
        }
    }

    /// Divide by the base.
    pub fn div_base(&self) -> FieldElement {
        let d = self.core.degree;
        if d == 1 {
            let r = self.core.descriptor.as_rational().unwrap();
            let mut nums = vec![&self.nums[0] * r.denom()];
            let mut den = &self.den * r.numer();
            if den.is_negative() {
                nums[0] = -&nums[0];
                den = -den;
            }
            return self.with(nums, den);
        }
        let low = &self.nums[0];
        let mut nums: Vec<Int> = (1..d).map(|i| self.nums[i].clone()).collect();
        nums.push(Int::zero());
        if low.is_zero() {
            return self.with(nums, self.den.clone());
        }
        if self.core.inv_den.is_one() {
            for i in 0..d {
                nums[i] += low * &self.core.inv_nums[i];
            }
            self.with(nums, self.den.clone())
        } else {
            for i in 0..d {
                nums[i] = &nums[i] * &self.core.inv_den + low * &self.core.inv_nums[i];
            }
            self.with(nums, &self.den * &self.core.inv_den)
        }
    }

    /// Full product, reducing powers above d-1 by the defining polynomial.
    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        debug_assert!(Arc::ptr_eq(&self.core, &other.core));
        let d = self.core.degree;
        if d == 1 {
            return self.with(vec![&self.nums[0] * &other.nums[0]], &self.den * &other.den);
        }
        let mut conv = vec![Int::zero(); 2 * d - 1];
        for (i, a) in self.nums.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.nums.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                conv[i + j] += a * b;
            }
        }
        let mut den = &self.den * &other.den;
        while conv.len() > d {
            let top = conv.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let k = conv.len(); // the popped power
            if !self.core.red_den.is_one() {
                for c in conv.iter_mut() {
                    *c *= &self.core.red_den;
                }
                den *= &self.core.red_den;
            }
            for i in 0..d {
                conv[k - d + i] += &top * &self.core.red_nums[i];
            }
        }
        self.with(conv, den)
    }

    /// Divide numerators and denominator by their common gcd.
    pub fn reduce(&self) -> FieldElement {
        let mut g = self.den.clone();
        for n in &self.nums {
            g = g.gcd(n);
        }
        if g <= Int::one() {
            return self.clone();
        }
        self.with(self.nums.iter().map(|n| n / &g).collect(), &self.den / &g)
    }

    /// Syntactic zero test: exact (and complete for degree <= 2).  For higher
    /// degrees with a reducible defining polynomial this can answer `false`
    /// for a value that is really zero; `sign` resolves those exactly.
    pub fn is_zero(&self) -> bool {
        self.nums.iter().all(Zero::is_zero)
    }

    /// The element as a rational, when its representation is one.
    pub fn to_rational(&self) -> Option<ExactRational> {
        if self.core.degree == 1 {
            return Some(make_rational(self.nums[0].clone(), self.den.clone()).unwrap());
        }
        if self.nums[1..].iter().all(Zero::is_zero) {
            return Some(make_rational(self.nums[0].clone(), self.den.clone()).unwrap());
        }
        None
    }

    /// Certified sign of the element: -1, 0, or +1.
    pub fn sign(&self) -> Result<i32> {
        if self.is_zero() {
            return Ok(0);
        }
        match self.core.degree {
            1 => Ok(match self.nums[0].sign() {
                num_bigint::Sign::Minus => -1,
                num_bigint::Sign::NoSign => 0,
                num_bigint::Sign::Plus => 1,
            }),
            2 => Ok(self.sign_quadratic()),
            _ => self.sign_general(),
        }
    }

    /// Exact sign for quadratic bases via the conjugate representation:
    /// with b = (-c1 + branch*sqrt(D)) / (2 c2), the sign of n0 + n1 b equals
    /// the sign of U + V sqrt(D) where U = 2 c2 n0 - c1 n1, V = branch * n1.
    fn sign_quadratic(&self) -> i32 {
        let quad = self.core.quad.as_ref().expect("quadratic branch data");
        let c1 = &self.core.poly[1];
        let c2 = &self.core.poly[2];
        let u: Int = c2 * 2 * &self.nums[0] - c1 * &self.nums[1];
        let v: Int = if quad.branch == 1 { self.nums[1].clone() } else { -&self.nums[1] };
        match (u.is_negative(), v.is_negative()) {
            (false, false) => {
                if u.is_zero() && v.is_zero() {
                    0
                } else {
                    1
                }
            }
            (true, true) => -1,
            (false, true) => {
                // U - |V| sqrt(D): compare U^2 with V^2 D.
                let au = u.magnitude().clone();
                let av = v.magnitude().clone();
                let vd: Int = Int::from(av.clone()) * &quad.disc;
                let au_int = Int::from(au);
                match cmp_products(&au_int, &au_int, &vd, &Int::from(av)) {
                    Ordering::Greater => 1,
                    Ordering::Equal => 0,
                    Ordering::Less => -1,
                }
            }
            (true, false) => {
                // |V| sqrt(D) - |U|: compare V^2 D with U^2.
                let au = u.magnitude().clone();
                let av = v.magnitude().clone();
                let vd: Int = Int::from(av.clone()) * &quad.disc;
                let au_int = Int::from(au);
                match cmp_products(&vd, &Int::from(av), &au_int, &au_int) {
                    Ordering::Greater => 1,
                    Ordering::Equal => 0,
                    Ordering::Less => -1,
                }
            }
        }
    }

    /// Certified sign for degree >= 3: refine a base enclosure until the value
    /// separates from zero, falling back to exact polynomial-gcd reasoning
    /// when a (necessarily reducible) defining polynomial hides a zero.
    fn sign_general(&self) -> Result<i32> {
        let mut working: Vec<Int> = self.core.poly.clone();
        let mut bound = separation_bits(&working, &self.nums);
        let mut prec: u64 = 128;
        loop {
            let (vlo, vhi, _scale) = self.eval_nums_dyadic(prec)?;
            if vlo.is_positive() {
                return Ok(1);
            }
            if vhi.is_negative() {
                return Ok(-1);
            }
            if prec >= bound {
                match self.resolve_zero(&working, prec)? {
                    ZeroResolution::Zero => return Ok(0),
                    ZeroResolution::NonzeroSameBound => {
                        // gcd is trivial, so the separation bound is valid and
                        // a modest amount of extra precision must decide.
                        bound = bound.saturating_mul(2);
                    }
                    ZeroResolution::Cofactor(p1) => {
                        bound = separation_bits(&p1, &self.nums);
                        working = p1;
                    }
                }
            }
            if prec > SIGN_PRECISION_CEILING {
                return Err(Error::PrecisionExhausted { cap_bits: SIGN_PRECISION_CEILING });
            }
            prec *= 2;
        }
    }

    /// Decide whether the value is exactly zero, given that numeric refinement
    /// reached the separation bound for `working` without separating.
    fn resolve_zero(&self, working: &[Int], prec: u64) -> Result<ZeroResolution> {
        let mut elem_poly: Vec<Int> = self.nums.clone();
        while elem_poly.last().map(Zero::is_zero).unwrap_or(false) {
            elem_poly.pop();
        }
        if elem_poly.is_empty() {
            return Ok(ZeroResolution::Zero);
        }
        let g = rational_gcd_poly(working, &elem_poly);
        if poly_degree(&g) == 0 {
            // No common factor: the value is certainly nonzero.
            return Ok(ZeroResolution::NonzeroSameBound);
        }
        // Decide whether the base is a root of g by isolating it inside a
        // shrinking enclosure that eventually contains at most one root of
        // the defining polynomial.
        let sep_prec = root_separation_bits(&self.core.poly).max(prec);
        let mut p = sep_prec;
        loop {
            let (blo, bhi, scale) = self.core.ball_at(p)?;
            if blo == bhi {
                // The base is exactly dyadic; evaluate directly.
                let x = make_rational(blo, Int::one() << scale)?;
                let val = eval_poly_rational(&elem_poly, &x);
                return Ok(if val.is_zero() {
                    ZeroResolution::Zero
                } else {
                    ZeroResolution::NonzeroSameBound
                });
            }
            let rlo = make_rational(blo.clone(), Int::one() << scale)?;
            let rhi = make_rational(bhi.clone(), Int::one() << scale)?;
            let g_lo = eval_poly_rational(&g, &rlo);
            let g_hi = eval_poly_rational(&g, &rhi);
            if g_lo.is_zero() || g_hi.is_zero() {
                // An enclosure endpoint is a rational root of g.  If the base
                // is exactly that endpoint the defining polynomial vanishes
                // there; otherwise refining moves the endpoint off the root.
                let endpoint = if g_lo.is_zero() { &rlo } else { &rhi };
                if eval_poly_rational(&self.core.poly, endpoint).is_zero() {
                    let val = eval_poly_rational(&elem_poly, endpoint);
                    return Ok(if val.is_zero() {
                        ZeroResolution::Zero
                    } else {
                        ZeroResolution::NonzeroSameBound
                    });
                }
                p = p.saturating_mul(2);
                if p > SIGN_PRECISION_CEILING {
                    return Err(Error::PrecisionExhausted { cap_bits: SIGN_PRECISION_CEILING });
                }
                continue;
            }
            match sturm_count(&g, &rlo, &rhi) {
                0 => {
                    // The base is a root of the cofactor, not of g, so the
                    // value is certainly nonzero; retry with a tight bound.
                    let cof = exact_div_poly(working, &g);
                    return Ok(if poly_degree(&cof) >= 1 {
                        ZeroResolution::Cofactor(cof)
                    } else {
                        ZeroResolution::NonzeroSameBound
                    });
                }
                1 if p >= root_separation_bits(&self.core.poly) => {
                    // The enclosure is narrower than the minimal root gap of
                    // the defining polynomial, so the unique root of g inside
                    // it must be the base itself; g divides the element.
                    return Ok(ZeroResolution::Zero);
                }
                _ => {
                    p = p.saturating_mul(2);
                    if p > SIGN_PRECISION_CEILING {
                        return Err(Error::PrecisionExhausted {
                            cap_bits: SIGN_PRECISION_CEILING,
                        });
                    }
                }
            }
        }
    }

    /// Certified three-way comparison of values (exact even when
    /// representation equality would be misleading).
    pub fn cmp_exact(&self, other: &FieldElement) -> Result<Ordering> {
        Ok(match self.sub(other).sign()? {
            s if s < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }

    pub fn cmp_rational(&self, r: &ExactRational) -> Result<Ordering> {
        // self - r, formed without touching the other coefficients.
        let mut nums: Vec<Int> = self.nums.iter().map(|n| n * r.denom()).collect();
        nums[0] -= r.numer() * &self.den;
        let diff = self.with(nums, &self.den * r.denom());
        Ok(match diff.sign()? {
            s if s < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }

    /// Certified floor.
    pub fn floor(&self) -> Result<Int> {
        if self.core.degree == 1 {
            return Ok(self.nums[0].div_floor(&self.den));
        }
        let mut prec: u64 = 64;
        loop {
            let (vlo, vhi, scale) = self.eval_dyadic(prec)?;
            let klo = floor_shr(&vlo, scale);
            let khi = floor_shr(&vhi, scale);
            if klo == khi {
                return Ok(klo);
            }
            if &khi - &klo == Int::one() {
                // The enclosure straddles the integer khi; one certified sign
                // decides which side the value falls on (or lands exactly).
                let s = self.sub_int(&khi).sign()?;
                return Ok(if s >= 0 { khi } else { klo });
            }
            if prec > SIGN_PRECISION_CEILING {
                return Err(Error::PrecisionExhausted { cap_bits: SIGN_PRECISION_CEILING });
            }
            prec *= 2;
        }
    }

    /// Dyadic enclosure of the numerator polynomial sum (denominator ignored,
    /// which preserves sign).  Returns (lo, hi, scale): value*den is in
    /// [lo, hi] / 2^scale.
    fn eval_nums_dyadic(&self, prec: u64) -> Result<(Int, Int, u64)> {
        let top = match self.nums.iter().rposition(|c| !c.is_zero()) {
            Some(t) => t,
            None => return Ok((Int::zero(), Int::zero(), 0)),
        };
        if top == 0 {
            return Ok((self.nums[0].clone(), self.nums[0].clone(), 0));
        }
        let (blo, bhi, p) = self.core.ball_at(prec)?;
        let mut vlo = self.nums[top].clone();
        let mut vhi = vlo.clone();
        let mut scale = 0u64;
        for i in (0..top).rev() {
            let (nlo, nhi) = mul_interval(&vlo, &vhi, &blo, &bhi);
            scale += p;
            let c: Int = &self.nums[i] << scale;
            vlo = nlo + &c;
            vhi = nhi + c;
        }
        Ok((vlo, vhi, scale))
    }

    /// Dyadic enclosure of the value itself: value in [lo, hi] / 2^scale.
    fn eval_dyadic(&self, prec: u64) -> Result<(Int, Int, u64)> {
        let (nlo, nhi, scale) = self.eval_nums_dyadic(prec)?;
        if self.den.is_one() {
            return Ok((nlo, nhi, scale));
        }
        // Divide by the positive denominator with outward rounding, keeping
        // the same scale.
        let lo = nlo.div_floor(&self.den);
        let hi = -((-nhi).div_floor(&self.den));
        Ok((lo, hi, scale))
    }

    /// Certified rational enclosure of the value with radius <= 2^-bits.
    pub fn to_ball(&self, bits: u64) -> Result<Ball> {
        if let Some(r) = self.to_rational() {
            return Ok(Ball::exact(r));
        }
        let mut prec = bits + 16;
        loop {
            let (vlo, vhi, scale) = self.eval_dyadic(prec)?;
            let lo = make_rational(vlo, Int::one() << scale)?;
            let hi = make_rational(vhi, Int::one() << scale)?;
            let ball = Ball::from_endpoints(lo, hi);
            if ball.radius <= make_rational(Int::one(), Int::one() << bits)? {
                return Ok(ball);
            }
            if prec > SIGN_PRECISION_CEILING {
                return Err(Error::PrecisionExhausted { cap_bits: SIGN_PRECISION_CEILING });
            }
            prec *= 2;
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.core.degree == 1 {
            return crate::kernel::fix::FixInterval::from_frac(&self.nums[0], &self.den).to_f64();
        }
        match self.eval_dyadic(96) {
            Ok((vlo, vhi, scale)) => {
                let mid: Int = (vlo + vhi) >> 1;
                crate::kernel::fix::int_to_f64_scaled(&mid, -(scale as i64))
            }
            Err(_) => f64::NAN,
        }
    }
}

enum ZeroResolution {
    Zero,
    NonzeroSameBound,
    Cofactor(Vec<Int>),
}

/// Interval product for signed intervals: [vlo,vhi] * [blo,bhi].
fn mul_interval(vlo: &Int, vhi: &Int, blo: &Int, bhi: &Int) -> (Int, Int) {
    if !vlo.is_negative() {
        if !blo.is_negative() {
            return (vlo * blo, vhi * bhi);
        }
    } else if !vhi.is_positive() && !blo.is_negative() {
        return (vlo * bhi, vhi * blo);
    }
    // Mixed signs: fall back to four corners.
    let c1 = vlo * blo;
    let c2 = vlo * bhi;
    let c3 = vhi * blo;
    let c4 = vhi * bhi;
    let lo = (&c1).min(&c2).min(&c3).min(&c4).clone();
    let hi = (&c1).max(&c2).max(&c3).max(&c4).clone();
    (lo, hi)
}

/// Bits of refinement beyond which a nonzero value must separate from zero:
/// if gcd(defining poly, element poly) is trivial, the resultant is a nonzero
/// integer and |value| >= 1 / (lead^{d-1} M^{d-1}) with M a Cauchy-bound
/// estimate of |element| over all conjugates.
fn separation_bits(poly: &[Int], nums: &[Int]) -> u64 {
    let d = poly_degree(poly);
    let lead = poly[d].abs();
    let max_coeff = poly.iter().map(Signed::abs).max().unwrap();
    // R = 1 + ceil(max|c_i| / lead) bounds every conjugate's modulus.
    let r: Int = Int::one() + (&max_coeff + &lead - 1) / &lead;
    let mut m = Int::zero();
    let mut rp = Int::one();
    for e in nums {
        m += e.abs() * &rp;
        rp *= &r;
    }
    if m.is_zero() {
        return 128;
    }
    let lead_bits = lead.bits();
    let m_bits = m.bits();
    ((d as u64 - 1) * (lead_bits + m_bits) + m_bits + 64).max(128)
}

/// Bits below the minimal distance between distinct roots of a squarefree
/// integer polynomial (Mahler's bound with |discriminant| >= 1):
/// sep > sqrt(3) * d^{-(d+2)/2} * ||p||_2^{-(d-1)}.
fn root_separation_bits(poly: &[Int]) -> u64 {
    let d = poly_degree(poly) as u64;
    let l2sq: Int = poly.iter().map(|c| c * c).sum();
    let half_l2_bits = l2sq.bits() / 2 + 1;
    ((d - 1) * half_l2_bits + (d + 2) * (64 - (d.leading_zeros() as u64) + 1) / 2 + 16).max(64)
}

// ---------------------------------------------------------------------------
// Values and intervals over mixed rational / algebraic endpoints
// ---------------------------------------------------------------------------

/// A real number that is either exactly rational or an element of the base's
/// field.
#[derive(Clone, Debug)]
pub enum Value {
    Rat(ExactRational),
    Alg(FieldElement),
}

impl Value {
    pub fn cmp_exact(&self, other: &Value) -> Result<Ordering> {
        match (self, other) {
            (Value::Rat(a), Value::Rat(b)) => Ok(a.cmp(b)),
            (Value::Alg(a), Value::Alg(b)) => a.cmp_exact(b),
            (Value::Alg(a), Value::Rat(b)) => a.cmp_rational(b),
            (Value::Rat(a), Value::Alg(b)) => Ok(b.cmp_rational(a)?.reverse()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Rat(r) => crate::kernel::fix::FixInterval::from_ratio(r).to_f64(),
            Value::Alg(e) => e.to_f64(),
        }
    }

    pub fn to_ball(&self, bits: u64) -> Result<Ball> {
        match self {
            Value::Rat(r) => Ok(Ball::exact(r.clone())),
            Value::Alg(e) => e.to_ball(bits),
        }
    }

    pub fn as_rational(&self) -> Option<ExactRational> {
        match self {
            Value::Rat(r) => Some(r.clone()),
            Value::Alg(e) => e.to_rational(),
        }
    }
}

/// An interval with individually open or closed endpoints.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: Value,
    pub hi: Value,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn half_open(lo: Value, hi: Value) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn contains(&self, v: &Value) -> Result<bool> {
        let lo_ok = match self.lo.cmp_exact(v)? {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Greater => false,
        };
        if !lo_ok {
            return Ok(false);
        }
        Ok(match v.cmp_exact(&self.hi)? {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        })
    }

    /// Certified subset test honoring endpoint closures.
    pub fn subset_of(&self, other: &Interval) -> Result<bool> {
        let lo_ok = match other.lo.cmp_exact(&self.lo)? {
            Ordering::Less => true,
            Ordering::Equal => other.lo_closed || !self.lo_closed,
            Ordering::Greater => false,
        };
        if !lo_ok {
            return Ok(false);
        }
        Ok(match self.hi.cmp_exact(&other.hi)? {
            Ordering::Less => true,
            Ordering::Equal => other.hi_closed || !self.hi_closed,
            Ordering::Greater => false,
        })
    }

    pub fn width_f64(&self) -> f64 {
        self.hi.to_f64() - self.lo.to_f64()
    }
}
