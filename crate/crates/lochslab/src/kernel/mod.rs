//! Numeric kernel: exact rationals, certified enclosures of real algebraic
//! constants, and comparison/floor primitives that are either provably correct
//! or an explicit error.
//!
//! Design rules enforced here and relied on by every other module:
//!
//! * Sampled points are exact rationals, so expansion arithmetic downstream is
//!   exact; only the base `beta` itself may need interval enclosures.
//! * Enclosures refine by doubling precision and are nested: refining never
//!   moves a value outside a previously returned enclosure.
//! * No silent fallback to floating point.  Fast paths (truncated-product
//!   comparisons, quadratic-surd signs) fall back to exact arithmetic whenever
//!   their certified bounds overlap.

mod ball;
mod descriptor;
mod field;
mod fix;
mod rational;

pub use ball::Ball;
pub use descriptor::{parse_beta_spec, parse_rational_literal, RealDescriptor};
pub use field::{BetaField, FieldElement, Interval, Value};
pub use fix::{int_to_f64_scaled, ln2, ln_frac, ln_int, ln_ratio, pi, FixInterval, FIX_BITS};
pub use rational::{
    cmp_frac, cmp_products, floor_div, make_rational, rational_floor, ExactRational, TopApprox,
};

/// Hard default cap, in bits, for adaptive-precision refinement loops.  Loops
/// that can prove a tighter requirement (e.g. algebraic separation bounds) may
/// exceed it deliberately; everything else errors out at the cap rather than
/// guessing.
pub const DEFAULT_PRECISION_CAP: u64 = 16_384;
