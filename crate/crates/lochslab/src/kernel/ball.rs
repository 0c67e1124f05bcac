//! Certified enclosure of a real number as center +/- radius, both exact
//! rationals.  Balls are produced by refining a [`RealDescriptor`] and are
//! nested: refining to more bits always yields a ball contained in every
//! coarser one.
//!
//! [`RealDescriptor`]: super::RealDescriptor

use crate::kernel::rational::ExactRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub center: ExactRational,
    pub radius: ExactRational,
}

impl Ball {
    pub fn new(center: ExactRational, radius: ExactRational) -> Self {
        debug_assert!(!radius.is_negative());
        Ball { center, radius }
    }

    /// Exact value (radius zero).
    pub fn exact(value: ExactRational) -> Self {
        Ball { center: value, radius: ExactRational::zero() }
    }

    pub fn from_endpoints(lo: ExactRational, hi: ExactRational) -> Self {
        debug_assert!(lo <= hi);
        let two = ExactRational::from_integer(2.into());
        Ball { center: (&lo + &hi) / &two, radius: (&hi - &lo) / &two }
    }

    pub fn lo(&self) -> ExactRational {
        &self.center - &self.radius
    }

    pub fn hi(&self) -> ExactRational {
        &self.center + &self.radius
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn contains(&self, v: &ExactRational) -> bool {
        &self.lo() <= v && v <= &self.hi()
    }

    /// `true` iff every point of `self` lies inside `other`.
    pub fn contained_in(&self, other: &Ball) -> bool {
        other.lo() <= self.lo() && self.hi() <= other.hi()
    }

    /// Certified comparison against an exact rational; `None` when the ball
    /// straddles it.
    pub fn try_cmp_rational(&self, v: &ExactRational) -> Option<Ordering> {
        if &self.hi() < v {
            return Some(Ordering::Less);
        }
        if &self.lo() > v {
            return Some(Ordering::Greater);
        }
        if self.is_exact() && &self.center == v {
            return Some(Ordering::Equal);
        }
        None
    }

    /// Certified comparison against another ball; `None` when they overlap.
    pub fn try_cmp(&self, other: &Ball) -> Option<Ordering> {
        if self.hi() < other.lo() {
            return Some(Ordering::Less);
        }
        if self.lo() > other.hi() {
            return Some(Ordering::Greater);
        }
        if self.is_exact() && other.is_exact() && self.center == other.center {
            return Some(Ordering::Equal);
        }
        None
    }

    pub fn to_f64(&self) -> f64 {
        crate::kernel::fix::FixInterval::from_ratio(&self.center).to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::make_rational;

    #[test]
    fn endpoints_round_trip() {
        let b = Ball::from_endpoints(make_rational(1, 3).unwrap(), make_rational(1, 2).unwrap());
        assert_eq!(b.lo(), make_rational(1, 3).unwrap());
        assert_eq!(b.hi(), make_rational(1, 2).unwrap());
        assert!(b.contains(&make_rational(2, 5).unwrap()));
        assert!(!b.contains(&make_rational(3, 5).unwrap()));
    }

    #[test]
    fn comparisons_are_certified() {
        let b = Ball::from_endpoints(make_rational(3, 2).unwrap(), make_rational(8, 5).unwrap());
        assert_eq!(b.try_cmp_rational(&make_rational(1, 1).unwrap()), Some(Ordering::Greater));
        assert_eq!(b.try_cmp_rational(&make_rational(2, 1).unwrap()), Some(Ordering::Less));
        assert_eq!(b.try_cmp_rational(&make_rational(31, 20).unwrap()), None);
        let c = Ball::exact(make_rational(7, 4).unwrap());
        assert_eq!(b.try_cmp(&c), Some(Ordering::Less));
    }
}
