//! Outward-rounded floating point intervals.
//!
//! Hardware rounding modes are not touched; instead every inexact
//! operation widens its result by one ulp on each side. That gives up a
//! little tightness and keeps the enclosure property under any compiler
//! reordering and on any target. Conversions from exact rationals are
//! verified against the rational value itself, so an interval produced
//! here always contains the real number it stands for.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Rat, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::NanEndpoint);
        }
        if lo > hi {
            return Err(Error::EmptyInterval);
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    pub fn zero() -> Self {
        Interval { lo: 0.0, hi: 0.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Enclosure of a rational, exact when the value is a float.
    pub fn from_rat(r: &Rat) -> Self {
        let f = rat_to_f64_nearest(r);
        Interval {
            lo: shift_not_above(f, r),
            hi: shift_not_below(f, r),
        }
    }

    /// Enclosure of `[lo, hi]` given as exact rationals.
    pub fn from_rat_bounds(lo: &Rat, hi: &Rat) -> Result<Self> {
        if lo > hi {
            return Err(Error::EmptyInterval);
        }
        Ok(Interval {
            lo: shift_not_above(rat_to_f64_nearest(lo), lo),
            hi: shift_not_below(rat_to_f64_nearest(hi), hi),
        })
    }

    /// Exact membership test against the rational endpoints' meaning.
    pub fn contains(&self, r: &Rat) -> bool {
        cmp_f64_rat(self.lo, r) != Ordering::Greater
            && cmp_f64_rat(self.hi, r) != Ordering::Less
    }

    pub fn neg(self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn add(self, o: Self) -> Self {
        Interval {
            lo: (self.lo + o.lo).next_down(),
            hi: (self.hi + o.hi).next_up(),
        }
    }

    pub fn mul(self, o: Self) -> Self {
        let c = [
            mul_guarded(self.lo, o.lo),
            mul_guarded(self.lo, o.hi),
            mul_guarded(self.hi, o.lo),
            mul_guarded(self.hi, o.hi),
        ];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }

    /// Integer power by repeated interval product. Loose for
    /// sign-crossing bases but always an enclosure.
    pub fn pow(self, e: u32) -> Self {
        if e == 0 {
            return Interval { lo: 1.0, hi: 1.0 };
        }
        let mut acc = self;
        for _ in 1..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// `0 * inf` comes up when a box endpoint is zero and the other factor
/// overflowed; the true product of those sets stays at zero.
fn mul_guarded(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Total order between a float and an exact rational.
pub fn cmp_f64_rat(f: f64, r: &Rat) -> Ordering {
    if f == f64::INFINITY {
        return Ordering::Greater;
    }
    if f == f64::NEG_INFINITY {
        return Ordering::Less;
    }
    let exact = Rat::from_float(f).expect("finite float converts exactly");
    exact.cmp(r)
}

/// Nearest float to a rational; NaN only if the conversion fails, and
/// the shift helpers then fall back to the infinities.
pub(crate) fn rat_to_f64_nearest(r: &Rat) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

fn shift_not_above(mut f: f64, r: &Rat) -> f64 {
    if f.is_nan() {
        return f64::NEG_INFINITY;
    }
    while cmp_f64_rat(f, r) == Ordering::Greater {
        f = f.next_down();
    }
    f
}

fn shift_not_below(mut f: f64, r: &Rat) -> f64 {
    if f.is_nan() {
        return f64::INFINITY;
    }
    while cmp_f64_rat(f, r) == Ordering::Less {
        f = f.next_up();
    }
    f
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        Interval::new(lo, hi).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn construction_guards() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(-1.0, 1.0).is_ok());
    }

    #[test]
    fn from_rat_is_exact_on_floats_and_tight_otherwise() {
        let third = rat(1, 3);
        let i = Interval::from_rat(&third);
        assert!(i.lo() < i.hi(), "1/3 is not a float, interval must be fat");
        assert_eq!(i.hi(), i.lo().next_up(), "fat by exactly one ulp");
        assert!(i.contains(&third));

        let half = rat(1, 2);
        let j = Interval::from_rat(&half);
        assert_eq!(j.lo(), 0.5);
        assert_eq!(j.hi(), 0.5);
    }

    #[test]
    fn arithmetic_encloses_exact_results() {
        let a = Interval::from_rat(&rat(1, 3));
        let b = Interval::from_rat(&rat(1, 7));
        let sum = a.add(b);
        assert!(sum.contains(&rat(10, 21)));
        let prod = a.mul(b);
        assert!(prod.contains(&rat(1, 21)));
        let p = a.pow(3);
        assert!(p.contains(&rat(1, 27)));
        assert_eq!(Interval::point(2.0).unwrap().pow(0).lo(), 1.0);
    }

    #[test]
    fn mul_sign_cases() {
        let a = Interval::new(-2.0, 3.0).unwrap();
        let b = Interval::new(-5.0, 1.0).unwrap();
        let p = a.mul(b);
        assert!(p.lo() <= -15.0 && p.hi() >= 10.0);
        let z = Interval::zero().mul(Interval::new(0.0, f64::INFINITY).unwrap());
        assert!(z.contains(&Rat::from_integer(BigInt::from(0))));
        assert!(z.lo() <= 0.0 && z.hi() >= 0.0);
    }

    #[test]
    fn contains_is_exact_not_float_rounded() {
        // lo exactly 1.0 must not contain values just below 1
        let i = Interval::new(1.0, 2.0).unwrap();
        let just_below = Rat::one() - rat(1, 1_000_000_000_000_000_000);
        assert!(!i.contains(&just_below));
        assert!(i.contains(&Rat::one()));
    }

    #[test]
    fn from_rat_handles_huge_values_soundly() {
        let big = crate::poly::rat_pow(&rat(10, 1), 400);
        let i = Interval::from_rat(&big);
        assert!(i.contains(&big));
        assert_eq!(i.hi(), f64::INFINITY);
        let tiny = crate::poly::rat_pow(&rat(1, 10), 400);
        let j = Interval::from_rat(&tiny);
        assert!(j.contains(&tiny));
        assert!(j.lo() >= 0.0 && j.hi() > 0.0);
    }
}
