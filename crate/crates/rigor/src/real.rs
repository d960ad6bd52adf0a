//! Real intervals with outward rounding.

use crate::round::*;
use crate::{f64_from_hex, f64_to_hex, RigorError, Result};
use std::ops::{Add, Mul, Neg, Sub};

/// A closed interval `[lo, hi]` of binary64 values. NaN endpoints are
/// forbidden; `lo <= hi` always holds. Every arithmetic result contains the
/// exact real result for any members of the operand intervals.
#[derive(Clone, Copy, PartialEq)]
pub struct RigorousReal {
    lo: f64,
    hi: f64,
}

impl std::fmt::Debug for RigorousReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl RigorousReal {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan(), "NaN endpoint");
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN endpoint");
        Self { lo: x, hi: x }
    }

    pub const fn zero() -> Self {
        Self { lo: 0.0, hi: 0.0 }
    }

    pub const fn one() -> Self {
        Self { lo: 1.0, hi: 1.0 }
    }

    pub fn from_int(k: i64) -> Self {
        // i64 -> f64 is exact for |k| < 2^53; mode indices are far smaller.
        debug_assert!(k.unsigned_abs() < (1 << 53));
        Self::point(k as f64)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// Upper bound of the distance from the midpoint to either endpoint.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        sub_up(self.hi, m).max(sub_up(m, self.lo))
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn check_finite(&self) -> Result<Self> {
        if self.is_finite() {
            Ok(*self)
        } else {
            Err(RigorError::Overflow)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Endpointwise maximum: the image of (x, y) -> max(x, y).
    pub fn max(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Endpointwise minimum.
    pub fn min(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// Enclosure of |x| over the interval.
    pub fn abs(&self) -> Self {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            Self {
                lo: -self.hi,
                hi: -self.lo,
            }
        } else {
            Self {
                lo: 0.0,
                hi: self.hi.max(-self.lo),
            }
        }
    }

    /// Tight enclosure of x^2 (sharper than `self * self` when 0 is inside).
    pub fn square(&self) -> Self {
        let a = self.abs();
        Self {
            lo: mul_down(a.lo, a.lo),
            hi: mul_up(a.hi, a.hi),
        }
    }

    /// Exact scaling by a small integer.
    pub fn scale_int(&self, k: i64) -> Self {
        debug_assert!(k.unsigned_abs() < (1 << 53));
        let kf = k as f64;
        if kf >= 0.0 {
            Self {
                lo: mul_down(self.lo, kf),
                hi: mul_up(self.hi, kf),
            }
        } else {
            Self {
                lo: mul_down(self.hi, kf),
                hi: mul_up(self.lo, kf),
            }
        }
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.contains(0.0) {
            return Err(RigorError::DivisionByZeroInterval);
        }
        let (a, b) = (self.lo, self.hi);
        let (c, d) = (rhs.lo, rhs.hi);
        let out = if c > 0.0 {
            Self {
                lo: div_down(a, if a >= 0.0 { d } else { c }),
                hi: div_up(b, if b >= 0.0 { c } else { d }),
            }
        } else {
            // d < 0
            Self {
                lo: div_down(b, if b >= 0.0 { d } else { c }),
                hi: div_up(a, if a >= 0.0 { c } else { d }),
            }
        };
        debug_assert!(out.lo <= out.hi);
        Ok(out)
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one().try_div(self)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo < 0.0 {
            return Err(RigorError::DomainError);
        }
        Ok(Self {
            lo: sqrt_down(self.lo),
            hi: sqrt_up(self.hi),
        })
    }

    /// `[lo_hex, hi_hex]` pair for bit-exact persistence.
    pub fn to_hex_pair(&self) -> [String; 2] {
        [f64_to_hex(self.lo), f64_to_hex(self.hi)]
    }

    pub fn from_hex_pair(lo: &str, hi: &str) -> Option<Self> {
        let lo = f64_from_hex(lo)?;
        let hi = f64_from_hex(hi)?;
        if lo <= hi {
            Some(Self { lo, hi })
        } else {
            None
        }
    }
}

impl Neg for RigorousReal {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for RigorousReal {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for RigorousReal {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            lo: sub_down(self.lo, rhs.hi),
            hi: sub_up(self.hi, rhs.lo),
        }
    }
}

impl Mul for RigorousReal {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.lo, self.hi);
        let (c, d) = (rhs.lo, rhs.hi);
        // Sign-case analysis keeps it to two directed products except in the
        // mixed/mixed case.
        if a >= 0.0 {
            if c >= 0.0 {
                Self { lo: mul_down(a, c), hi: mul_up(b, d) }
            } else if d <= 0.0 {
                Self { lo: mul_down(b, c), hi: mul_up(a, d) }
            } else {
                Self { lo: mul_down(b, c), hi: mul_up(b, d) }
            }
        } else if b <= 0.0 {
            if c >= 0.0 {
                Self { lo: mul_down(a, d), hi: mul_up(b, c) }
            } else if d <= 0.0 {
                Self { lo: mul_down(b, d), hi: mul_up(a, c) }
            } else {
                Self { lo: mul_down(a, d), hi: mul_up(a, c) }
            }
        } else if c >= 0.0 {
            Self { lo: mul_down(a, d), hi: mul_up(b, d) }
        } else if d <= 0.0 {
            Self { lo: mul_down(b, c), hi: mul_up(a, c) }
        } else {
            Self {
                lo: mul_down(a, d).min(mul_down(b, c)),
                hi: mul_up(a, c).max(mul_up(b, d)),
            }
        }
    }
}

impl std::iter::Sum for RigorousReal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> RigorousReal {
        RigorousReal::new(lo, hi)
    }

    #[test]
    fn dyadic_sum_has_width_zero() {
        let two = RigorousReal::one() + RigorousReal::one();
        assert_eq!(two.lo(), 2.0);
        assert_eq!(two.hi(), 2.0);
    }

    #[test]
    fn one_third_within_two_ulp() {
        let third = RigorousReal::one().try_div(&RigorousReal::from_int(3)).unwrap();
        // compare against the rational 1/3: 3*lo <= 1 <= 3*hi
        assert!(third.lo() * 3.0 <= 1.0 && 1.0 <= third.hi() * 3.0);
        assert!(third.width() <= 2.0 * f64::EPSILON);
        assert!(third.contains(1.0 / 3.0) || third.contains((1.0f64 / 3.0).next_down()));
    }

    #[test]
    fn division_by_zero_interval_rejected() {
        assert_eq!(
            iv(-1.0, 1.0).recip().unwrap_err(),
            RigorError::DivisionByZeroInterval
        );
        assert_eq!(
            RigorousReal::one().try_div(&iv(0.0, 2.0)).unwrap_err(),
            RigorError::DivisionByZeroInterval
        );
    }

    #[test]
    fn sqrt_domain_and_values() {
        assert_eq!(iv(-1.0, 4.0).sqrt().unwrap_err(), RigorError::DomainError);
        let r = RigorousReal::from_int(4).sqrt().unwrap();
        assert_eq!((r.lo(), r.hi()), (2.0, 2.0));
        let r2 = RigorousReal::from_int(2).sqrt().unwrap();
        assert!(r2.lo() < std::f64::consts::SQRT_2 * (1.0 + 1e-15));
        assert!(r2.square().contains(2.0));
    }

    #[test]
    fn endpoint_max() {
        let m = iv(1.0, 2.0).max(&iv(0.0, 3.0));
        assert_eq!((m.lo(), m.hi()), (1.0, 3.0));
    }

    #[test]
    fn mul_sign_cases_contain_products() {
        let cases = [
            iv(2.0, 3.0),
            iv(-3.0, -2.0),
            iv(-2.0, 3.0),
            iv(0.0, 1.5),
            iv(-1.5, 0.0),
        ];
        for x in &cases {
            for y in &cases {
                let p = *x * *y;
                for &ex in &[x.lo(), x.hi(), x.mid()] {
                    for &ey in &[y.lo(), y.hi(), y.mid()] {
                        assert!(
                            p.contains(ex * ey),
                            "{:?} * {:?} -> {:?} missing {}",
                            x,
                            y,
                            p,
                            ex * ey
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn square_tight_around_zero() {
        let s = iv(-2.0, 1.0).square();
        assert_eq!((s.lo(), s.hi()), (0.0, 4.0));
    }

    #[test]
    fn overflow_reported_at_check() {
        let huge = RigorousReal::point(f64::MAX);
        let sum = huge + huge;
        assert_eq!(sum.check_finite().unwrap_err(), RigorError::Overflow);
    }
}
