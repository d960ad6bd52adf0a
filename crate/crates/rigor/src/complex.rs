//! Rectangular complex intervals.

use crate::{RigorError, RigorousReal, Result};
use std::ops::{Add, Mul, Neg, Sub};

/// Rectangular enclosure: contains every z = x + iy with x in `re`, y in
/// `im`. All paper-side bounds consume |.| and component sums, which
/// rectangles support with simple formulas.
#[derive(Clone, Copy, PartialEq)]
pub struct RigorousComplex {
    pub re: RigorousReal,
    pub im: RigorousReal,
}

impl std::fmt::Debug for RigorousComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?} + {:?} i)", self.re, self.im)
    }
}

impl RigorousComplex {
    pub fn new(re: RigorousReal, im: RigorousReal) -> Self {
        Self { re, im }
    }

    pub fn point(re: f64, im: f64) -> Self {
        Self {
            re: RigorousReal::point(re),
            im: RigorousReal::point(im),
        }
    }

    pub const fn zero() -> Self {
        Self {
            re: RigorousReal::zero(),
            im: RigorousReal::zero(),
        }
    }

    pub const fn one() -> Self {
        Self {
            re: RigorousReal::one(),
            im: RigorousReal::zero(),
        }
    }

    pub fn i() -> Self {
        Self {
            re: RigorousReal::zero(),
            im: RigorousReal::one(),
        }
    }

    pub fn from_real(re: RigorousReal) -> Self {
        Self {
            re,
            im: RigorousReal::zero(),
        }
    }

    pub fn is_zero_point(&self) -> bool {
        self.re == RigorousReal::zero() && self.im == RigorousReal::zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn contains(&self, re: f64, im: f64) -> bool {
        self.re.contains(re) && self.im.contains(im)
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0, 0.0)
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.re.overlaps(&other.re) && self.im.overlaps(&other.im)
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    /// Exact multiplication by i: (x + iy) i = -y + ix.
    pub fn mul_i(&self) -> Self {
        Self {
            re: -self.im,
            im: self.re,
        }
    }

    /// Exact scaling by a small integer.
    pub fn scale_int(&self, k: i64) -> Self {
        Self {
            re: self.re.scale_int(k),
            im: self.im.scale_int(k),
        }
    }

    pub fn mul_real(&self, r: &RigorousReal) -> Self {
        Self {
            re: self.re * *r,
            im: self.im * *r,
        }
    }

    /// Enclosure of |z|^2 = x^2 + y^2.
    pub fn norm_sq(&self) -> RigorousReal {
        self.re.square() + self.im.square()
    }

    /// Enclosure of |z|.
    pub fn abs(&self) -> RigorousReal {
        self.norm_sq().sqrt().expect("norm_sq is nonnegative")
    }

    /// Division by multiply-with-conjugate over a positive lower bound of
    /// |b|^2; avoids per-component sign case analysis.
    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        let d = rhs.norm_sq();
        if d.lo() <= 0.0 {
            return Err(RigorError::DivisionByZeroInterval);
        }
        let num = *self * rhs.conj();
        Ok(Self {
            re: num.re.try_div(&d)?,
            im: num.im.try_div(&d)?,
        })
    }

    /// Division by an enclosure of a positive real.
    pub fn div_real(&self, d: &RigorousReal) -> Result<Self> {
        Ok(Self {
            re: self.re.try_div(d)?,
            im: self.im.try_div(d)?,
        })
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self {
            re: self.re.hull(&other.re),
            im: self.im.hull(&other.im),
        }
    }

    pub fn mid(&self) -> (f64, f64) {
        (self.re.mid(), self.im.mid())
    }
}

impl Neg for RigorousComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Add for RigorousComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for RigorousComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for RigorousComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl std::iter::Sum for RigorousComplex {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}
