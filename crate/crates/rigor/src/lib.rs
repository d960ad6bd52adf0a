//! Outward-rounded interval arithmetic over IEEE-754 binary64.
//!
//! Every operation returns an interval that contains the exact real (or
//! complex) result for any choice of representatives inside the operand
//! intervals. Directed rounding is done by endpoint nudging with error-free
//! transformations (2Sum / Dekker products), never by switching the global
//! floating-point rounding mode, so values are safe to evaluate concurrently
//! from any number of workers.
//!
//! Exact operations stay exact: `[1,1] + [1,1]` has width zero. Inexact
//! single operations widen by at most one ulp per endpoint (two for division
//! and square roots on the rare fallback paths).

mod complex;
mod real;
mod round;
mod sum;

pub use complex::RigorousComplex;
pub use real::RigorousReal;
pub use sum::ExactSum;

use thiserror::Error;

/// Errors reported by interval operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RigorError {
    /// The divisor interval contains 0 (real case) or the lower bound of
    /// |b|^2 is not strictly positive (complex case).
    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,
    /// Argument outside the operation's domain, e.g. sqrt of an interval
    /// with a negative lower endpoint.
    #[error("argument outside the operation domain")]
    DomainError,
    /// An endpoint left the binary64 range.
    #[error("interval endpoint overflowed binary64")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, RigorError>;

/// Encode a binary64 as its lowercase hexadecimal bit pattern, e.g.
/// `0x3fe0000000000000` for 0.5. Bit-exact persistence format.
pub fn f64_to_hex(x: f64) -> String {
    format!("{:#018x}", x.to_bits())
}

/// Decode a binary64 from the hexadecimal bit pattern produced by
/// [`f64_to_hex`]. Rejects NaN payloads.
pub fn f64_from_hex(s: &str) -> Option<f64> {
    let t = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
    if t.len() != 16 {
        return None;
    }
    let bits = u64::from_str_radix(t, 16).ok()?;
    let x = f64::from_bits(bits);
    if x.is_nan() {
        return None;
    }
    Some(x)
}
