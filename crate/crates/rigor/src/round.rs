//! Directed-rounding scalar primitives built on error-free transformations.
//!
//! Each primitive computes the round-to-nearest result and the exact sign of
//! the rounding error, then nudges one ulp in the requested direction only
//! when the operation was inexact. No rounding-mode switches.

/// Magnitudes at or above this make Dekker's splitting overflow.
const SPLIT_SAFE: f64 = 3.35195198248564927e299; // ~2^995

/// Smallest normal magnitude; below it product error terms are unreliable.
const MIN_NORMAL: f64 = f64::MIN_POSITIVE;

#[inline]
fn down_sat(s: f64) -> f64 {
    if s == f64::INFINITY {
        f64::MAX
    } else {
        s
    }
}

#[inline]
fn up_sat(s: f64) -> f64 {
    if s == f64::NEG_INFINITY {
        f64::MIN
    } else {
        s
    }
}

/// 2Sum of Knuth: `a + b = s + err` exactly, for finite `s`.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let a1 = s - b;
    let b1 = s - a1;
    let da = a - a1;
    let db = b - b1;
    (s, da + db)
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() { down_sat(s) } else { s };
    }
    if e < 0.0 {
        next_down(s)
    } else {
        s
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() { up_sat(s) } else { s };
    }
    if e > 0.0 {
        next_up(s)
    } else {
        s
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Dekker product: `a * b = p + err` exactly, assuming no overflow in the
/// splitting and a normal product. Returns `None` when those assumptions
/// fail and the caller must fall back to a plain 1-ulp nudge.
#[inline]
fn two_prod(a: f64, b: f64) -> Option<(f64, f64)> {
    if a.abs() >= SPLIT_SAFE || b.abs() >= SPLIT_SAFE {
        return None;
    }
    let p = a * b;
    if !p.is_finite() {
        return None;
    }
    if p != 0.0 && p.abs() < MIN_NORMAL {
        return None;
    }
    const SPLITTER: f64 = 134217729.0; // 2^27 + 1
    let ca = SPLITTER * a;
    let ahi = ca - (ca - a);
    let alo = a - ahi;
    let cb = SPLITTER * b;
    let bhi = cb - (cb - b);
    let blo = b - bhi;
    let e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
    Some((p, e))
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    match two_prod(a, b) {
        Some((p, e)) => {
            if e < 0.0 {
                next_down(p)
            } else {
                p
            }
        }
        None => {
            let p = a * b;
            if !p.is_finite() {
                if a.is_finite() && b.is_finite() {
                    down_sat(p)
                } else {
                    p
                }
            } else {
                next_down(p)
            }
        }
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    match two_prod(a, b) {
        Some((p, e)) => {
            if e > 0.0 {
                next_up(p)
            } else {
                p
            }
        }
        None => {
            let p = a * b;
            if !p.is_finite() {
                if a.is_finite() && b.is_finite() {
                    up_sat(p)
                } else {
                    p
                }
            } else {
                next_up(p)
            }
        }
    }
}

/// Sign of the exact residual `a - q*b`; `None` when it cannot be decided
/// cheaply (caller widens by one ulp on both sides).
#[inline]
fn div_residual_sign(a: f64, b: f64, q: f64) -> Option<std::cmp::Ordering> {
    let (p, e) = two_prod(q, b)?;
    // a and p agree to within one ulp, so a - p is exact by Sterbenz.
    let d = (a - p) - e;
    Some(d.partial_cmp(&0.0).unwrap())
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q == 0.0 && a != 0.0 {
        // Underflow: true quotient is nonzero with the sign of a/b.
        return if (a > 0.0) == (b > 0.0) { 0.0 } else { -f64::from_bits(1) };
    }
    if a == 0.0 {
        return 0.0;
    }
    if !q.is_finite() {
        return down_sat(q);
    }
    use std::cmp::Ordering::*;
    match div_residual_sign(a, b, q) {
        // sign(a/b - q) = sign(a - q b) * sign(b)
        Some(Equal) => q,
        Some(s) => {
            let below = (s == Less) == (b > 0.0);
            if below {
                next_down(q)
            } else {
                q
            }
        }
        None => next_down(q),
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q == 0.0 && a != 0.0 {
        return if (a > 0.0) == (b > 0.0) { f64::from_bits(1) } else { -0.0 };
    }
    if a == 0.0 {
        return 0.0;
    }
    if !q.is_finite() {
        return up_sat(q);
    }
    use std::cmp::Ordering::*;
    match div_residual_sign(a, b, q) {
        Some(Equal) => q,
        Some(s) => {
            let above = (s == Greater) == (b > 0.0);
            if above {
                next_up(q)
            } else {
                q
            }
        }
        None => next_up(q),
    }
}

#[inline]
pub fn sqrt_down(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    match two_prod(s, s) {
        Some((p, e)) => {
            let d = (a - p) - e;
            if d < 0.0 {
                next_down(s)
            } else {
                s
            }
        }
        None => next_down(s),
    }
}

#[inline]
pub fn sqrt_up(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    match two_prod(s, s) {
        Some((p, e)) => {
            let d = (a - p) - e;
            if d > 0.0 {
                next_up(s)
            } else {
                s
            }
        }
        None => next_up(s),
    }
}

#[inline]
pub fn next_down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
pub fn next_up(x: f64) -> f64 {
    x.next_up()
}
