//! Exact fixed-point accumulation of binary64 terms.
//!
//! `ExactSum` is a long accumulator covering the full binary64 exponent
//! range. Adding a finite double is exact, so the final value is the exact
//! real sum of all terms, independent of the order in which they arrive.
//! `round_down`/`round_up` return the neighbouring doubles of that exact
//! value (the value itself when representable). This is what makes long
//! cancelling convolution sums reproducible and tight: the enclosure width
//! is governed by the exact result, not by intermediate magnitudes.

/// Bits below 2^0 (covers subnormals down to 2^-1074).
const FRAC_BITS: usize = 1074;
/// 34 * 64 = 2176 bits: 1074 fraction + 1024 integer + carry headroom + sign.
const WORDS: usize = 34;

#[derive(Clone)]
pub struct ExactSum {
    words: [u64; WORDS],
    poisoned_pos: bool,
    poisoned_neg: bool,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self {
            words: [0u64; WORDS],
            poisoned_pos: false,
            poisoned_neg: false,
        }
    }

    pub fn is_zero(&self) -> bool {
        !self.poisoned_pos && !self.poisoned_neg && self.words.iter().all(|&w| w == 0)
    }

    /// Add a finite term exactly. Infinite terms poison the accumulator and
    /// the final rounding saturates; NaN is a programming error.
    pub fn add(&mut self, x: f64) {
        if x == 0.0 {
            return;
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        if exp == 0x7ff {
            assert!(!x.is_nan(), "NaN fed to ExactSum");
            if x > 0.0 {
                self.poisoned_pos = true;
            } else {
                self.poisoned_neg = true;
            }
            return;
        }
        let frac = bits & ((1u64 << 52) - 1);
        let (m, pos) = if exp == 0 {
            (frac, 0usize)
        } else {
            (frac | (1u64 << 52), (exp - 1) as usize)
        };
        let wide = (m as u128) << (pos % 64);
        let lo = wide as u64;
        let hi = (wide >> 64) as u64;
        let w = pos / 64;
        if bits >> 63 == 0 {
            self.add_at(w, lo, hi);
        } else {
            self.sub_at(w, lo, hi);
        }
    }

    fn add_at(&mut self, w: usize, lo: u64, hi: u64) {
        let (s, mut carry) = self.words[w].overflowing_add(lo);
        self.words[w] = s;
        let mut i = w + 1;
        let mut extra = hi;
        while i < WORDS && (carry || extra != 0) {
            let (s1, c1) = self.words[i].overflowing_add(extra);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            self.words[i] = s2;
            carry = c1 || c2;
            extra = 0;
            i += 1;
        }
        // Two's complement: a final carry just means the sum crossed zero.
    }

    fn sub_at(&mut self, w: usize, lo: u64, hi: u64) {
        let (s, mut borrow) = self.words[w].overflowing_sub(lo);
        self.words[w] = s;
        let mut i = w + 1;
        let mut extra = hi;
        while i < WORDS && (borrow || extra != 0) {
            let (s1, b1) = self.words[i].overflowing_sub(extra);
            let (s2, b2) = s1.overflowing_sub(borrow as u64);
            self.words[i] = s2;
            borrow = b1 || b2;
            extra = 0;
            i += 1;
        }
        // Two's complement: a final borrow just means the sum went negative.
    }

    fn magnitude(&self) -> ([u64; WORDS], bool) {
        let negative = self.words[WORDS - 1] >> 63 == 1;
        if !negative {
            return (self.words, false);
        }
        let mut mag = [0u64; WORDS];
        let mut carry = 1u64;
        for i in 0..WORDS {
            let (s, c) = (!self.words[i]).overflowing_add(carry);
            mag[i] = s;
            carry = c as u64;
        }
        (mag, true)
    }

    /// Largest double <= the exact sum.
    pub fn round_down(&self) -> f64 {
        if self.poisoned_neg {
            return f64::NEG_INFINITY;
        }
        if self.poisoned_pos {
            return f64::NEG_INFINITY; // poisoned: no information
        }
        self.round(true)
    }

    /// Smallest double >= the exact sum.
    pub fn round_up(&self) -> f64 {
        if self.poisoned_pos {
            return f64::INFINITY;
        }
        if self.poisoned_neg {
            return f64::INFINITY;
        }
        self.round(false)
    }

    fn round(&self, down: bool) -> f64 {
        let (mag, negative) = self.magnitude();
        let mut h: i64 = -1;
        for i in (0..WORDS).rev() {
            if mag[i] != 0 {
                h = (i as i64) * 64 + 63 - mag[i].leading_zeros() as i64;
                break;
            }
        }
        if h < 0 {
            return 0.0;
        }
        let value = if h <= 51 {
            // Exact subnormal (or zero-exponent) magnitude.
            let m = mag[0];
            debug_assert!(m < (1u64 << 52));
            f64::from_bits(m)
        } else {
            let lsb = h - 52;
            let m = get_bits(&mag, lsb as usize, 53);
            let sticky = any_below(&mag, lsb as usize);
            let e_field = h - (FRAC_BITS as i64) + 1023 + 52 - 52; // = h - 51
            debug_assert_eq!(e_field, h - 51);
            let c = if e_field >= 2047 {
                f64::INFINITY
            } else {
                f64::from_bits(((e_field as u64) << 52) | (m & ((1u64 << 52) - 1)))
            };
            // c (or inf) truncates the magnitude toward zero.
            return match (negative, down, sticky || c.is_infinite()) {
                (false, true, _) => {
                    if c.is_infinite() {
                        f64::MAX
                    } else {
                        c
                    }
                }
                (false, false, false) => c,
                (false, false, true) => {
                    if c.is_infinite() {
                        f64::INFINITY
                    } else {
                        c.next_up()
                    }
                }
                (true, false, _) => {
                    if c.is_infinite() {
                        -f64::MAX
                    } else {
                        -c
                    }
                }
                (true, true, false) => -c,
                (true, true, true) => {
                    if c.is_infinite() {
                        f64::NEG_INFINITY
                    } else {
                        (-c).next_down()
                    }
                }
            };
        };
        if negative {
            -value
        } else {
            value
        }
    }
}

/// 53-bit window starting at bit `pos` (little-endian bit order).
fn get_bits(words: &[u64; WORDS], pos: usize, count: usize) -> u64 {
    debug_assert!(count <= 53);
    let w = pos / 64;
    let off = pos % 64;
    let lo = words[w] >> off;
    let hi = if off == 0 || w + 1 >= WORDS {
        0
    } else {
        words[w + 1] << (64 - off)
    };
    (lo | hi) & ((1u64 << count) - 1)
}

/// Any set bit strictly below `pos`?
fn any_below(words: &[u64; WORDS], pos: usize) -> bool {
    let w = pos / 64;
    let off = pos % 64;
    if off > 0 && (words[w] & ((1u64 << off) - 1)) != 0 {
        return true;
    }
    words[..w].iter().any(|&x| x != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_pair(terms: &[f64]) -> (f64, f64) {
        let mut acc = ExactSum::new();
        for &t in terms {
            acc.add(t);
        }
        (acc.round_down(), acc.round_up())
    }

    #[test]
    fn empty_and_cancelling_sums_are_zero() {
        assert_eq!(exact_pair(&[]), (0.0, 0.0));
        assert_eq!(exact_pair(&[1.0, 2.5, -2.5, -1.0]), (0.0, 0.0));
        assert_eq!(exact_pair(&[1e300, -1e300, 1e-300, -1e-300]), (0.0, 0.0));
    }

    #[test]
    fn representable_sums_are_exact() {
        assert_eq!(exact_pair(&[1.0, 1.0]), (2.0, 2.0));
        assert_eq!(exact_pair(&[0.5, 0.25, 0.125]), (0.875, 0.875));
        let big = 2f64.powi(52);
        assert_eq!(exact_pair(&[big, 1.0]), (big + 1.0, big + 1.0)); // ulp(2^52) = 1, exact
    }

    #[test]
    fn order_independence_bitwise() {
        let terms = [1.0, 1e-30, -0.3333333333333333, 7.25e10, -1e-30, 0.1];
        let mut perm = terms;
        perm.reverse();
        assert_eq!(exact_pair(&terms), exact_pair(&perm));
        let shuffled = [terms[3], terms[0], terms[5], terms[1], terms[4], terms[2]];
        assert_eq!(exact_pair(&terms), exact_pair(&shuffled));
    }

    #[test]
    fn straddles_inexact_sums_by_one_ulp() {
        let (lo, hi) = exact_pair(&[1.0, 1e-30]);
        assert_eq!(lo, 1.0);
        assert_eq!(hi, 1.0f64.next_up());
        let (lo, hi) = exact_pair(&[1.0, -1e-30]);
        assert_eq!(lo, 1.0f64.next_down());
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn negative_and_subnormal_paths() {
        let (lo, hi) = exact_pair(&[-1.0, -1e-30]);
        assert_eq!(hi, -1.0);
        assert_eq!(lo, (-1.0f64).next_down());
        let tiny = f64::from_bits(3); // subnormal
        assert_eq!(exact_pair(&[tiny, tiny]), (f64::from_bits(6), f64::from_bits(6)));
        let (lo, hi) = exact_pair(&[f64::MIN_POSITIVE, -f64::from_bits(1)]);
        assert_eq!(lo, hi); // exact subnormal result
    }

    #[test]
    fn poisoning_saturates() {
        let mut acc = ExactSum::new();
        acc.add(f64::INFINITY);
        assert_eq!(acc.round_up(), f64::INFINITY);
        assert_eq!(acc.round_down(), f64::NEG_INFINITY);
    }

    #[test]
    fn matches_i128_reference_on_scaled_integers() {
        // Terms are k * 2^-20 with k integer: exact rational bookkeeping in i128.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..200);
            let mut acc = ExactSum::new();
            let mut reference: i128 = 0;
            for _ in 0..n {
                let k: i64 = rng.gen_range(-(1 << 40)..(1 << 40));
                reference += k as i128;
                acc.add(k as f64 / (1u64 << 20) as f64);
            }
            let exact = reference as f64 / (1u64 << 20) as f64;
            // |reference| < 2^48ish so the conversion above is exact
            assert_eq!(acc.round_down(), exact);
            assert_eq!(acc.round_up(), exact);
        }
    }

    #[test]
    fn huge_magnitude_overflow_saturation() {
        let mut acc = ExactSum::new();
        for _ in 0..3 {
            acc.add(f64::MAX);
        }
        assert_eq!(acc.round_up(), f64::INFINITY);
        assert_eq!(acc.round_down(), f64::MAX);
    }
}
