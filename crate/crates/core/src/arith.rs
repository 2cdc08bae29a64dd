//! Bit-accurate floating-point operators: add/sub, multiply, exponent
//! shifts, max, compare and compare-and-swap.
//!
//! The adder keeps every bit shifted out during operand alignment and
//! truncates once at the final normalization, so results are exactly the
//! truncation toward zero of the real-valued result (absent overflow or
//! underflow). NaNs propagate through add/mul; `Inf - Inf` and `0 * Inf`
//! produce NaN.

use crate::formats::{FpClass, FpValue};

/// Outcome of a floating-point comparison. Non-NaN values are totally
/// ordered consistently with their real values; any NaN is unordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpOrder {
    Lt,
    Eq,
    Gt,
    Unordered,
}

fn extract_fraction(mag: u128, msb: u32, mantissa_bits: u32) -> u64 {
    let mask = if mantissa_bits == 64 { u64::MAX } else { (1u64 << mantissa_bits) - 1 };
    if msb >= mantissa_bits {
        ((mag >> (msb - mantissa_bits)) as u64) & mask
    } else {
        ((mag << (mantissa_bits - msb)) as u64) & mask
    }
}

fn add_normals(x: &FpValue, y: &FpValue) -> FpValue {
    let fmt = x.format;
    let mb = fmt.mantissa_bits;
    // Swap so |hi| >= |lo|; exponent difference is then non-negative.
    let (hi, lo) = if (y.biased_exp, y.fraction) > (x.biased_exp, x.fraction) { (y, x) } else { (x, y) };
    // Alignment shifts beyond mb+2 cannot change the truncated result;
    // clamping keeps the magnitude inside 128 bits.
    let d = (hi.biased_exp - lo.biased_exp).min(mb + 2);
    let sig_hi = (1u128 << mb) | hi.fraction as u128;
    let sig_lo = (1u128 << mb) | lo.fraction as u128;
    let mag = if hi.sign == lo.sign { (sig_hi << d) + sig_lo } else { (sig_hi << d) - sig_lo };
    if mag == 0 {
        // Exact cancellation yields canonical +0.
        return FpValue::zero(fmt);
    }
    let msb = 127 - mag.leading_zeros();
    let biased = hi.biased_exp as i64 + msb as i64 - (mb + d) as i64;
    FpValue::normal_or_saturate(fmt, hi.sign, biased, extract_fraction(mag, msb, mb))
}

pub fn fp_add(x: &FpValue, y: &FpValue) -> FpValue {
    debug_assert_eq!(x.format, y.format);
    let fmt = x.format;
    use FpClass::*;
    match (x.class, y.class) {
        (NaN, _) | (_, NaN) => FpValue::nan(fmt),
        (Inf, Inf) => {
            if x.sign == y.sign {
                FpValue::inf(fmt, x.sign)
            } else {
                FpValue::nan(fmt)
            }
        }
        (Inf, _) => *x,
        (_, Inf) => *y,
        (Zero, Zero) => FpValue::zero(fmt),
        (Zero, _) => *y,
        (_, Zero) => *x,
        (Normal, Normal) => add_normals(x, y),
    }
}

pub fn fp_sub(x: &FpValue, y: &FpValue) -> FpValue {
    fp_add(x, &y.neg())
}

pub fn fp_mul(x: &FpValue, y: &FpValue) -> FpValue {
    debug_assert_eq!(x.format, y.format);
    let fmt = x.format;
    let sign = x.sign ^ y.sign;
    use FpClass::*;
    match (x.class, y.class) {
        (NaN, _) | (_, NaN) => FpValue::nan(fmt),
        (Zero, Inf) | (Inf, Zero) => FpValue::nan(fmt),
        (Inf, _) | (_, Inf) => FpValue::inf(fmt, sign),
        (Zero, _) | (_, Zero) => FpValue::zero(fmt),
        (Normal, Normal) => {
            let mb = fmt.mantissa_bits;
            let sig_x = (1u128 << mb) | x.fraction as u128;
            let sig_y = (1u128 << mb) | y.fraction as u128;
            let prod = sig_x * sig_y; // scale 2^(2*mb), msb at 2mb or 2mb+1
            let msb = 127 - prod.leading_zeros();
            let biased = x.biased_exp as i64 + y.biased_exp as i64 - fmt.bias as i64
                + (msb as i64 - 2 * mb as i64);
            FpValue::normal_or_saturate(fmt, sign, biased, extract_fraction(prod, msb, mb))
        }
    }
}

/// Divide by `2^n`: subtract `n` from the exponent. Zero, infinity and NaN
/// pass through; underflow flushes to zero.
pub fn fp_rsh(x: &FpValue, n: u32) -> FpValue {
    match x.class {
        FpClass::Normal => {
            FpValue::normal_or_saturate(x.format, x.sign, x.biased_exp as i64 - n as i64, x.fraction)
        }
        _ => *x,
    }
}

/// Multiply by `2^n`: add `n` to the exponent. Overflow saturates to
/// infinity.
pub fn fp_lsh(x: &FpValue, n: u32) -> FpValue {
    match x.class {
        FpClass::Normal => {
            FpValue::normal_or_saturate(x.format, x.sign, x.biased_exp as i64 + n as i64, x.fraction)
        }
        _ => *x,
    }
}

pub fn fp_compare(x: &FpValue, y: &FpValue) -> FpOrder {
    debug_assert_eq!(x.format, y.format);
    use FpClass::*;
    if x.is_nan() || y.is_nan() {
        return FpOrder::Unordered;
    }
    // Rank on sign first, then magnitude; zeros compare equal regardless of
    // their stored sign bit.
    let key = |v: &FpValue| -> (i32, i128) {
        let sgn: i128 = if v.is_zero() {
            0
        } else if v.sign {
            -1
        } else {
            1
        };
        let mag: i128 = match v.class {
            Zero => 0,
            Inf => i128::MAX,
            // 54 > any mantissa width, so (exp, fraction) packs losslessly
            _ => ((v.biased_exp as i128) << 54) | v.fraction as i128,
        };
        (sgn as i32, sgn * mag)
    };
    let (kx, ky) = (key(x), key(y));
    match kx.cmp(&ky) {
        std::cmp::Ordering::Less => FpOrder::Lt,
        std::cmp::Ordering::Equal => FpOrder::Eq,
        std::cmp::Ordering::Greater => FpOrder::Gt,
    }
}

/// Maximum under the total order. A NaN operand never survives: the other
/// operand is returned (both NaN gives NaN).
pub fn fp_max(x: &FpValue, y: &FpValue) -> FpValue {
    if x.is_nan() {
        return *y;
    }
    if y.is_nan() {
        return *x;
    }
    match fp_compare(x, y) {
        FpOrder::Lt => *y,
        _ => *x,
    }
}

/// Order a pair: returns `(min, max)`. Equal or unordered inputs keep their
/// original order, so the operation is stable and idempotent.
pub fn cmp_and_swap(a: &FpValue, b: &FpValue) -> (FpValue, FpValue) {
    if fp_compare(a, b) == FpOrder::Gt {
        (*b, *a)
    } else {
        (*a, *b)
    }
}

/// Balanced-tree sum of a value slice, associating exactly like the
/// hardware adder tree: the largest power of two splits off first and the
/// remainder reduces recursively.
pub fn sum_tree(values: &[FpValue]) -> FpValue {
    match values.len() {
        0 => panic!("sum_tree of empty slice"),
        1 => values[0],
        n => {
            let split = if n.is_power_of_two() { n / 2 } else { prev_power_of_two(n) };
            let (left, right) = values.split_at(split);
            fp_add(&sum_tree(left), &sum_tree(right))
        }
    }
}

pub(crate) fn prev_power_of_two(n: usize) -> usize {
    debug_assert!(n >= 2);
    let mut p = 1;
    while p * 2 < n {
        p *= 2;
    }
    p
}
