//! Parameterizable floating-point and fixed-point representations.
//!
//! A [`FloatFormat`] is a sign bit, `exp_bits` of biased exponent and
//! `mantissa_bits` of stored fraction; normal values denote
//! `(-1)^s * 2^e * 1.m` with an implicit leading one. There are no
//! subnormals: anything below the smallest normal flushes to zero, and all
//! mantissa narrowing truncates toward zero. [`FixedValue`] is a
//! two's-complement fixed-point number with `M` integer and `N` fraction
//! bits; [`float_to_fixed`] and [`fixed_to_float`] convert between the two
//! (a mantissa shift one way, a leading-one scan the other).

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("invalid format string `{0}`: expected floatW(m,e) with W = 1 + m + e")]
    BadFormatString(String),
    #[error("unsupported field widths: mantissa {0}, exponent {1}")]
    BadWidths(u32, u32),
    #[error("unconvertible class: {0:?} has no fixed-point representation")]
    UnconvertibleClass(FpClass),
    #[error("fixed-point width M+N+1 = {0} exceeds 127 bits")]
    WidthTooLarge(u32),
}

/// Widths (and exponent bias) of a custom floating-point format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloatFormat {
    /// Stored fraction width in bits (the leading 1 is implicit).
    pub mantissa_bits: u32,
    /// Biased exponent width in bits.
    pub exp_bits: u32,
    /// Exponent bias; defaults to `2^(exp_bits-1) - 1`.
    pub bias: i32,
}

impl FloatFormat {
    /// New format with the default bias `2^(exp_bits-1) - 1`.
    pub fn new(mantissa_bits: u32, exp_bits: u32) -> Self {
        assert!(
            (1..=53).contains(&mantissa_bits) && (1..=15).contains(&exp_bits),
            "unsupported widths: mantissa {mantissa_bits}, exponent {exp_bits}"
        );
        let bias = (1i32 << (exp_bits - 1)) - 1;
        FloatFormat { mantissa_bits, exp_bits, bias }
    }

    pub fn float16() -> Self {
        FloatFormat::new(10, 5)
    }

    pub fn float32() -> Self {
        FloatFormat::new(23, 8)
    }

    pub fn float64() -> Self {
        FloatFormat::new(53, 10)
    }

    /// Total encoded width: sign + exponent + fraction.
    pub fn total_bits(&self) -> u32 {
        1 + self.exp_bits + self.mantissa_bits
    }

    /// All-ones biased exponent, reserved for infinities and NaNs.
    pub fn max_biased_exp(&self) -> u32 {
        (1u32 << self.exp_bits) - 1
    }

    /// Largest biased exponent of a normal value.
    pub fn max_normal_biased_exp(&self) -> u32 {
        self.max_biased_exp() - 1
    }

    pub fn fraction_mask(&self) -> u64 {
        if self.mantissa_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.mantissa_bits) - 1
        }
    }

    /// Number of hex digits used when printing encoded patterns.
    pub fn hex_digits(&self) -> usize {
        ((self.total_bits() + 3) / 4) as usize
    }

    /// Format an encoded pattern as fixed-width lowercase hex.
    pub fn hex(&self, bits: u128) -> String {
        format!("{:0width$x}", bits, width = self.hex_digits())
    }

    /// Parse a `floatW(m,e)` string, e.g. `float16(10,5)`.
    pub fn parse(s: &str) -> Result<Self, FormatError> {
        let bad = || FormatError::BadFormatString(s.to_string());
        let rest = s.trim().strip_prefix("float").ok_or_else(bad)?;
        let open = rest.find('(').ok_or_else(bad)?;
        let width: u32 = rest[..open].parse().map_err(|_| bad())?;
        let inner = rest[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let mut parts = inner.split(',');
        let m: u32 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let e: u32 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if parts.next().is_some() || width != 1 + m + e {
            return Err(bad());
        }
        if !(1..=53).contains(&m) || !(1..=15).contains(&e) {
            return Err(FormatError::BadWidths(m, e));
        }
        Ok(FloatFormat::new(m, e))
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "float{}({},{})", self.total_bits(), self.mantissa_bits, self.exp_bits)
    }
}

/// Value class. Infinities and NaNs use the all-ones biased exponent
/// (NaN iff the fraction is nonzero); zero is the all-zeros exponent and
/// fraction. There is no subnormal class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FpClass {
    Zero,
    Normal,
    Inf,
    NaN,
}

/// A decoded value in some [`FloatFormat`].
///
/// Equality is representation equality (two NaNs with the same fraction
/// compare equal); use [`crate::arith::fp_compare`] for numeric ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpValue {
    pub format: FloatFormat,
    pub sign: bool,
    pub biased_exp: u32,
    pub fraction: u64,
    pub class: FpClass,
}

impl FpValue {
    /// Canonical (positive) zero.
    pub fn zero(format: FloatFormat) -> Self {
        FpValue { format, sign: false, biased_exp: 0, fraction: 0, class: FpClass::Zero }
    }

    pub fn inf(format: FloatFormat, sign: bool) -> Self {
        FpValue { format, sign, biased_exp: format.max_biased_exp(), fraction: 0, class: FpClass::Inf }
    }

    /// Canonical quiet NaN (fraction MSB set).
    pub fn nan(format: FloatFormat) -> Self {
        FpValue {
            format,
            sign: false,
            biased_exp: format.max_biased_exp(),
            fraction: 1u64 << (format.mantissa_bits - 1),
            class: FpClass::NaN,
        }
    }

    /// Normal value from raw fields (caller guarantees ranges).
    pub fn normal(format: FloatFormat, sign: bool, biased_exp: u32, fraction: u64) -> Self {
        debug_assert!(biased_exp <= format.max_normal_biased_exp());
        debug_assert!(fraction <= format.fraction_mask());
        FpValue { format, sign, biased_exp, fraction, class: FpClass::Normal }
    }

    /// Build a normal from a possibly out-of-range biased exponent:
    /// overflow saturates to infinity, underflow flushes to zero.
    pub fn normal_or_saturate(format: FloatFormat, sign: bool, biased_exp: i64, fraction: u64) -> Self {
        if biased_exp >= format.max_biased_exp() as i64 {
            FpValue::inf(format, sign)
        } else if biased_exp < 1 {
            FpValue::zero(format)
        } else {
            FpValue::normal(format, sign, biased_exp as u32, fraction)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.class == FpClass::Zero
    }

    pub fn is_normal(&self) -> bool {
        self.class == FpClass::Normal
    }

    pub fn is_inf(&self) -> bool {
        self.class == FpClass::Inf
    }

    pub fn is_nan(&self) -> bool {
        self.class == FpClass::NaN
    }

    /// Unbiased exponent of a normal value.
    pub fn exponent(&self) -> i32 {
        self.biased_exp as i32 - self.format.bias
    }

    /// Flip the sign bit (zero stays canonical positive).
    pub fn neg(&self) -> Self {
        let mut v = *self;
        if v.class != FpClass::Zero && v.class != FpClass::NaN {
            v.sign = !v.sign;
        }
        v
    }

    /// Copy with the sign cleared.
    pub fn abs(&self) -> Self {
        let mut v = *self;
        if v.class != FpClass::NaN {
            v.sign = false;
        }
        v
    }

    /// Closest `f64` to the represented value.
    pub fn value(&self) -> f64 {
        match self.class {
            FpClass::Zero => 0.0,
            FpClass::Inf => {
                if self.sign {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            FpClass::NaN => f64::NAN,
            FpClass::Normal => {
                let mb = self.format.mantissa_bits;
                let sig = 1.0 + self.fraction as f64 / (1u64 << mb) as f64;
                let mag = sig * (self.exponent() as f64).exp2();
                if self.sign {
                    -mag
                } else {
                    mag
                }
            }
        }
    }
}

/// Concatenate sign, biased exponent and fraction into a bit pattern.
pub fn encode(v: &FpValue) -> u128 {
    let f = v.format;
    ((v.sign as u128) << (f.exp_bits + f.mantissa_bits))
        | ((v.biased_exp as u128) << f.mantissa_bits)
        | v.fraction as u128
}

/// Inverse of [`encode`]; classifies the pattern. Every pattern round-trips,
/// including non-canonical ones (a zero biased exponent with a nonzero
/// fraction decodes as a normal with that exponent field).
pub fn decode(bits: u128, format: FloatFormat) -> FpValue {
    let mb = format.mantissa_bits;
    let fraction = (bits as u64) & format.fraction_mask();
    let biased_exp = ((bits >> mb) as u32) & format.max_biased_exp();
    let sign = (bits >> (format.exp_bits + mb)) & 1 == 1;
    let class = if biased_exp == format.max_biased_exp() {
        if fraction == 0 {
            FpClass::Inf
        } else {
            FpClass::NaN
        }
    } else if biased_exp == 0 && fraction == 0 {
        FpClass::Zero
    } else {
        FpClass::Normal
    };
    FpValue { format, sign, biased_exp, fraction, class }
}

/// Nearest-below conversion from a real: the fraction is the truncation of
/// `|x|`'s significand to `mantissa_bits`. Overflow gives infinity and
/// magnitudes below the smallest normal flush to zero.
pub fn from_real(x: f64, format: FloatFormat) -> FpValue {
    if x.is_nan() {
        return FpValue::nan(format);
    }
    if x.is_infinite() {
        return FpValue::inf(format, x < 0.0);
    }
    if x == 0.0 {
        return FpValue::zero(format);
    }
    let bits = x.to_bits();
    let sign = bits >> 63 == 1;
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac52 = bits & ((1u64 << 52) - 1);
    // Normalize |x| to sig in [2^52, 2^53) with |x| = sig * 2^(e-52).
    let (e, sig) = if raw_exp == 0 {
        let p = 63 - frac52.leading_zeros() as i32;
        (p - 1074, frac52 << (52 - p))
    } else {
        (raw_exp - 1023, (1u64 << 52) | frac52)
    };
    let mb = format.mantissa_bits;
    let fraction = if mb <= 52 {
        (sig >> (52 - mb)) & format.fraction_mask()
    } else {
        (sig & ((1u64 << 52) - 1)) << (mb - 52)
    };
    FpValue::normal_or_saturate(format, sign, e as i64 + format.bias as i64, fraction)
}

/// Two's-complement fixed-point number: `M` integer bits, `N` fraction
/// bits and a sign bit, so the raw pattern spans `M+N+1` bits and the
/// denoted value is `raw / 2^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedValue {
    pub int_bits: u32,
    pub frac_bits: u32,
    pub raw: i128,
}

impl FixedValue {
    pub fn new(int_bits: u32, frac_bits: u32, raw: i128) -> Result<Self, FormatError> {
        let width = int_bits + frac_bits + 1;
        if width > 127 {
            return Err(FormatError::WidthTooLarge(width));
        }
        let v = FixedValue { int_bits, frac_bits, raw };
        debug_assert!(raw >= v.min_raw() && raw <= v.max_raw());
        Ok(v)
    }

    pub fn max_raw(&self) -> i128 {
        (1i128 << (self.int_bits + self.frac_bits)) - 1
    }

    pub fn min_raw(&self) -> i128 {
        -(1i128 << (self.int_bits + self.frac_bits))
    }

    /// Truncate-toward-zero conversion from a real, saturating at the
    /// representable range.
    pub fn from_f64(x: f64, int_bits: u32, frac_bits: u32) -> Result<Self, FormatError> {
        let width = int_bits + frac_bits + 1;
        if width > 127 {
            return Err(FormatError::WidthTooLarge(width));
        }
        let mut v = FixedValue { int_bits, frac_bits, raw: 0 };
        if x.is_nan() {
            return Ok(v);
        }
        let scaled = (x * (frac_bits as f64).exp2()).trunc();
        v.raw = if scaled >= v.max_raw() as f64 {
            v.max_raw()
        } else if scaled <= v.min_raw() as f64 {
            v.min_raw()
        } else {
            scaled as i128
        };
        Ok(v)
    }

    pub fn value(&self) -> f64 {
        self.raw as f64 / (self.frac_bits as f64).exp2()
    }

    /// Raw pattern as an unsigned field of `M+N+1` bits (two's complement).
    pub fn to_bits(&self) -> u128 {
        let width = self.int_bits + self.frac_bits + 1;
        (self.raw as u128) & ((1u128 << width) - 1)
    }
}

/// Float-to-fixed conversion: `raw = trunc(value * 2^N)`, i.e. a shift of
/// the significand by `e + N` bits, saturating at the two's-complement
/// range. Only zero and normal values convert.
pub fn float_to_fixed(x: &FpValue, int_bits: u32, frac_bits: u32) -> Result<FixedValue, FormatError> {
    let width = int_bits + frac_bits + 1;
    if width > 127 {
        return Err(FormatError::WidthTooLarge(width));
    }
    match x.class {
        FpClass::Inf | FpClass::NaN => Err(FormatError::UnconvertibleClass(x.class)),
        FpClass::Zero => FixedValue::new(int_bits, frac_bits, 0),
        FpClass::Normal => {
            let mb = x.format.mantissa_bits;
            let sig = (1u128 << mb) | x.fraction as u128;
            let shift = x.exponent() as i64 + frac_bits as i64 - mb as i64;
            let sig_top = 128 - sig.leading_zeros() as i64;
            let mag = if shift >= 0 {
                if sig_top + shift > 127 {
                    u128::MAX // forces saturation below
                } else {
                    sig << shift
                }
            } else if -shift >= 128 {
                0
            } else {
                sig >> (-shift)
            };
            let mut v = FixedValue { int_bits, frac_bits, raw: 0 };
            let clamped = if mag > v.max_raw() as u128 {
                if x.sign {
                    v.min_raw()
                } else {
                    v.max_raw()
                }
            } else if x.sign {
                -(mag as i128)
            } else {
                mag as i128
            };
            v.raw = clamped;
            Ok(v)
        }
    }
}

/// Fixed-to-float conversion: the exponent comes from the position of the
/// leading one, the fraction from truncating the magnitude below it, and
/// the sign from the two's-complement sign bit.
pub fn fixed_to_float(x: &FixedValue, format: FloatFormat) -> FpValue {
    if x.raw == 0 {
        return FpValue::zero(format);
    }
    let sign = x.raw < 0;
    let mag = x.raw.unsigned_abs();
    let p = 127 - mag.leading_zeros();
    let mb = format.mantissa_bits;
    let fraction = if p >= mb {
        ((mag >> (p - mb)) as u64) & format.fraction_mask()
    } else {
        ((mag << (mb - p)) as u64) & format.fraction_mask()
    };
    let biased = p as i64 - x.frac_bits as i64 + format.bias as i64;
    FpValue::normal_or_saturate(format, sign, biased, fraction)
}
