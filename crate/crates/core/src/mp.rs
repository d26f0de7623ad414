//! Multiprecision plumbing shared by every module: digit/bit conversion,
//! seeded randomness, and decimal-string serialization.
//!
//! Precision is specified in decimal digits at the API surface and converted
//! to MPFR bits internally with guard bits on top, so that a value carrying
//! `P` digits survives the long dot products and Horner evaluations downstream
//! without contaminating the requested digits.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use rug::float::Special;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};

/// Guard bits added past the requested decimal precision.
const GUARD_BITS: u32 = 48;

/// log2(10) as a (num, den) pair good to well past u32 range.
const LOG2_10_NUM: u64 = 3_321_928_095;
const LOG2_10_DEN: u64 = 1_000_000_000;

/// MPFR bit count for `digits` decimal digits (plus guard bits).
pub fn bits_for_digits(digits: u32) -> u32 {
    let core = (digits as u64 * LOG2_10_NUM).div_ceil(LOG2_10_DEN) as u32;
    core + GUARD_BITS
}

/// 10^exp at the given bit precision.
pub fn pow10(bits: u32, exp: i32) -> Float {
    Float::with_val(bits, 10u32).pow(exp)
}

pub fn pi(bits: u32) -> Float {
    Float::with_val(bits, rug::float::Constant::Pi)
}

pub fn two_pi(bits: u32) -> Float {
    pi(bits) * 2u32
}

/// n! as a float at the given precision.
pub fn factorial(bits: u32, n: u32) -> Float {
    Float::with_val(bits, Float::factorial(n))
}

/// |z| of a complex value, at the value's own precision.
pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Deterministic stream RNG: one ChaCha12 instance per (seed, stream) pair.
/// Parallel consumers draw from disjoint streams, so results are independent
/// of scheduling order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream.into());
    rng
}

/// Uniform dyadic sample in [0, 1) with 128 random bits, exact at `bits`.
pub fn unit_float(rng: &mut ChaCha12Rng, bits: u32) -> Float {
    let hi = rng.next_u64();
    let lo = rng.next_u64();
    let mut x = Float::with_val(bits, hi);
    x >>= 64;
    let mut y = Float::with_val(bits, lo);
    y >>= 128;
    x + y
}

/// Uniform integer in [lo, hi] via unbiased rejection sampling on u64.
pub fn int_in_range(rng: &mut ChaCha12Rng, lo: i64, hi: i64) -> i64 {
    assert!(lo <= hi);
    let span = (hi as i128 - lo as i128 + 1) as u64;
    if span == 0 {
        // full u64 span
        return rng.next_u64() as i64;
    }
    let zone = u64::MAX - u64::MAX % span;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (lo as i128 + (x % span) as i128) as i64;
        }
    }
}

/// Decimal-string form with `digits` significant digits, round-trippable with
/// [`parse_decimal`]. Plain "0" for an exact zero.
pub fn to_decimal_string(x: &Float, digits: usize) -> String {
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_owned();
    }
    if x.is_zero() {
        return "0".to_owned();
    }
    x.to_string_radix(10, Some(digits.max(2)))
}

/// Parse a decimal string produced by [`to_decimal_string`].
pub fn parse_decimal(s: &str, bits: u32) -> Result<Float> {
    match s {
        "nan" => return Ok(Float::with_val(bits, Special::Nan)),
        "inf" => return Ok(Float::with_val(bits, Special::Infinity)),
        "-inf" => return Ok(Float::with_val(bits, Special::NegInfinity)),
        _ => {}
    }
    let incomplete = Float::parse(s)
        .map_err(|e| Error::Format(format!("bad decimal literal {s:?}: {e}")))?;
    Ok(Float::with_val(bits, incomplete))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_cover_digits() {
        // 64 digits need at least 213 bits; guard bits on top.
        assert!(bits_for_digits(64) >= 213 + GUARD_BITS);
        assert!(bits_for_digits(600) >= 1994 + GUARD_BITS);
    }

    #[test]
    fn decimal_roundtrip() {
        let bits = bits_for_digits(50);
        let x = pi(bits) / 7u32;
        let s = to_decimal_string(&x, 55);
        let y = parse_decimal(&s, bits).unwrap();
        let diff = Float::with_val(bits, &x - &y).abs();
        assert!(diff < pow10(bits, -49));
        assert_eq!(to_decimal_string(&Float::with_val(bits, 0), 20), "0");
    }

    #[test]
    fn stream_rng_reproducible_and_disjoint() {
        let mut a = stream_rng(42, 3);
        let mut b = stream_rng(42, 3);
        let mut c = stream_rng(42, 4);
        let (xa, xb, xc) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn int_range_bounds() {
        let mut rng = stream_rng(7, 0);
        for _ in 0..1000 {
            let v = int_in_range(&mut rng, -3, 3);
            assert!((-3..=3).contains(&v));
        }
    }

    #[test]
    fn unit_float_in_range() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            let u = unit_float(&mut rng, 128);
            assert!(u >= 0u32 && u < 1u32);
        }
    }
}
