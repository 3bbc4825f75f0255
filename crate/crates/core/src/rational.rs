//! Helpers for exact rationals at the reporting boundary: parsing decimal or
//! fractional literals, half-even decimal rounding and logarithms.

use std::f64::consts::LN_2;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"3"`, `"-3/8"`, `"0.137"` or `"1e-3"`-free decimal literals into an
/// exact rational. Decimal literals are read exactly, never through `f64`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = BigRational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn format_rational(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Rounds to `decimals` places with ties going to the even neighbour and
/// renders the result with exactly that many fractional digits.
pub fn round_half_even(value: &BigRational, decimals: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), decimals);
    let scaled = value * BigRational::from_integer(scale.clone());
    let floor = scaled.floor();
    let frac = &scaled - &floor;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut q = floor.to_integer();
    if frac > half || (frac == half && q.is_odd()) {
        q += 1;
    }
    let negative = q.sign() == Sign::Minus;
    let digits = q.abs().to_string();
    let digits = if digits.len() <= decimals {
        format!("{}{}", "0".repeat(decimals + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = digits.split_at(digits.len() - decimals);
    let sign = if negative { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or_else(|| ln_rational(value).exp())
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * LN_2
}

/// Natural logarithm of a positive rational, robust to numerators and
/// denominators far outside the `f64` range.
pub fn ln_rational(value: &BigRational) -> f64 {
    if !value.is_positive() {
        return if value.is_zero() { f64::NEG_INFINITY } else { f64::NAN };
    }
    ln_bigint(value.numer()) - ln_bigint(value.denom())
}

pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.137").unwrap(), ratio(137, 1000));
        assert_eq!(parse_rational("-3/6").unwrap(), -ratio(1, 2));
        assert_eq!(parse_rational("12").unwrap(), ratio(12, 1));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(&ratio(469, 685), 3), "0.685");
        assert_eq!(round_half_even(&ratio(1, 8), 2), "0.12");
        assert_eq!(round_half_even(&ratio(3, 8), 2), "0.38");
        assert_eq!(round_half_even(&ratio(5, 2), 0), "2");
        assert_eq!(round_half_even(&ratio(1, 2000), 3), "0.000");
        assert_eq!(round_half_even(&-ratio(1, 3), 3), "-0.333");
        assert_eq!(round_half_even(&ratio(1, 1), 3), "1.000");
    }

    #[test]
    fn logarithms_of_huge_rationals() {
        let tiny = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), 400));
        let expected = -400.0 * std::f64::consts::LN_10;
        assert!((ln_rational(&tiny) - expected).abs() < 1e-9);
        assert_eq!(ln_rational(&BigRational::zero()), f64::NEG_INFINITY);
        assert!((ln_rational(&ratio(1, 14)) + 14f64.ln()).abs() < 1e-12);
    }
}
