//! Exact rational scalars and their textual encoding.
//!
//! Every number the crate computes with is a [`Rational`]. The textual form
//! is `"a/b"` or a bare integer `"a"`, used for all input and output, so
//! floating point never appears.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Integer literal helper.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `numer / denom`, reduced. Panics on a zero denominator.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

fn parse_digits(text: &str, allow_sign: bool, whole: &str) -> Result<BigInt, ParseRationalError> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) if allow_sign => (true, rest),
        _ => (false, text),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Malformed(whole.to_string()));
    }
    let magnitude: BigInt = digits
        .parse()
        .map_err(|_| ParseRationalError::Malformed(whole.to_string()))?;
    Ok(if negative { -magnitude } else { magnitude })
}

/// Parses `"a/b"` or `"a"`. Only the numerator may carry a leading `-`;
/// anything else, such as decimals or a `+`, is rejected.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    match text.split_once('/') {
        None => Ok(Rational::from_integer(parse_digits(text, true, text)?)),
        Some((numer, denom)) => {
            let numer = parse_digits(numer, true, text)?;
            let denom = parse_digits(denom, false, text)?;
            if denom.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(text.to_string()));
            }
            Ok(Rational::new(numer, denom))
        }
    }
}

/// Canonical text: `"a"` for integers, `"a/b"` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Parses a comma-separated list of rationals such as `"3/2,3/2"`.
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>, ParseRationalError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|part| parse_rational(part.trim())).collect()
}

pub fn is_nonnegative(value: &Rational) -> bool {
    !value.is_negative()
}
