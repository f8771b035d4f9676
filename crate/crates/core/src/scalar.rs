//! Scalar types produced by the decimal-text parsers.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

/// A numeric type that can be built from a decimal string split into sign,
/// integer digits and fraction digits.
///
/// Both digit strings contain ASCII digits only; either may be empty.
pub trait DecimalScalar: Clone + PartialEq + Debug {
    fn from_decimal(negative: bool, int_digits: &str, frac_digits: &str) -> Self;

    /// `self * factor`.
    fn scaled(&self, factor: u64) -> Self;
}

fn float_literal(negative: bool, int_digits: &str, frac_digits: &str) -> String {
    let int = if int_digits.is_empty() {
        "0"
    } else {
        int_digits
    };
    let frac = if frac_digits.is_empty() {
        "0"
    } else {
        frac_digits
    };
    format!("{}{int}.{frac}", if negative { "-" } else { "" })
}

impl DecimalScalar for f64 {
    fn from_decimal(negative: bool, int_digits: &str, frac_digits: &str) -> Self {
        // A literal of digits always parses.
        float_literal(negative, int_digits, frac_digits)
            .parse()
            .unwrap_or(f64::NAN)
    }

    fn scaled(&self, factor: u64) -> Self {
        self * factor as f64
    }
}

impl DecimalScalar for f32 {
    fn from_decimal(negative: bool, int_digits: &str, frac_digits: &str) -> Self {
        float_literal(negative, int_digits, frac_digits)
            .parse()
            .unwrap_or(f32::NAN)
    }

    fn scaled(&self, factor: u64) -> Self {
        self * factor as f32
    }
}

impl DecimalScalar for BigRational {
    fn from_decimal(negative: bool, int_digits: &str, frac_digits: &str) -> Self {
        let digits = format!("{int_digits}{frac_digits}");
        let mut numer = if digits.is_empty() {
            BigInt::default()
        } else {
            digits.parse::<BigInt>().unwrap_or_default()
        };
        if negative {
            numer = -numer;
        }
        let denom: BigInt = BigInt::from(10u8).pow(frac_digits.len() as u32);
        BigRational::new(numer, denom)
    }

    fn scaled(&self, factor: u64) -> Self {
        self * BigRational::from_integer(BigInt::from(factor))
    }
}

/// Rounds an exact value to the nearest integer, ties away from zero.
pub(crate) fn round_exact(value: &BigRational) -> BigInt {
    value.round().to_integer()
}
