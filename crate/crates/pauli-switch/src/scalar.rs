//! Dual numeric mode: exact arbitrary-precision rationals or `f64`, behind
//! one trait so every engine can run in either mode.
//!
//! Exact mode is the default for all closed-form and recurrence work (the
//! polynomial identities asserted by the test suites demand exactness);
//! float mode serves the dense matrix oracle and long fixed-point
//! iterations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::Error;

/// Exact scalar: arbitrary-precision reduced rational.
pub type Exact = BigRational;

/// Absolute tolerance for float-mode equality.
pub const FLOAT_EQ_TOL: f64 = 1e-12;

/// A probability-like number: exact rational or double-precision float.
///
/// Implementations must keep exact mode exact (always-reduced fractions via
/// [`Exact`]) and float mode finite (operations on valid channels never
/// produce NaN/Inf; constructors reject non-finite input).
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// True when arithmetic in this mode is exact.
    const EXACT: bool;

    /// The fraction `num/den`. Panics if `den == 0`.
    fn ratio(num: i64, den: i64) -> Self;

    /// Embed an integer.
    fn from_int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    /// Best-effort conversion to `f64` (for display and float oracles).
    fn to_f64(&self) -> f64;

    /// Mode-appropriate equality: exact in rational mode, absolute
    /// difference at most [`FLOAT_EQ_TOL`] in float mode.
    fn scalar_eq(&self, other: &Self) -> bool;

    /// Parse `a/b`, an integer, or a decimal such as `0.25`. Decimals are
    /// exact in rational mode (`0.25` becomes `1/4`).
    fn parse(text: &str) -> Result<Self, Error>;

    /// Canonical text form: `a/b` (or bare `a` when the denominator is 1)
    /// in exact mode, shortest round-trip decimal in float mode.
    fn render(&self) -> String;
}

fn parse_bigint(text: &str) -> Result<BigInt, Error> {
    text.parse::<BigInt>()
        .map_err(|_| Error::Parse(text.to_string()))
}

/// Parse `a/b`, integer, or decimal text into an exact rational.
fn parse_exact(text: &str) -> Result<Exact, Error> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse(text.to_string()));
    }
    if let Some((num, den)) = t.split_once('/') {
        let num = parse_bigint(num.trim())?;
        let den = parse_bigint(den.trim())?;
        if den.is_zero() {
            return Err(Error::Parse(text.to_string()));
        }
        return Ok(Exact::new(num, den));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let frac_part = frac_part.trim();
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(text.to_string()));
        }
        let (sign, int_digits) = match int_part.trim() {
            s if s.starts_with('-') => (-1, &s[1..]),
            s if s.starts_with('+') => (1, &s[1..]),
            s => (1, s),
        };
        let int_val = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            parse_bigint(int_digits)?
        };
        let frac_val = parse_bigint(frac_part)?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let numer = (int_val * &scale + frac_val) * BigInt::from(sign);
        return Ok(Exact::new(numer, scale));
    }
    Ok(Exact::from(parse_bigint(t)?))
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Exact::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Fall back to a quotient of approximations for huge operands.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn scalar_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn parse(text: &str) -> Result<Self, Error> {
        parse_exact(text)
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn scalar_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_EQ_TOL
    }

    fn parse(text: &str) -> Result<Self, Error> {
        let t = text.trim();
        let value = if let Some((num, den)) = t.split_once('/') {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| Error::Parse(text.to_string()))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| Error::Parse(text.to_string()))?;
            num / den
        } else {
            t.parse().map_err(|_| Error::Parse(text.to_string()))?
        };
        if !value.is_finite() {
            return Err(Error::Parse(text.to_string()));
        }
        Ok(value)
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

/// Sum of a 4-component array.
pub fn sum4<S: Scalar>(v: &[S; 4]) -> S {
    v[0].clone() + v[1].clone() + v[2].clone() + v[3].clone()
}

/// Signed absolute value helper usable in both modes.
pub fn abs<S: Scalar>(x: &S) -> S {
    if *x < S::zero() {
        -x.clone()
    } else {
        x.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals_exactly() {
        assert_eq!(Exact::parse("3/4").unwrap(), Exact::ratio(3, 4));
        assert_eq!(Exact::parse(" -2/8 ").unwrap(), Exact::ratio(-1, 4));
        assert_eq!(Exact::parse("5").unwrap(), Exact::from_int(5));
        assert_eq!(Exact::parse("0.25").unwrap(), Exact::ratio(1, 4));
        assert_eq!(Exact::parse("0.1036").unwrap(), Exact::ratio(1036, 10000));
        assert_eq!(Exact::parse("-1.5").unwrap(), Exact::ratio(-3, 2));
        assert_eq!(Exact::parse(".5").unwrap(), Exact::ratio(1, 2));
        assert!(Exact::parse("").is_err());
        assert!(Exact::parse("1/0").is_err());
        assert!(Exact::parse("x").is_err());
        assert!(Exact::parse("1.2.3").is_err());
    }

    #[test]
    fn float_parse_accepts_fraction_syntax() {
        assert_eq!(f64::parse("1/4").unwrap(), 0.25);
        assert_eq!(f64::parse("0.25").unwrap(), 0.25);
        assert!(f64::parse("1/0").is_err());
        assert!(f64::parse("nan").is_err());
    }

    #[test]
    fn render_round_trips() {
        let x = Exact::ratio(7, 3);
        assert_eq!(x.render(), "7/3");
        assert_eq!(Exact::parse(&x.render()).unwrap(), x);
        assert_eq!(Exact::from_int(4).render(), "4");
        let f = 0.1f64 + 0.2f64;
        assert_eq!(f64::parse(&f.render()).unwrap(), f);
    }

    #[test]
    fn mode_equality_semantics() {
        assert!(Exact::ratio(1, 3).scalar_eq(&Exact::ratio(2, 6)));
        assert!(!Exact::ratio(1, 3).scalar_eq(&Exact::ratio(1, 4)));
        assert!(0.1f64.scalar_eq(&(0.1 + 1e-13)));
        assert!(!0.1f64.scalar_eq(&(0.1 + 1e-9)));
    }

    #[test]
    fn decimals_are_exact_in_rational_mode() {
        // 0.1 is not representable in binary floating point but must be
        // exactly 1/10 in rational mode.
        assert_eq!(Exact::parse("0.1").unwrap() * Exact::from_int(10), Exact::one());
    }
}
