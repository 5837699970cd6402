//! Numbers that are either exact rationals or IEEE doubles.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A model parameter. Rationals stay exact through every computation that
/// only needs field operations; floats stay floats.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn integer(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(rational(num, den))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_positive(),
            Scalar::Float(x) => x.is_finite() && *x > 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    /// Product, exact when both sides are exact.
    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::Float(self.to_f64() * other.to_f64()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => f.write_str(&format_rational(r)),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Strings of the form `p` or `p/q` parse as exact rationals; anything
    /// else is tried as a float.
    fn from_str(s: &str) -> Result<Self> {
        match parse_rational(s) {
            Ok(r) => Ok(Scalar::Exact(r)),
            Err(_) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Scalar::Float)
                .ok_or_else(|| Error::InvalidRational(s.to_string())),
        }
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p"` or `"p/q"` with optional sign on the numerator.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let digits = |x: &str| x.strip_prefix(['-', '+']).unwrap_or(x).chars().all(|c| c.is_ascii_digit());
    if num.is_empty() || den.is_empty() || !digits(num) || !den.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Canonical text form: reduced, `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out of f64 range: the sign still matters to callers.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("2/3").unwrap(), rational(2, 3));
        assert_eq!(parse_rational("-4/6").unwrap(), rational(-2, 3));
        assert_eq!(parse_rational(" 7 ").unwrap(), rational(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rational(6, 4)), "3/2");
        assert_eq!(format_rational(&rational(-3, 1)), "-3");
    }

    #[test]
    fn scalar_from_str_prefers_rationals() {
        assert_eq!("1/2".parse::<Scalar>().unwrap(), Scalar::ratio(1, 2));
        assert_eq!("0.25".parse::<Scalar>().unwrap(), Scalar::Float(0.25));
        assert!("abc".parse::<Scalar>().is_err());
        assert!("inf".parse::<Scalar>().is_err());
    }
}
