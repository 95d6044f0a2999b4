//! Dual numeric backend: exact rationals or tolerance-compared floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::CopeError;

pub type Rational = BigRational;

/// Default comparison tolerance for the float backend.
pub const DEFAULT_EPS: f64 = 1e-9;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, CopeError> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| CopeError::Parse(format!("bad rational `{text}`")))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| CopeError::Parse(format!("bad rational `{text}`")))?;
        if d.is_zero() {
            return Err(CopeError::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|_| CopeError::Parse(format!("bad decimal `{text}`")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    BigInt::from_str(t)
        .map(Rational::from_integer)
        .map_err(|_| CopeError::Parse(format!("bad rational `{text}`")))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A single matrix entry.
///
/// Arithmetic between an exact and a float operand degrades to float.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Exact(rat(n, d))
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(rat_int(n))
    }

    pub fn float(v: f64) -> Self {
        Scalar::Float(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rat_to_f64(r),
            Scalar::Float(v) => *v,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_float_scalar(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    /// Exact value of a float, following its binary expansion.
    pub fn to_exact_scalar(&self) -> Scalar {
        match self {
            Scalar::Exact(_) => self.clone(),
            Scalar::Float(v) => Scalar::Exact(Rational::from_float(*v).unwrap_or_else(Rational::zero)),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => f.write_str(&format_rational(r)),
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (a, b) => Scalar::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::Exact(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::Exact(Rational::one())
    }
}

/// Which arithmetic a matrix lives in, and how its entries are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Backend {
    #[default]
    Exact,
    Float { eps: f64 },
}

impl Backend {
    pub fn float() -> Self {
        Backend::Float { eps: DEFAULT_EPS }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Backend::Exact)
    }

    /// Tolerance used for comparisons; zero for the exact backend.
    pub fn eps(&self) -> f64 {
        match self {
            Backend::Exact => 0.0,
            Backend::Float { eps } => *eps,
        }
    }

    /// Float if either side is float; the larger tolerance wins.
    pub fn join(self, other: Backend) -> Backend {
        match (self, other) {
            (Backend::Exact, Backend::Exact) => Backend::Exact,
            (a, b) => Backend::Float { eps: a.eps().max(b.eps()) },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Exact => "rational",
            Backend::Float { .. } => "float",
        }
    }

    pub fn convert(&self, s: &Scalar) -> Scalar {
        match self {
            Backend::Exact => s.to_exact_scalar(),
            Backend::Float { .. } => s.to_float_scalar(),
        }
    }

    pub fn compare(&self, a: &Scalar, b: &Scalar) -> Ordering {
        match (a, b) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x.cmp(y),
            _ => {
                let d = a.to_f64() - b.to_f64();
                if d.abs() <= self.eps() {
                    Ordering::Equal
                } else if d < 0.0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn eq(&self, a: &Scalar, b: &Scalar) -> bool {
        self.compare(a, b) == Ordering::Equal
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => v.abs() <= self.eps(),
        }
    }

    pub fn is_nonneg(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Exact(r) => !r.is_negative(),
            Scalar::Float(v) => *v >= -self.eps(),
        }
    }

    pub fn one(&self) -> Scalar {
        self.convert(&Scalar::one())
    }

    pub fn zero(&self) -> Scalar {
        self.convert(&Scalar::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational(" -2/4 ").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert_eq!(format_rational(&rat(0, 5)), "0");
    }

    #[test]
    fn mixed_arithmetic_degrades_to_float() {
        let a = Scalar::ratio(1, 2);
        let b = Scalar::float(0.25);
        assert_eq!(&a + &b, Scalar::Float(0.75));
        assert_eq!(&a * &a, Scalar::ratio(1, 4));
    }

    #[test]
    fn float_comparison_uses_eps() {
        let be = Backend::Float { eps: 1e-9 };
        assert!(be.eq(&Scalar::float(0.5), &Scalar::float(0.5 + 5e-10)));
        assert!(!be.eq(&Scalar::float(0.5), &Scalar::float(0.5 + 5e-9)));
        assert!(be.is_zero(&Scalar::float(-1e-12)));
        assert!(!Backend::Exact.is_zero(&Scalar::ratio(1, 1_000_000_000_000)));
    }
}
