//! Scalar abstraction shared by the exact and floating-point code paths.
//!
//! Classification and rank decisions run on any [`Scalar`]; for
//! [`Rational`] every zero test is exact, for floats it is a threshold test.
//! Witness construction needs square roots and therefore runs on [`Real`].

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::{echelon_exact, Echelon, Matrix};

/// Exact rational number used by the classification path.
pub type Rational = BigRational;

/// Number type usable by the classification and rank machinery.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact and zero tests carry no tolerance.
    const EXACT: bool;

    /// Magnitude at or below which a pivot is treated as zero.
    fn zero_threshold() -> Self;

    fn is_negligible(&self) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.abs() <= Self::zero_threshold()
        }
    }

    fn as_f64(&self) -> f64;

    /// Echelon reduction used for rank decisions.
    fn echelon_of(m: &Matrix<Self>) -> Echelon {
        m.echelon()
    }

    fn from_f64_lossy(value: f64) -> Self;

    /// Sign with the zero band applied: -1, 0 or 1.
    fn sign_class(&self) -> i8 {
        if self.is_negligible() {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero_threshold() -> Self {
        1e-10
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn from_f64_lossy(value: f64) -> Self {
        value
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn zero_threshold() -> Self {
        1e-5
    }

    fn as_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn from_f64_lossy(value: f64) -> Self {
        value as f32
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero_threshold() -> Self {
        Rational::zero()
    }

    fn echelon_of(m: &Matrix<Self>) -> Echelon {
        echelon_exact(m)
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(value: f64) -> Self {
        Rational::from_float(value).unwrap_or_else(Rational::zero)
    }
}

/// Floating-point scalar used for witness construction and verification.
pub trait Real: Scalar + Float + Copy {
    fn from_scalar<S: Scalar>(value: &S) -> Self {
        <Self as Scalar>::from_f64_lossy(value.as_f64())
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let bad = || Error::Parse(format!("invalid rational literal {text:?}"));
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Formats a rational as `"p/q"`, or `"p"` when it is an integer.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int<S: Scalar>(value: i64) -> S {
    S::from_i64(value).expect("integer fits scalar")
}
