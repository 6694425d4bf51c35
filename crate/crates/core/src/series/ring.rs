//! Coefficient rings for truncated series.
//!
//! Two rings are supported: exact rationals over arbitrary-precision
//! integers, and binary big-floats of a fixed working precision. The
//! [`Ring`] tag travels with every series so that values built in
//! different rings (or at different precisions) are never mixed silently.

use std::fmt;
use std::str::FromStr;

use dashu_base::{Abs, Sign};
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};

use super::SeriesError;

/// Exact rational number.
pub type Rational = RBig;

/// Default working precision (bits) of the big-float ring.
pub const DEFAULT_PRECISION: usize = 256;

/// Ring tag carried by every series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "ring")]
pub enum Ring {
    Rational,
    BigFloat { precision: usize },
}

impl Ring {
    pub fn big_float(precision: usize) -> Self {
        Ring::BigFloat { precision }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Ring::Rational => "rational",
            Ring::BigFloat { .. } => "big-float",
        }
    }

    pub fn precision(&self) -> Option<usize> {
        match self {
            Ring::Rational => None,
            Ring::BigFloat { precision } => Some(*precision),
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Rational => write!(f, "rational"),
            Ring::BigFloat { precision } => write!(f, "big-float({precision})"),
        }
    }
}

/// Arithmetic required of series coefficients.
///
/// Implementors are plain values; all operations allocate a fresh result.
pub trait Coefficient:
    Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Whether values of this type can live in `ring`.
    fn accepts(ring: Ring) -> bool;
    fn from_rational(q: &Rational, ring: Ring) -> Self;
    fn zero(ring: Ring) -> Self {
        Self::from_rational(&Rational::ZERO, ring)
    }
    fn one(ring: Ring) -> Self {
        Self::from_rational(&Rational::ONE, ring)
    }
    fn from_i64(n: i64, ring: Ring) -> Self {
        Self::from_rational(&Rational::from(n), ring)
    }
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// Serialized form: `"p/q"` for rationals, a decimal string for floats.
    fn to_text(&self) -> String;
    fn parse_text(text: &str, ring: Ring) -> Result<Self, SeriesError>;
    fn to_big_float(&self, precision: usize) -> BigFloat;
    /// Relative size of rounding noise that identities in `ring` may carry;
    /// zero for exact rings.
    fn noise_level(_ring: Ring) -> f64 {
        0.0
    }
}

impl Coefficient for RBig {
    fn accepts(ring: Ring) -> bool {
        ring == Ring::Rational
    }

    fn from_rational(q: &Rational, _ring: Ring) -> Self {
        q.clone()
    }

    fn is_zero(&self) -> bool {
        *self == RBig::ZERO
    }

    fn is_negative(&self) -> bool {
        self.sign() == Sign::Negative && !Coefficient::is_zero(self)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn neg(&self) -> Self {
        -self.clone()
    }

    fn inv(&self) -> Option<Self> {
        if Coefficient::is_zero(self) {
            None
        } else {
            Some(RBig::ONE / self)
        }
    }

    fn to_f64(&self) -> f64 {
        RBig::to_f64(self).value()
    }

    fn to_text(&self) -> String {
        self.to_string()
    }

    fn parse_text(text: &str, ring: Ring) -> Result<Self, SeriesError> {
        if ring != Ring::Rational {
            return Err(SeriesError::RingMismatch {
                left: Ring::Rational,
                right: ring,
            });
        }
        RBig::from_str(text.trim())
            .map_err(|_| SeriesError::Parse(format!("bad rational {text:?}")))
    }

    fn to_big_float(&self, precision: usize) -> BigFloat {
        BigFloat::from_rational(self, Ring::big_float(precision))
    }
}

type Float = FBig<HalfEven, 2>;

/// Binary floating point number with an explicit working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct BigFloat(Float);

impl BigFloat {
    pub fn from_f64(x: f64, precision: usize) -> Self {
        let v = Float::try_from(x).unwrap_or(Float::ZERO);
        BigFloat(v.with_precision(precision).value())
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }

    pub fn abs(&self) -> Self {
        BigFloat(self.0.clone().abs())
    }

    /// Real power of a positive number.
    pub fn powf(&self, exponent: &BigFloat) -> BigFloat {
        BigFloat(self.0.powf(&exponent.0))
    }

    /// `self^q` for a rational exponent; `self` must be positive.
    pub fn pow_rational(&self, q: &Rational) -> BigFloat {
        let e = BigFloat::from_rational(q, Ring::big_float(self.precision()));
        self.powf(&e)
    }

    pub fn pi(precision: usize) -> BigFloat {
        // atan(1) is not exposed; 4*atan via Machin would work but acos(-1)
        // through ln of a complex number is unavailable, so use the
        // Gauss-Legendre iteration.
        let ring = Ring::big_float(precision + 32);
        let one = BigFloat::one(ring);
        let two = BigFloat::from_i64(2, ring);
        let four = BigFloat::from_i64(4, ring);
        let mut a = one.clone();
        let mut b = BigFloat(one.0.clone() / two.0.sqrt());
        let mut t = BigFloat(one.0.clone() / &four.0);
        let mut p = one.clone();
        for _ in 0..(usize::BITS - precision.leading_zeros() + 2) {
            let a_next = BigFloat((&a.0 + &b.0) / &two.0);
            let b_next = BigFloat((&a.0 * &b.0).sqrt());
            let d = &a.0 - &a_next.0;
            t = BigFloat(&t.0 - &p.0 * &d * &d);
            p = BigFloat(&p.0 * &two.0);
            a = a_next;
            b = b_next;
        }
        let s = &a.0 + &b.0;
        let pi = s.clone() * s / (four.0 * t.0);
        BigFloat(pi.with_precision(precision).value())
    }

    fn decimal_digits(&self) -> usize {
        // log10(2) ~ 0.30103; a few guard digits make the decimal form
        // round-trip exactly.
        (self.precision() as f64 * 0.30103).ceil() as usize + 3
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Coefficient for BigFloat {
    fn accepts(ring: Ring) -> bool {
        matches!(ring, Ring::BigFloat { .. })
    }

    fn from_rational(q: &Rational, ring: Ring) -> Self {
        let precision = ring.precision().unwrap_or(DEFAULT_PRECISION);
        let num = Float::from(IBig::from(q.numerator().clone()))
            .with_precision(precision)
            .value();
        let den = Float::from(IBig::from(q.denominator().clone()))
            .with_precision(precision)
            .value();
        BigFloat(num / den)
    }

    fn is_zero(&self) -> bool {
        self.0.repr().significand().is_zero()
    }

    fn is_negative(&self) -> bool {
        self.0.sign() == Sign::Negative && !self.is_zero()
    }

    fn add(&self, other: &Self) -> Self {
        BigFloat(&self.0 + &other.0)
    }

    fn sub(&self, other: &Self) -> Self {
        BigFloat(&self.0 - &other.0)
    }

    fn mul(&self, other: &Self) -> Self {
        BigFloat(&self.0 * &other.0)
    }

    fn neg(&self) -> Self {
        BigFloat(-self.0.clone())
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            let one = Float::ONE.with_precision(self.precision()).value();
            Some(BigFloat(one / &self.0))
        }
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = self.decimal_digits();
        self.0
            .clone()
            .with_base_and_precision::<10>(digits)
            .value()
            .to_string()
    }

    fn parse_text(text: &str, ring: Ring) -> Result<Self, SeriesError> {
        let Ring::BigFloat { precision } = ring else {
            return Err(SeriesError::RingMismatch {
                left: Ring::big_float(DEFAULT_PRECISION),
                right: ring,
            });
        };
        let text = text.trim();
        // Accept rationals as well so hand-written inputs can say "1/3".
        if text.contains('/') {
            let q = RBig::from_str(text)
                .map_err(|_| SeriesError::Parse(format!("bad number {text:?}")))?;
            return Ok(BigFloat::from_rational(&q, ring));
        }
        let decimal = FBig::<HalfEven, 10>::from_str(text)
            .map_err(|_| SeriesError::Parse(format!("bad float {text:?}")))?;
        Ok(BigFloat(
            decimal.with_base_and_precision::<2>(precision).value(),
        ))
    }

    fn to_big_float(&self, precision: usize) -> BigFloat {
        BigFloat(self.0.clone().with_precision(precision).value())
    }

    fn noise_level(ring: Ring) -> f64 {
        // Long elimination chains lose a few bits; 16 is generous.
        let bits = ring
            .precision()
            .unwrap_or(DEFAULT_PRECISION)
            .saturating_sub(16);
        2f64.powi(-(bits.min(1000) as i32))
    }
}
