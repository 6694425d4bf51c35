//! JSON form of truncated series.
//!
//! ```json
//! {"ring": "rational", "order": 12, "terms": [[0, 2, "1"], [4, 0, "-3/2"]]}
//! ```
//!
//! Bivariate terms are `[i, j, coeff]`, univariate terms `[e, coeff]`.
//! Coefficients are strings (`"p/q"` or a decimal for big-floats); plain
//! integers are accepted on input. A missing or null `order` means an exact
//! polynomial.

use serde::{Deserialize, Serialize};

use super::ring::{Coefficient, Ring, DEFAULT_PRECISION};
use super::{SeriesError, TruncatedSeries1, TruncatedSeries2, EXACT};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Text(String),
    Int(i64),
}

impl CoeffJson {
    fn parse<C: Coefficient>(&self, ring: Ring) -> Result<C, SeriesError> {
        match self {
            CoeffJson::Text(s) => C::parse_text(s, ring),
            CoeffJson::Int(n) => Ok(C::from_i64(*n, ring)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermsJson {
    Bivariate(Vec<(u32, u32, CoeffJson)>),
    Univariate(Vec<(u32, CoeffJson)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    #[serde(default = "default_ring_tag")]
    pub ring: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(default)]
    pub order: Option<u32>,
    pub terms: TermsJson,
}

fn default_ring_tag() -> String {
    "rational".into()
}

fn ring_fields(ring: Ring) -> (String, Option<usize>) {
    (ring.tag().to_string(), ring.precision())
}

fn order_field(order: u32) -> Option<u32> {
    (order != EXACT).then_some(order)
}

impl SeriesJson {
    pub fn ring(&self) -> Result<Ring, SeriesError> {
        match self.ring.as_str() {
            "rational" => Ok(Ring::Rational),
            "big-float" => Ok(Ring::big_float(self.precision.unwrap_or(DEFAULT_PRECISION))),
            other => Err(SeriesError::Parse(format!("unknown ring {other:?}"))),
        }
    }

    pub fn order(&self) -> u32 {
        self.order.unwrap_or(EXACT)
    }

    pub fn from_series2<C: Coefficient>(s: &TruncatedSeries2<C>) -> Self {
        let (ring, precision) = ring_fields(s.ring());
        SeriesJson {
            ring,
            precision,
            order: order_field(s.order()),
            terms: TermsJson::Bivariate(
                s.terms()
                    .map(|(i, j, c)| (i, j, CoeffJson::Text(c.to_text())))
                    .collect(),
            ),
        }
    }

    pub fn from_series1<C: Coefficient>(s: &TruncatedSeries1<C>) -> Self {
        let (ring, precision) = ring_fields(s.ring());
        SeriesJson {
            ring,
            precision,
            order: order_field(s.order()),
            terms: TermsJson::Univariate(
                s.terms()
                    .map(|(e, c)| (e, CoeffJson::Text(c.to_text())))
                    .collect(),
            ),
        }
    }

    /// Parse as a bivariate series in the ring `C` lives in.
    pub fn to_series2<C: Coefficient>(&self) -> Result<TruncatedSeries2<C>, SeriesError> {
        let ring = self.checked_ring::<C>()?;
        let mut out = TruncatedSeries2::zero(ring, self.order());
        match &self.terms {
            TermsJson::Bivariate(terms) => {
                for (i, j, c) in terms {
                    out.accumulate(*i, *j, &c.parse::<C>(ring)?);
                }
            }
            // An empty list is ambiguous and deserializes as bivariate; a
            // nonempty univariate list is rejected.
            TermsJson::Univariate(_) => {
                return Err(SeriesError::Parse("expected [i, j, coeff] terms".into()));
            }
        }
        Ok(out)
    }

    pub fn to_series1<C: Coefficient>(&self) -> Result<TruncatedSeries1<C>, SeriesError> {
        let ring = self.checked_ring::<C>()?;
        match &self.terms {
            TermsJson::Univariate(terms) => {
                let parsed = terms
                    .iter()
                    .map(|(e, c)| Ok((*e, c.parse::<C>(ring)?)))
                    .collect::<Result<Vec<_>, SeriesError>>()?;
                Ok(TruncatedSeries1::from_terms(ring, self.order(), parsed))
            }
            TermsJson::Bivariate(terms) if terms.is_empty() => {
                Ok(TruncatedSeries1::zero(ring, self.order()))
            }
            TermsJson::Bivariate(_) => Err(SeriesError::Parse("expected [e, coeff] terms".into())),
        }
    }

    fn checked_ring<C: Coefficient>(&self) -> Result<Ring, SeriesError> {
        let ring = self.ring()?;
        if !C::accepts(ring) {
            let expected = if C::accepts(Ring::Rational) {
                Ring::Rational
            } else {
                Ring::big_float(DEFAULT_PRECISION)
            };
            return Err(SeriesError::RingMismatch {
                left: expected,
                right: ring,
            });
        }
        Ok(ring)
    }
}
