use std::fmt;

use serde::{Deserialize, Serialize};

use super::ring::{Coefficient, Ring};
use super::{SeriesError, TruncatedSeries2, EXACT};

/// Sign in front of `x^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    pub fn value(self) -> i64 {
        match self {
            Sigma::Plus => 1,
            Sigma::Minus => -1,
        }
    }

    /// `sigma^n`.
    pub fn pow(self, n: u32) -> i64 {
        if self == Sigma::Minus && n % 2 == 1 {
            -1
        } else {
            1
        }
    }
}

impl TryFrom<i8> for Sigma {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Sigma::Plus),
            -1 => Ok(Sigma::Minus),
            _ => Err(format!("sigma must be +1 or -1, got {v}")),
        }
    }
}

impl From<Sigma> for i8 {
    fn from(s: Sigma) -> i8 {
        s.value() as i8
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if *self == Sigma::Plus { "+" } else { "-" })
    }
}

/// The model Hamiltonian `H = xi^2 + sigma x^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AkHamiltonian {
    pub k: u32,
    pub sigma: Sigma,
}

impl AkHamiltonian {
    pub fn new(k: u32, sigma: Sigma) -> Result<Self, SeriesError> {
        if k < 2 {
            return Err(SeriesError::InvalidHamiltonian(format!(
                "k must be at least 2, got {k}"
            )));
        }
        Ok(AkHamiltonian { k, sigma })
    }

    pub fn as_series<C: Coefficient>(&self, ring: Ring) -> TruncatedSeries2<C> {
        TruncatedSeries2::from_terms(
            ring,
            EXACT,
            [
                (0, 2, C::one(ring)),
                (self.k, 0, C::from_i64(self.sigma.value(), ring)),
            ],
        )
    }

    /// `{H, u} = 2 xi u_x - sigma k x^{k-1} u_xi`.
    ///
    /// Every monomial of `u` maps to terms of equal or higher degree, so the
    /// order of `u` is kept.
    pub fn bracket<C: Coefficient>(&self, u: &TruncatedSeries2<C>) -> TruncatedSeries2<C> {
        let ring = u.ring();
        let mut out = TruncatedSeries2::zero(ring, u.order());
        let sk = C::from_i64(self.sigma.value() * self.k as i64, ring);
        for (i, j, c) in u.terms() {
            if i > 0 {
                out.accumulate(i - 1, j + 1, &c.mul(&C::from_i64(2 * i as i64, ring)));
            }
            if j > 0 {
                let f = sk.mul(&C::from_i64(j as i64, ring));
                out.accumulate(i + self.k - 1, j - 1, &c.mul(&f).neg());
            }
        }
        out
    }

    /// Hamiltonian vector field `(H_xi, -H_x)`.
    pub fn vector_field<C: Coefficient>(
        &self,
        ring: Ring,
    ) -> (TruncatedSeries2<C>, TruncatedSeries2<C>) {
        let vx = TruncatedSeries2::monomial(ring, EXACT, 0, 1, C::from_i64(2, ring));
        let vxi = TruncatedSeries2::monomial(
            ring,
            EXACT,
            self.k - 1,
            0,
            C::from_i64(-self.sigma.value() * self.k as i64, ring),
        );
        (vx, vxi)
    }

    pub fn eval_f64(&self, x: f64, xi: f64) -> f64 {
        xi * xi + self.sigma.value() as f64 * x.powi(self.k as i32)
    }
}

impl fmt::Display for AkHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi^2 {} x^{}", self.sigma, self.k)
    }
}
