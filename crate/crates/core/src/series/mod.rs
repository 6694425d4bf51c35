//! Truncated power series in one and two variables.
//!
//! A series stores its nonzero coefficients together with a truncation
//! order `N`: every term of total degree `<= N` is known exactly, nothing
//! is claimed beyond. The sentinel [`EXACT`] marks an exact polynomial,
//! i.e. a series whose order is unbounded.
//!
//! Binary operations truncate to the smaller order of their inputs, and a
//! derivative lowers the order by one. Callers that can prove a better
//! order (for instance brackets against the exact polynomial `H`) do so
//! explicitly, see [`AkHamiltonian::bracket`].

mod bivariate;
mod hamiltonian;
mod json;
mod ring;
mod univariate;

pub use bivariate::{poisson_bracket, ParitySplit, TruncatedSeries2};
pub use hamiltonian::{AkHamiltonian, Sigma};
pub use json::{CoeffJson, SeriesJson, TermsJson};
pub use ring::{BigFloat, Coefficient, Rational, Ring, DEFAULT_PRECISION};
pub use univariate::{c_decompose, c_recompose, TruncatedSeries1};
pub(crate) use univariate::{join_channels, split_channels};

use thiserror::Error;

/// Order of an exact polynomial.
pub const EXACT: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: Ring, right: Ring },
    #[error("truncation order underflow")]
    OrderUnderflow,
    #[error("series is not invertible: {0}")]
    NotInvertible(String),
    #[error(
        "composition needs an inner series without constant term or an exact outer polynomial"
    )]
    NonzeroConstantInner,
    #[error("exponent {exponent} is congruent to k-1 modulo k={k}; series is not reduced")]
    NotReduced { exponent: u32, k: u32 },
    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Lower an order by `by`, keeping [`EXACT`] fixed.
pub(crate) fn order_minus(order: u32, by: u32) -> Result<u32, SeriesError> {
    if order == EXACT {
        Ok(EXACT)
    } else {
        order.checked_sub(by).ok_or(SeriesError::OrderUnderflow)
    }
}

pub(crate) fn order_plus(order: u32, by: u32) -> u32 {
    if order == EXACT {
        EXACT
    } else {
        order.saturating_add(by).min(EXACT - 1)
    }
}

pub(crate) fn check_ring(left: Ring, right: Ring) -> Result<(), SeriesError> {
    if left == right {
        Ok(())
    } else {
        Err(SeriesError::RingMismatch { left, right })
    }
}

/// Generalized binomial coefficient `C(p, n)` for a rational `p`.
pub(crate) fn general_binomial(p: &Rational, n: u32) -> Rational {
    let mut acc = Rational::ONE;
    for m in 0..n {
        acc = acc * (p - Rational::from(m)) / Rational::from(m + 1);
    }
    acc
}
