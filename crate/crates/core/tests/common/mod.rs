#![allow(dead_code)]

use ak_normal_forms::series::{Rational, Ring, TruncatedSeries1, TruncatedSeries2};
use rand::Rng;

pub const Q: Ring = Ring::Rational;

pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    let num: i64 = rng.random_range(-9..=9);
    let den: u64 = rng.random_range(1..=6);
    Rational::from_parts(num.into(), den.into())
}

/// Random bivariate series of the given order; each monomial is present
/// with probability `density`.
pub fn random_series2<R: Rng>(rng: &mut R, order: u32, density: f64) -> TruncatedSeries2<Rational> {
    let mut terms = Vec::new();
    for d in 0..=order {
        for j in 0..=d {
            if rng.random_bool(density) {
                terms.push((d - j, j, small_rational(rng)));
            }
        }
    }
    TruncatedSeries2::from_terms(Q, order, terms)
}

/// Random reduced residual (no exponent `= k-1 mod k`) with `c(0) != 0`.
pub fn random_reduced<R: Rng>(rng: &mut R, k: u32, order: u32) -> TruncatedSeries1<Rational> {
    let mut terms = vec![(
        0,
        Rational::from(rng.random_range(1..=4i64) * if rng.random_bool(0.5) { 1 } else { -1 }),
    )];
    for e in 1..=order {
        if e % k != k - 1 && rng.random_bool(0.5) {
            terms.push((e, small_rational(rng)));
        }
    }
    TruncatedSeries1::from_terms(Q, order, terms)
}
