use dashu_base::Sign;
use serde::Serialize;

use crate::cohomology::h_ratio;
use crate::series::{BigFloat, Coefficient, Rational, Ring, Sigma};

const PRECISION: usize = 128;

/// `2^{i' + j' - 1} (i' + j') pi` at 128 bits.
pub fn growth_bound(i_prime: &Rational, j_prime: &Rational) -> BigFloat {
    let ring = Ring::big_float(PRECISION);
    let s = i_prime + j_prime;
    let two = BigFloat::from_i64(2, ring);
    let power = two.pow_rational(&(&s - Rational::ONE));
    let factor = BigFloat::from_rational(&s, ring);
    power.mul(&factor).mul(&BigFloat::pi(PRECISION))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthViolation {
    pub i: u32,
    pub j: u32,
    pub n: u32,
    pub value: String,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub k: u32,
    pub sigma: Sigma,
    pub i_max: u32,
    pub j_max: u32,
    /// Number of `(i, j, n)` compared against the bound.
    pub checked: u64,
    /// Number of `(i, j)` pairs outside `i', j' >= 1`.
    pub excluded: u64,
    /// Largest `|a| / bound` seen.
    pub max_ratio: f64,
    pub violations: Vec<GrowthViolation>,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compare every chain coefficient `|a_{ij}^n|`, `n < j`, with the bound for
/// `i' = (i + 1)/k`, `j' = (2j - 1)/2` over `i <= i_max`, `1 <= j <= j_max`.
pub fn growth_bound_check(k: u32, sigma: Sigma, i_max: u32, j_max: u32) -> GrowthReport {
    let ring = Ring::big_float(PRECISION);
    let mut report = GrowthReport {
        k,
        sigma,
        i_max,
        j_max,
        checked: 0,
        excluded: 0,
        max_ratio: 0.0,
        violations: Vec::new(),
    };
    for i in 0..=i_max {
        for j in 1..=j_max {
            let i_prime = Rational::from_parts((i as i64 + 1).into(), (k as u64).into());
            let j_prime = Rational::from_parts((2 * j as i64 - 1).into(), 2u64.into());
            if i_prime < Rational::ONE || j_prime < Rational::ONE {
                report.excluded += 1;
                continue;
            }
            let bound = growth_bound(&i_prime, &j_prime);
            let mut a = Rational::ONE;
            let (mut p, mut q) = (i, j);
            for n in 0..j {
                let value = BigFloat::from_rational(&a, ring);
                let excess = value.sub(&bound);
                report.checked += 1;
                report.max_ratio = report.max_ratio.max(value.to_f64() / bound.to_f64());
                if !excess.is_negative() && !excess.is_zero() {
                    report.violations.push(GrowthViolation {
                        i,
                        j,
                        n,
                        value: a.to_string(),
                        bound: bound.to_text(),
                    });
                }
                // The sign of sigma drops out of |a|.
                a = &a * h_ratio(k, p, q);
                if a.sign() == Sign::Negative {
                    a = -a;
                }
                (p, q) = (p + k, q - 1);
            }
        }
    }
    report
}
