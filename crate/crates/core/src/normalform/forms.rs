use std::collections::BTreeMap;

use super::{FormKind, NormalForm, NormalFormError};
use crate::cohomology::{h_ratio, is_reduced, solve_cohomological};
use crate::series::{
    c_decompose, join_channels, split_channels, AkHamiltonian, Coefficient, Rational, SeriesError,
    Sigma, TruncatedSeries1, TruncatedSeries2, EXACT,
};

fn require_reduced<C: Coefficient>(c: &TruncatedSeries1<C>, k: u32) -> Result<(), NormalFormError> {
    match c.terms().find(|(e, _)| e % k == k - 1) {
        Some((exponent, _)) => Err(SeriesError::NotReduced { exponent, k }.into()),
        None => Ok(()),
    }
}

/// Primitive form: `f' = c`, `f(0) = 0`, returned as `f_1, ..., f_{k-1}`.
pub fn f_form<C: Coefficient>(
    c: &TruncatedSeries1<C>,
    h: AkHamiltonian,
) -> Result<NormalForm<C>, NormalFormError> {
    let k = h.k;
    require_reduced(c, k)?;
    let f = c.antiderivative();
    if let Some((e, _)) = f.terms().find(|(e, _)| e % k == 0) {
        return Err(NormalFormError::Structure(format!(
            "f has exponent {e} divisible by k={k}"
        )));
    }
    let components = split_channels(&f, k, 1..k)?;
    Ok(NormalForm {
        kind: FormKind::FForm,
        hamiltonian: h,
        components,
        smooth_mode: false,
        flipped: false,
        orientation_flipped: false,
        source_order: c.order(),
    })
}

/// `f = sum_i x^i f_i(x^k)` rebuilt from an F_FORM.
pub fn f_series<C: Coefficient>(
    nf: &NormalForm<C>,
) -> Result<TruncatedSeries1<C>, NormalFormError> {
    if nf.kind != FormKind::FForm {
        return Err(NormalFormError::Mismatch(format!(
            "expected F_FORM, got {:?}",
            nf.kind
        )));
    }
    let ring = nf
        .components
        .first()
        .map(|c| c.ring())
        .ok_or_else(|| NormalFormError::Structure("no components".into()))?;
    Ok(join_channels(&nf.components, nf.k(), 1, ring))
}

/// The constant `b` with `x^i H^j = b x^{i+jk} + {H, U}` for a polynomial `U`.
pub fn conversion_constant(k: u32, sigma: Sigma, i: u32, j: u32) -> Rational {
    // Expand H^j and push each x^{i+(j-n)k} xi^{2n} through the chain of the
    // elimination; all contributions land on x^{i+jk} with the same sign.
    let mut total = Rational::ZERO;
    let mut binom = Rational::ONE;
    for n in 0..=j {
        let mut chain = Rational::ONE;
        let (mut p, mut q) = (i + (j - n) * k, n);
        for _ in 0..n {
            chain *= h_ratio(k, p, q);
            (p, q) = (p + k, q - 1);
        }
        total += &binom * chain;
        binom = binom * Rational::from(j - n) / Rational::from(n + 1);
    }
    total * Rational::from(sigma.pow(j))
}

/// Constants `b_{(i,j)}` indexed by both indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConversionTable {
    pub k: u32,
    pub sigma: Sigma,
    pub entries: BTreeMap<(u32, u32), Rational>,
}

impl ConversionTable {
    pub fn new(h: AkHamiltonian) -> Self {
        ConversionTable {
            k: h.k,
            sigma: h.sigma,
            entries: BTreeMap::new(),
        }
    }

    /// All `i <= k - 2`, `j <= j_max`.
    pub fn build(h: AkHamiltonian, j_max: u32) -> Self {
        let mut table = Self::new(h);
        for i in 0..h.k - 1 {
            for j in 0..=j_max {
                table.get_or_insert(i, j);
            }
        }
        table
    }

    pub fn get_or_insert(&mut self, i: u32, j: u32) -> Rational {
        let (k, sigma) = (self.k, self.sigma);
        self.entries
            .entry((i, j))
            .or_insert_with(|| conversion_constant(k, sigma, i, j))
            .clone()
    }

    /// Smallest `|b|` over the table.
    pub fn min_abs(&self) -> Option<Rational> {
        self.entries
            .values()
            .map(|b| {
                if b < &Rational::ZERO {
                    -b.clone()
                } else {
                    b.clone()
                }
            })
            .min()
    }

    /// `j` values whose constants differ between rows `i`.
    pub fn i_dependent_columns(&self) -> Vec<u32> {
        let mut by_j: BTreeMap<u32, Vec<&Rational>> = BTreeMap::new();
        for ((_, j), b) in &self.entries {
            by_j.entry(*j).or_default().push(b);
        }
        by_j.into_iter()
            .filter(|(_, bs)| bs.windows(2).any(|w| w[0] != w[1]))
            .map(|(j, _)| j)
            .collect()
    }

    pub fn is_i_independent(&self) -> bool {
        self.i_dependent_columns().is_empty()
    }
}

/// `c~_i(H)` form: `c~_{ij} = c_{ij} / b_{(i,j)}`.
pub fn ch_form<C: Coefficient>(
    c: &TruncatedSeries1<C>,
    h: AkHamiltonian,
) -> Result<(NormalForm<C>, ConversionTable), NormalFormError> {
    require_reduced(c, h.k)?;
    let ring = c.ring();
    let mut table = ConversionTable::new(h);
    let components = c_decompose(c, h.k)?
        .into_iter()
        .enumerate()
        .map(|(i, ci)| {
            TruncatedSeries1::from_terms(
                ring,
                ci.order(),
                ci.terms().map(|(j, cij)| {
                    let b = table.get_or_insert(i as u32, j);
                    (j, cij.mul(&C::from_rational(&(Rational::ONE / b), ring)))
                }),
            )
        })
        .collect();
    let nf = NormalForm {
        kind: FormKind::ChForm,
        hamiltonian: h,
        components,
        smooth_mode: false,
        flipped: false,
        orientation_flipped: false,
        source_order: c.order(),
    };
    Ok((nf, table))
}

/// `sum_i x^i c~_i(H(x, xi))` as a bivariate series to `order`.
pub fn ch_expand<C: Coefficient>(
    nf: &NormalForm<C>,
    order: u32,
) -> Result<TruncatedSeries2<C>, NormalFormError> {
    if nf.kind != FormKind::ChForm {
        return Err(NormalFormError::Mismatch(format!(
            "expected CH_FORM, got {:?}",
            nf.kind
        )));
    }
    let ring = nf
        .components
        .first()
        .map(|c| c.ring())
        .ok_or_else(|| NormalFormError::Structure("no components".into()))?;
    let hs = nf.hamiltonian.as_series::<C>(ring);
    let mut out = TruncatedSeries2::zero(ring, order);
    for (i, ci) in nf.components.iter().enumerate() {
        let xi_pow = TruncatedSeries2::monomial(ring, EXACT, i as u32, 0, C::one(ring));
        let term = ci.as_polynomial().compose2(&hs)?.with_order(order);
        out = out.checked_add(&xi_pow.mul_to(&term, order))?;
    }
    Ok(out)
}

/// Re-reduce the expansion of a CH_FORM; recovers the residual it came from.
pub fn ch_residual<C: Coefficient>(
    nf: &NormalForm<C>,
) -> Result<TruncatedSeries1<C>, NormalFormError> {
    let g = ch_expand(nf, nf.source_order)?;
    let sol = solve_cohomological(&g, nf.hamiltonian)?;
    debug_assert!(is_reduced(&sol.c, nf.k()));
    Ok(sol.c)
}
