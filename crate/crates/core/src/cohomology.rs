//! Formal solution of the cohomological equation `{H, u} = g - c`.
//!
//! The residual `c(x)` is reduced: no exponent is congruent to `k-1`
//! modulo `k`. It is computed in three steps:
//!
//! 1. the odd part `xi g1(x, xi^2)` is a bracket with `H` outright;
//! 2. monomials `x^i xi^{2j}` of the even part trade `xi^2` for `x^k`
//!    through the chain `u_{ij} = x^{i+1} xi^{2j-1} / (2(i+1))`;
//! 3. the remaining univariate terms `x^{k-1} C(x^k)` are brackets of
//!    functions of `(xi, H)`.
//!
//! Every step maps a monomial of degree `d` to terms of degree `>= d`, so
//! the certificate `{H, u} + c = g` holds exactly to the order of `g`. It is
//! checked on every solve.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::series::{
    AkHamiltonian, Coefficient, Rational, Ring, SeriesError, Sigma, TruncatedSeries1,
    TruncatedSeries2, EXACT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CohomologyError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("certificate {{H,u}} + c = g failed below order {order}")]
    CertificateFailed { order: u32 },
    #[error("sign convention self-test failed for k={k}, sigma={sigma}")]
    SignSelfTest { k: u32, sigma: Sigma },
}

/// `h(i, j) = (2j - 1) k / (2(i + 1))`.
pub fn h_ratio(k: u32, i: u32, j: u32) -> Rational {
    Rational::from_parts(
        ((2 * j as i64 - 1) * k as i64).into(),
        (2 * (i as u64 + 1)).into(),
    )
}

/// `tau(i, j) = (i + k, j - 1)`.
pub fn tau(k: u32, i: u32, j: u32) -> (u32, u32) {
    (i + k, j - 1)
}

/// Chain coefficients `a_{ij}^n` of the second elimination step.
#[derive(Clone, Debug, PartialEq)]
pub struct ElimTable {
    pub k: u32,
    pub sigma: Sigma,
    entries: BTreeMap<(u32, u32, u32), Rational>,
}

impl ElimTable {
    pub fn new(h: AkHamiltonian) -> Self {
        ElimTable {
            k: h.k,
            sigma: h.sigma,
            entries: BTreeMap::new(),
        }
    }

    /// `a_{ij}^n = sigma^n prod_{p<n} h(tau^p(i, j))` for `n < j`.
    pub fn closed_form(k: u32, sigma: Sigma, i: u32, j: u32, n: u32) -> Rational {
        assert!(n < j.max(1), "a_ij^n needs n < j");
        let mut acc = Rational::from(sigma.pow(n));
        let (mut p, mut q) = (i, j);
        for _ in 0..n {
            acc *= h_ratio(k, p, q);
            (p, q) = tau(k, p, q);
        }
        acc
    }

    /// Populate all `n < j` for the monomial `x^i xi^{2j}` and return them.
    pub fn chain(&mut self, i: u32, j: u32) -> Vec<Rational> {
        let mut out = Vec::with_capacity(j as usize);
        let mut a = Rational::ONE;
        let (mut p, mut q) = (i, j);
        for n in 0..j {
            self.entries.entry((i, j, n)).or_insert_with(|| a.clone());
            out.push(a.clone());
            a = a * h_ratio(self.k, p, q) * Rational::from(self.sigma.value());
            (p, q) = tau(self.k, p, q);
        }
        out
    }

    pub fn get(&self, i: u32, j: u32, n: u32) -> Option<&Rational> {
        self.entries.get(&(i, j, n))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32, u32), &Rational)> + '_ {
        self.entries.iter().map(|(key, a)| (*key, a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The residual and its certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologySolution<C> {
    pub u: TruncatedSeries2<C>,
    pub c: TruncatedSeries1<C>,
    pub residual_order: u32,
    pub table: ElimTable,
}

impl<C: Coefficient> CohomologySolution<C> {
    /// Whether `{H, u} + c = g` up to `residual_order`.
    pub fn verify(&self, g: &TruncatedSeries2<C>, h: AkHamiltonian) -> bool {
        certificate_holds(g, h, &self.u, &self.c, self.residual_order)
    }
}

fn certificate_holds<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    h: AkHamiltonian,
    u: &TruncatedSeries2<C>,
    c: &TruncatedSeries1<C>,
    order: u32,
) -> bool {
    let lhs = h.bracket(u).with_order(order);
    let Ok(lhs) = lhs.checked_add(&TruncatedSeries2::from_univariate_x(c).with_order(order)) else {
        return false;
    };
    let rhs = g.with_order(order);
    let noise = C::noise_level(g.ring());
    if noise == 0.0 {
        return lhs == rhs;
    }
    let scale = lhs.max_abs_f64().max(rhs.max_abs_f64()).max(1.0);
    matches!(lhs.checked_sub(&rhs), Ok(d) if d.max_abs_f64() <= noise * scale)
}

fn q<C: Coefficient>(value: &Rational, ring: Ring) -> C {
    C::from_rational(value, ring)
}

/// Whether no exponent is congruent to `k - 1` modulo `k`.
pub fn is_reduced<C: Coefficient>(c: &TruncatedSeries1<C>, k: u32) -> bool {
    c.terms().all(|(e, _)| e % k != k - 1)
}

/// Remove the part odd in `xi`: returns `(u_odd, g_even)` with
/// `{H, u_odd} = xi g1(x, xi^2)`.
pub fn eliminate_odd<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    h: AkHamiltonian,
) -> Result<(TruncatedSeries2<C>, TruncatedSeries2<C>), SeriesError> {
    let ring = g.ring();
    let order = g.order();
    let split = g.parity_split();
    let g_even = TruncatedSeries2::from_terms(
        ring,
        order,
        split.even.terms().map(|(i, j, c)| (i, 2 * j, c.clone())),
    );
    if split.odd.is_zero() {
        return Ok((TruncatedSeries2::zero(ring, order), g_even));
    }
    // Work in (x, h): u~(x, h) = 1/2 int_0^x g1(s, h - sigma s^k) ds. A term
    // x^a h^b returns to degree >= a + b once h = xi^2 + sigma x^k, so
    // truncating in (x, h) at the order is sound.
    let sigma = C::from_i64(h.sigma.value(), ring);
    let x = TruncatedSeries2::x(ring, EXACT);
    let eta =
        TruncatedSeries2::from_terms(ring, EXACT, [(0, 1, C::one(ring)), (h.k, 0, sigma.neg())]);
    let g1 = split.odd.substitute(&x, &eta)?.with_order(order);
    let half = q::<C>(&Rational::from_parts(1.into(), 2u8.into()), ring);
    let u_tilde = g1.antiderivative_x().scale(&half).with_order(order);
    let hh = TruncatedSeries2::from_terms(ring, EXACT, [(0, 2, C::one(ring)), (h.k, 0, sigma)]);
    let u_odd = u_tilde.substitute(&x, &hh)?.with_order(order);
    Ok((u_odd, g_even))
}

/// Trade `xi^2` for `x^k` in an even series: returns `(U, c_raw, table)` with
/// `{H, U} = g_even - c_raw`.
pub fn eliminate_xi<C: Coefficient>(
    g_even: &TruncatedSeries2<C>,
    h: AkHamiltonian,
) -> Result<(TruncatedSeries2<C>, TruncatedSeries1<C>, ElimTable), SeriesError> {
    let ring = g_even.ring();
    let order = g_even.order();
    let k = h.k;
    let mut table = ElimTable::new(h);
    let mut u = TruncatedSeries2::zero(ring, order);
    let mut c_raw = TruncatedSeries1::<C>::zero(ring, order);
    let mut monomials: Vec<_> = g_even.terms().collect();
    monomials.sort_by_key(|&(i, j, _)| (i + j, i, j));
    for (i, two_j, coeff) in monomials {
        if two_j % 2 == 1 {
            return Err(SeriesError::Parse(
                "eliminate_xi needs a series even in xi".into(),
            ));
        }
        let j = two_j / 2;
        if j == 0 {
            c_raw = c_raw.checked_add(&TruncatedSeries1::from_terms(
                ring,
                order,
                [(i, coeff.clone())],
            ))?;
            continue;
        }
        let chain = table.chain(i, j);
        let (mut p, mut qq) = (i, j);
        for a in &chain {
            // u_{pq} = x^{p+1} xi^{2q-1} / (2(p+1))
            let scale = a.clone() / Rational::from(2 * (p as u64 + 1));
            let term = coeff.mul(&q::<C>(&scale, ring));
            u.accumulate(p + 1, 2 * qq - 1, &term);
            (p, qq) = tau(k, p, qq);
        }
        // Residual sigma^j prod_{p<j} h(tau^p) x^{i + kj}.
        let last = chain.last().cloned().unwrap_or(Rational::ONE);
        let (lp, lq) = (i + k * (j - 1), 1);
        let residue = last * h_ratio(k, lp, lq) * Rational::from(h.sigma.value());
        c_raw = c_raw.checked_add(&TruncatedSeries1::from_terms(
            ring,
            order,
            [(i + k * j, coeff.mul(&q::<C>(&residue, ring)))],
        ))?;
    }
    Ok((u, c_raw, table))
}

/// Remove exponents congruent to `k - 1`: returns `(u0, c)` with
/// `{H, u0} = c_raw - c`.
pub fn reduce_residual<C: Coefficient>(
    c_raw: &TruncatedSeries1<C>,
    h: AkHamiltonian,
) -> Result<(TruncatedSeries2<C>, TruncatedSeries1<C>), SeriesError> {
    let ring = c_raw.ring();
    let order = c_raw.order();
    let k = h.k;
    let mut kept = TruncatedSeries1::zero(ring, order);
    let mut removable = Vec::new();
    for (e, c) in c_raw.terms() {
        if e % k == k - 1 {
            // x^{k-1} C(x^k) with D(t) = C(sigma t).
            let m = e / k;
            let d = if h.sigma.pow(m) < 0 {
                c.neg()
            } else {
                c.clone()
            };
            removable.push((m, d));
        } else {
            kept =
                kept.checked_add(&TruncatedSeries1::from_terms(ring, order, [(e, c.clone())]))?;
        }
    }
    if removable.is_empty() {
        return Ok((TruncatedSeries2::zero(ring, order), kept));
    }
    // u~(xi, h) = -(sigma/k) int_0^xi D(h - s^2) ds, stored with h in the
    // x slot, then h = H. Only known coefficients of D enter, so D is exact.
    let d = TruncatedSeries1::from_terms(ring, EXACT, removable);
    let inner = TruncatedSeries2::from_terms(
        ring,
        EXACT,
        [(1, 0, C::one(ring)), (0, 2, C::from_i64(-1, ring))],
    );
    let factor = q::<C>(
        &(Rational::from(-h.sigma.value()) / Rational::from(k)),
        ring,
    );
    let u_tilde = d.compose2(&inner)?.antiderivative_xi().scale(&factor);
    let u0 = u_tilde
        .substitute(&h.as_series(ring), &TruncatedSeries2::xi(ring, EXACT))?
        .with_order(order);
    Ok((u0, kept))
}

/// Check that `{H, u_{0,1}}` has the sign pattern the elimination assumes.
pub fn sign_self_test(h: AkHamiltonian) -> Result<(), CohomologyError> {
    let ring = Ring::Rational;
    let u01 = TruncatedSeries2::<Rational>::from_rationals(
        ring,
        EXACT,
        [(1, 1, Rational::from_parts(1.into(), 2u8.into()))],
    );
    let expected = TruncatedSeries2::<Rational>::from_rationals(
        ring,
        EXACT,
        [
            (0, 2, Rational::ONE),
            (
                h.k,
                0,
                -(h_ratio(h.k, 0, 1) * Rational::from(h.sigma.value())),
            ),
        ],
    );
    let direct = u01.poisson_bracket(&h.as_series(ring))?;
    if h.bracket(&u01) == expected && direct == expected {
        Ok(())
    } else {
        Err(CohomologyError::SignSelfTest {
            k: h.k,
            sigma: h.sigma,
        })
    }
}

/// Solve `{H, u} = g - c` with `c` reduced; the certificate is verified
/// before returning.
pub fn solve_cohomological<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    h: AkHamiltonian,
) -> Result<CohomologySolution<C>, CohomologyError> {
    sign_self_test(h)?;
    let order = g.order();
    if order == EXACT {
        return Err(SeriesError::InvalidHamiltonian(
            "solve needs a finite truncation order".into(),
        )
        .into());
    }
    let (u_odd, g_even) = eliminate_odd(g, h)?;
    let (u_even, c_raw, table) = eliminate_xi(&g_even, h)?;
    let (u0, c) = reduce_residual(&c_raw, h)?;
    let u = u_odd.checked_add(&u_even)?.checked_add(&u0)?;
    if !certificate_holds(g, h, &u, &c, order) {
        return Err(CohomologyError::CertificateFailed { order });
    }
    Ok(CohomologySolution {
        u,
        c,
        residual_order: order,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type S2 = TruncatedSeries2<Rational>;
    type S1 = TruncatedSeries1<Rational>;
    const Q: Ring = Ring::Rational;

    fn r(n: i64, d: u64) -> Rational {
        Rational::from_parts(n.into(), d.into())
    }

    fn quartic() -> AkHamiltonian {
        AkHamiltonian::new(4, Sigma::Plus).unwrap()
    }

    fn series(order: u32, terms: &[(u32, u32, i64)]) -> S2 {
        S2::from_terms(
            Q,
            order,
            terms.iter().map(|&(i, j, c)| (i, j, Rational::from(c))),
        )
    }

    #[test]
    fn odd_part_of_xi() {
        let (u, g_even) = eliminate_odd(&series(8, &[(0, 1, 1)]), quartic()).unwrap();
        assert_eq!(u, S2::from_rationals(Q, 8, [(1, 0, r(1, 2))]));
        assert!(g_even.is_zero());
    }

    #[test]
    fn odd_part_of_xi_cubed() {
        for sigma in [Sigma::Plus, Sigma::Minus] {
            for k in 2..6 {
                let h = AkHamiltonian::new(k, sigma).unwrap();
                let g = series(12, &[(0, 3, 1)]);
                let (u, g_even) = eliminate_odd(&g, h).unwrap();
                assert!(g_even.is_zero());
                assert_eq!(h.bracket(&u), g.with_order(12));
                // 1/2 x xi^2 + sigma k x^{k+1} / (2(k+1))
                let expected = S2::from_rationals(
                    Q,
                    12,
                    [
                        (1, 2, r(1, 2)),
                        (k + 1, 0, r(sigma.value() * k as i64, 2 * (k as u64 + 1))),
                    ],
                );
                assert_eq!(u, expected);
            }
        }
    }

    #[test]
    fn xi_squared_quartic() {
        let (u, c_raw, table) = eliminate_xi(&series(10, &[(0, 2, 1)]), quartic()).unwrap();
        assert_eq!(u, S2::from_rationals(Q, 10, [(1, 1, r(1, 2))]));
        assert_eq!(c_raw, S1::from_rationals(Q, 10, [(4, Rational::from(2))]));
        assert_eq!(table.get(0, 1, 0), Some(&Rational::ONE));
    }

    #[test]
    fn x_passes_through() {
        let (u, c_raw, _) = eliminate_xi(&series(10, &[(1, 0, 1)]), quartic()).unwrap();
        assert!(u.is_zero());
        assert_eq!(c_raw, S1::from_rationals(Q, 10, [(1, Rational::ONE)]));
    }

    #[test]
    fn xi_fourth_cubic_minus() {
        let h = AkHamiltonian::new(3, Sigma::Minus).unwrap();
        let g = series(10, &[(0, 4, 1)]);
        let (u, c_raw, _) = eliminate_xi(&g, h).unwrap();
        assert_eq!(c_raw.coeff(6), r(27, 16));
        assert_eq!(c_raw.len(), 1);
        let back = &h.bracket(&u) + &S2::from_univariate_x(&c_raw);
        assert_eq!(back, g);
    }

    #[test]
    fn residual_x_cubed() {
        let (u0, c) =
            reduce_residual(&S1::from_rationals(Q, 10, [(3, Rational::ONE)]), quartic()).unwrap();
        assert_eq!(u0, S2::from_rationals(Q, 10, [(0, 1, r(-1, 4))]));
        assert!(c.is_zero());
    }

    #[test]
    fn residual_constant_kept() {
        let one = S1::from_rationals(Q, 10, [(0, Rational::ONE)]);
        let (u0, c) = reduce_residual(&one, quartic()).unwrap();
        assert!(u0.is_zero());
        assert_eq!(c, one);
    }

    #[test]
    fn residual_cubic_two_terms() {
        for sigma in [Sigma::Plus, Sigma::Minus] {
            let h = AkHamiltonian::new(3, sigma).unwrap();
            let c_raw = S1::from_rationals(Q, 10, [(2, Rational::ONE), (5, Rational::ONE)]);
            let (u0, c) = reduce_residual(&c_raw, h).unwrap();
            assert!(c.is_zero());
            assert_eq!(h.bracket(&u0), S2::from_univariate_x(&c_raw));
        }
    }

    #[test]
    fn full_solve_examples() {
        let one = solve_cohomological(&series(10, &[(0, 0, 1)]), quartic()).unwrap();
        assert!(one.u.is_zero());
        assert_eq!(one.c, S1::from_rationals(Q, 10, [(0, Rational::ONE)]));

        let sol = solve_cohomological(&series(10, &[(0, 1, 1), (3, 0, 1), (0, 2, 1)]), quartic())
            .unwrap();
        assert_eq!(sol.c, S1::from_rationals(Q, 10, [(4, Rational::from(2))]));
        assert_eq!(
            sol.u,
            S2::from_rationals(Q, 10, [(1, 0, r(1, 2)), (0, 1, r(-1, 4)), (1, 1, r(1, 2))])
        );
    }

    #[test]
    fn closed_form_matches_recursion() {
        for k in 2..8 {
            for sigma in [Sigma::Plus, Sigma::Minus] {
                let mut table = ElimTable::new(AkHamiltonian::new(k, sigma).unwrap());
                for i in 0..6 {
                    for j in 1..7 {
                        let chain = table.chain(i, j);
                        for (n, a) in chain.iter().enumerate() {
                            assert_eq!(*a, ElimTable::closed_form(k, sigma, i, j, n as u32));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn self_test_passes() {
        for k in 2..9 {
            for sigma in [Sigma::Plus, Sigma::Minus] {
                sign_self_test(AkHamiltonian::new(k, sigma).unwrap()).unwrap();
            }
        }
    }

    #[test]
    fn big_float_solve_matches_rational() {
        use crate::series::BigFloat;
        let g = series(
            12,
            &[(0, 0, 3), (1, 2, -2), (2, 4, 5), (5, 1, 1), (7, 0, 1)],
        );
        let h = AkHamiltonian::new(3, Sigma::Minus).unwrap();
        let exact = solve_cohomological(&g, h).unwrap();
        let ring = Ring::big_float(128);
        let gf = g.map_ring(ring, |c| BigFloat::from_rational(c, ring));
        let approx = solve_cohomological(&gf, h).unwrap();
        for (e, c) in exact.c.terms() {
            assert!((approx.c.coeff(e).to_f64() - Coefficient::to_f64(c)).abs() < 1e-30);
        }
    }
}
