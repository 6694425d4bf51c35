use super::{f_series, NormalForm, NormalFormError};
use crate::moser::SeriesMap;
use crate::series::{Coefficient, TruncatedSeries1, TruncatedSeries2, EXACT};

/// Coefficient of `dxi ^ dx` in `d(f(x) dxi)`, i.e. `-f'(x)`.
pub fn d_f_dxi<C: Coefficient>(
    f: &TruncatedSeries1<C>,
) -> Result<TruncatedSeries2<C>, NormalFormError> {
    Ok(TruncatedSeries2::from_univariate_x(&f.derivative()?.neg()))
}

/// Potential `V = sigma (f^{-1})^k` and the change `(x~, xi~) = (f(x), -xi)`
/// with `xi~^2 + V(x~) = H` and `dxi~ ^ dx~` pulling back to `d(f dxi)`.
pub fn potential_form<C: Coefficient>(
    nf: &NormalForm<C>,
) -> Result<(TruncatedSeries1<C>, SeriesMap<C>), NormalFormError> {
    let f = f_series(nf)?;
    if f.coeff(1).is_zero() {
        return Err(NormalFormError::Degenerate("f_1(0) = 0".into()));
    }
    let ring = f.ring();
    let f_inv = if f.is_exact() {
        f.invert_to(nf.source_order.saturating_add(1))?
    } else {
        f.invert()?
    };
    if f_inv.order() == EXACT {
        return Err(NormalFormError::Structure(
            "potential form needs a finite order".into(),
        ));
    }
    let v = f_inv
        .pow(nf.k())
        .scale(&C::from_i64(nf.sigma().value(), ring));
    let change = SeriesMap::new(
        TruncatedSeries2::from_univariate_x(&f),
        TruncatedSeries2::monomial(ring, EXACT, 0, 1, C::from_i64(-1, ring)),
    )?;
    Ok((v, change))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moser::pullback_form;
    use crate::normalform::f_form;
    use crate::series::{AkHamiltonian, Rational, Ring, Sigma};

    const Q: Ring = Ring::Rational;

    fn check(c: &TruncatedSeries1<Rational>, h: AkHamiltonian) -> TruncatedSeries1<Rational> {
        let nf = f_form(c, h).unwrap();
        let (v, change) = potential_form(&nf).unwrap();
        let hs = h.as_series::<Rational>(Q);
        let xi2 = TruncatedSeries2::monomial(Q, EXACT, 0, 2, Rational::ONE);
        let lhs = &v.compose2(&change.phi_x).unwrap() + &xi2;
        assert_eq!(lhs, hs.with_order(lhs.order()));
        let one = TruncatedSeries2::constant(Rational::ONE, Q, EXACT);
        let f = f_series(&nf).unwrap();
        assert_eq!(pullback_form(&one, &change).unwrap(), d_f_dxi(&f).unwrap());
        v
    }

    #[test]
    fn identity_change() {
        let h = AkHamiltonian::new(4, Sigma::Plus).unwrap();
        let c = TruncatedSeries1::from_terms(Q, 10, [(0, Rational::ONE)]);
        let v = check(&c, h);
        assert_eq!(
            v,
            TruncatedSeries1::from_terms(Q, v.order(), [(4, Rational::ONE)])
        );
    }

    #[test]
    fn doubled_f() {
        let h = AkHamiltonian::new(4, Sigma::Plus).unwrap();
        let c = TruncatedSeries1::from_terms(Q, 10, [(0, Rational::from(2))]);
        let v = check(&c, h);
        assert_eq!(v.coeff(4), Rational::from_parts(1.into(), 16u8.into()));
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn cubic_minus() {
        // f = x + x^2, i.e. c = 1 + 2x.
        let h = AkHamiltonian::new(3, Sigma::Minus).unwrap();
        let c = TruncatedSeries1::from_terms(Q, 10, [(0, Rational::ONE), (1, Rational::from(2))]);
        let v = check(&c, h);
        assert_eq!(v.coeff(3), Rational::from(-1));
        assert_eq!(v.coeff(4), Rational::from(3));
    }
}
