//! H-preserving maps, pullbacks and the invariance harness.
//!
//! Test maps are time-one flows of `Y = w X^_H` with `X^_H = (H_xi, -H_x)`,
//! computed as Lie series `phi = sum_n L_Y^n(id) / n!`. Since `dH(Y) = 0`
//! every such map preserves `H`, and it is isotopic to the identity, so it
//! must not change the invariants.

use thiserror::Error;

use crate::cohomology::{solve_cohomological, CohomologyError};
use crate::normalform::{canonicalize_sign, f_form, invariants_equal, NormalForm, NormalFormError};
use crate::series::{
    order_minus, AkHamiltonian, Coefficient, Rational, Ring, SeriesError, TruncatedSeries2, EXACT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoserError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
    #[error("vector field has a non-nilpotent linear part; the Lie series does not terminate under truncation")]
    ValuationTooLow,
    #[error("map does not preserve H up to order {order}")]
    NotHPreserving { order: u32 },
    #[error("linear part is not of the admissible shape: {0}")]
    NotAkShape(String),
    #[error("Lie series did not terminate after {0} terms")]
    NonConvergent(u32),
}

/// A map germ `(x, xi) -> (phi_x, phi_xi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMap<C> {
    pub phi_x: TruncatedSeries2<C>,
    pub phi_xi: TruncatedSeries2<C>,
}

impl<C: Coefficient> SeriesMap<C> {
    pub fn new(
        phi_x: TruncatedSeries2<C>,
        phi_xi: TruncatedSeries2<C>,
    ) -> Result<Self, SeriesError> {
        if !phi_x.coeff(0, 0).is_zero() || !phi_xi.coeff(0, 0).is_zero() {
            return Err(SeriesError::InvalidHamiltonian(
                "map germ must fix the origin".into(),
            ));
        }
        Ok(SeriesMap { phi_x, phi_xi })
    }

    pub fn identity(ring: Ring) -> Self {
        SeriesMap {
            phi_x: TruncatedSeries2::x(ring, EXACT),
            phi_xi: TruncatedSeries2::xi(ring, EXACT),
        }
    }

    /// `(a x + b xi, c x + d xi)`.
    pub fn linear(ring: Ring, a: C, b: C, c: C, d: C) -> Self {
        SeriesMap {
            phi_x: TruncatedSeries2::from_terms(ring, EXACT, [(1, 0, a), (0, 1, b)]),
            phi_xi: TruncatedSeries2::from_terms(ring, EXACT, [(1, 0, c), (0, 1, d)]),
        }
    }

    pub fn ring(&self) -> Ring {
        self.phi_x.ring()
    }

    pub fn order(&self) -> u32 {
        self.phi_x.order().min(self.phi_xi.order())
    }

    /// Jacobian determinant; one order below the map.
    pub fn jacobian_det(&self) -> Result<TruncatedSeries2<C>, SeriesError> {
        let a = self.phi_x.derivative_x()?;
        let b = self.phi_x.derivative_xi()?;
        let c = self.phi_xi.derivative_x()?;
        let d = self.phi_xi.derivative_xi()?;
        a.checked_mul(&d)?.checked_sub(&b.checked_mul(&c)?)
    }

    /// `self o inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        Ok(SeriesMap {
            phi_x: self.phi_x.substitute(&inner.phi_x, &inner.phi_xi)?,
            phi_xi: self.phi_xi.substitute(&inner.phi_x, &inner.phi_xi)?,
        })
    }

    /// `f o self`.
    pub fn apply(&self, f: &TruncatedSeries2<C>) -> Result<TruncatedSeries2<C>, SeriesError> {
        f.substitute(&self.phi_x, &self.phi_xi)
    }

    /// Whether `H o self = H` to the order of the map.
    pub fn preserves(&self, h: AkHamiltonian) -> Result<bool, SeriesError> {
        let hs = h.as_series::<C>(self.ring());
        let order = self.order();
        Ok(self.apply(&hs)?.with_order(order) == hs.with_order(order))
    }
}

/// `X^_H = (H_xi, -H_x)`, checked against `dH(X^_H) = 0`.
pub fn canonical_vf<C: Coefficient>(
    h: AkHamiltonian,
    ring: Ring,
) -> (TruncatedSeries2<C>, TruncatedSeries2<C>) {
    let (vx, vxi) = h.vector_field::<C>(ring);
    let hs = h.as_series::<C>(ring);
    let dh =
        &(&hs.derivative_x().expect("exact") * &vx) + &(&hs.derivative_xi().expect("exact") * &vxi);
    assert!(dh.is_zero(), "dH(X_H) must vanish");
    (vx, vxi)
}

/// Time-one flow of `Y = w X^_H`, to `order`.
pub fn flow_map<C: Coefficient>(
    w: &TruncatedSeries2<C>,
    h: AkHamiltonian,
    order: u32,
) -> Result<SeriesMap<C>, MoserError> {
    let ring = w.ring();
    let order = order.min(crate::series::order_plus(w.order(), 1));
    let (vx, vxi) = canonical_vf::<C>(h, ring);
    let w = w.as_polynomial();
    let yx = w.checked_mul(&vx)?;
    let yxi = w.checked_mul(&vxi)?;
    // Y vanishes at the origin; its linear part is w(0) (2 xi, -2 sigma x)
    // for k = 2 and nilpotent otherwise.
    if h.k == 2 && !w.coeff(0, 0).is_zero() {
        return Err(MoserError::ValuationTooLow);
    }
    let lie = |f: &TruncatedSeries2<C>| -> TruncatedSeries2<C> {
        // f_x is valid one order below f, Y vanishes at 0: order is kept.
        let a = yx.mul_to(&f.raw_derivative_x(order), order);
        let b = yxi.mul_to(&f.raw_derivative_xi(order), order);
        &a + &b
    };
    let max_terms = order.saturating_mul(h.k + 2).saturating_add(4);
    let series = |start: TruncatedSeries2<C>| -> Result<TruncatedSeries2<C>, MoserError> {
        let mut acc = start.with_order(order);
        let mut term = acc.clone();
        for n in 1..=max_terms {
            term = lie(&term).scale(&C::from_rational(
                &(Rational::ONE / Rational::from(n)),
                ring,
            ));
            if term.is_zero() {
                return Ok(acc);
            }
            acc = acc.checked_add(&term)?;
        }
        Err(MoserError::NonConvergent(max_terms))
    };
    let map = SeriesMap {
        phi_x: series(TruncatedSeries2::x(ring, order))?,
        phi_xi: series(TruncatedSeries2::xi(ring, order))?,
    };
    if !map.preserves(h)? {
        return Err(MoserError::NotHPreserving { order });
    }
    Ok(map)
}

/// Coefficient of `phi^*(g dxi ^ dx)`: `(g o phi) det dphi`. The result is
/// valid one order below the map.
pub fn pullback_form<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    map: &SeriesMap<C>,
) -> Result<TruncatedSeries2<C>, SeriesError> {
    let det = map.jacobian_det()?;
    map.apply(g)?.checked_mul(&det)
}

/// `Inv(x, xi) = (-x, -xi)`.
pub fn inv_map<C: Coefficient>(ring: Ring) -> SeriesMap<C> {
    let m1 = C::from_i64(-1, ring);
    SeriesMap::linear(ring, m1.clone(), C::zero(ring), C::zero(ring), m1)
}

/// Linear part `dphi(0) = (eps1 b; 0 eps2)` of an H-preserving map.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearPart<C> {
    pub eps1: i8,
    pub eps2: i8,
    pub b: C,
}

fn unit_sign<C: Coefficient>(v: &C, ring: Ring) -> Option<i8> {
    if *v == C::one(ring) {
        Some(1)
    } else if *v == C::from_i64(-1, ring) {
        Some(-1)
    } else {
        None
    }
}

pub fn linear_part<C: Coefficient>(
    map: &SeriesMap<C>,
    h: AkHamiltonian,
) -> Result<LinearPart<C>, MoserError> {
    if !map.preserves(h)? {
        return Err(MoserError::NotHPreserving { order: map.order() });
    }
    let ring = map.ring();
    let a = map.phi_x.coeff(1, 0);
    let b = map.phi_x.coeff(0, 1);
    let c = map.phi_xi.coeff(1, 0);
    let d = map.phi_xi.coeff(0, 1);
    if !c.is_zero() {
        return Err(MoserError::NotAkShape(format!(
            "lower-left entry {c} is not zero"
        )));
    }
    let eps2 = unit_sign(&d, ring)
        .ok_or_else(|| MoserError::NotAkShape(format!("xi-diagonal {d} is not +-1")))?;
    let eps1 = unit_sign(&a, ring)
        .ok_or_else(|| MoserError::NotAkShape(format!("x-diagonal {a} is not +-1")))?;
    if eps1 == -1 && h.k % 2 == 1 {
        return Err(MoserError::NotAkShape("eps1 = -1 with k odd".into()));
    }
    Ok(LinearPart { eps1, eps2, b })
}

/// Invariants before and after a map.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundtripReport<C> {
    pub equal: bool,
    pub certified_order: u32,
    pub before: NormalForm<C>,
    pub after: NormalForm<C>,
}

/// Primitive-form invariants of `g`.
pub fn invariants_of<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    h: AkHamiltonian,
) -> Result<NormalForm<C>, MoserError> {
    let sol = solve_cohomological(g, h)?;
    Ok(f_form(&sol.c, h)?)
}

/// Compare the invariants of `g` with those of its pullback under `map`.
pub fn roundtrip_with_map<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    h: AkHamiltonian,
    map: &SeriesMap<C>,
) -> Result<RoundtripReport<C>, MoserError> {
    let pulled = pullback_form(g, map)?;
    let order = pulled.order().min(g.order());
    let before = invariants_of(&g.with_order(order), h)?;
    let after = invariants_of(&pulled.with_order(order), h)?;
    let equal = invariants_equal(&before, &after)?;
    Ok(RoundtripReport {
        equal,
        certified_order: order,
        before,
        after,
    })
}

/// Invariants of `g` and of its pullback under the flow of `w X^_H`.
pub fn roundtrip_invariants<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    h: AkHamiltonian,
    w: &TruncatedSeries2<C>,
) -> Result<RoundtripReport<C>, MoserError> {
    // The pullback loses an order through the Jacobian; flow one order up.
    let map = flow_map(w, h, crate::series::order_plus(g.order(), 1))?;
    roundtrip_with_map(g, h, &map)
}

/// Whether a flip was needed to match, consistent with the orbit content.
pub fn inv_flip_consistent<C: Coefficient>(report: &RoundtripReport<C>) -> bool {
    let (_, fb) = canonicalize_sign(&report.before);
    let (_, fa) = canonicalize_sign(&report.after);
    if report.before.orbit_nonzero() {
        fb != fa
    } else {
        !fb && !fa
    }
}

/// Order of a pullback under a map of order `map_order`.
pub fn pullback_order(map_order: u32) -> Result<u32, SeriesError> {
    order_minus(map_order, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Sigma;

    type S = TruncatedSeries2<Rational>;
    const Q: Ring = Ring::Rational;

    fn hk(k: u32, sigma: Sigma) -> AkHamiltonian {
        AkHamiltonian::new(k, sigma).unwrap()
    }

    #[test]
    fn vector_fields() {
        let (vx, vxi) = canonical_vf::<Rational>(hk(4, Sigma::Plus), Q);
        assert_eq!(vx, S::polynomial_i64(Q, &[(0, 1, 2)]));
        assert_eq!(vxi, S::polynomial_i64(Q, &[(3, 0, -4)]));
        let (vx, vxi) = canonical_vf::<Rational>(hk(2, Sigma::Minus), Q);
        assert_eq!(vx, S::polynomial_i64(Q, &[(0, 1, 2)]));
        assert_eq!(vxi, S::polynomial_i64(Q, &[(1, 0, 2)]));
    }

    #[test]
    fn zero_flow_is_identity() {
        let map = flow_map(&S::zero(Q, EXACT), hk(4, Sigma::Plus), 8).unwrap();
        assert_eq!(map.phi_x, S::x(Q, 8));
        assert_eq!(map.phi_xi, S::xi(Q, 8));
    }

    #[test]
    fn flow_of_function_of_h_is_area_preserving() {
        let h = hk(4, Sigma::Plus);
        let w = h.as_series::<Rational>(Q).scale(&Rational::from(3));
        let map = flow_map(&w, h, 9).unwrap();
        let one = S::constant(Rational::ONE, Q, EXACT);
        assert_eq!(pullback_form(&one, &map).unwrap(), one.with_order(8));
    }

    #[test]
    fn flow_of_x_squared_preserves_h() {
        let h = hk(3, Sigma::Minus);
        let w = S::polynomial_i64(Q, &[(2, 0, 1)]);
        let map = flow_map(&w, h, 10).unwrap();
        assert!(map.preserves(h).unwrap());
        let lp = linear_part(&map, h).unwrap();
        assert_eq!((lp.eps1, lp.eps2), (1, 1));
    }

    #[test]
    fn constant_w_reads_off_b() {
        let h = hk(4, Sigma::Plus);
        let w = S::polynomial_i64(Q, &[(0, 0, 1)]);
        let map = flow_map(&w, h, 6).unwrap();
        let lp = linear_part(&map, h).unwrap();
        assert_eq!((lp.eps1, lp.eps2, lp.b), (1, 1, Rational::from(2)));
    }

    #[test]
    fn morse_rotation_rejected() {
        let w = S::polynomial_i64(Q, &[(0, 0, 1)]);
        assert_eq!(
            flow_map(&w, hk(2, Sigma::Plus), 6),
            Err(MoserError::ValuationTooLow)
        );
    }

    #[test]
    fn pullback_examples() {
        let g = S::polynomial_i64(Q, &[(0, 0, 1), (1, 0, 1)]).with_order(6);
        assert_eq!(pullback_form(&g, &SeriesMap::identity(Q)).unwrap(), g);
        assert_eq!(
            pullback_form(&g, &inv_map(Q)).unwrap(),
            S::polynomial_i64(Q, &[(0, 0, 1), (1, 0, -1)]).with_order(6)
        );
        let flip = SeriesMap::linear(
            Q,
            Rational::ONE,
            Rational::ZERO,
            Rational::ZERO,
            Rational::from(-1),
        );
        let one = S::constant(Rational::ONE, Q, EXACT);
        assert_eq!(
            pullback_form(&one, &flip).unwrap(),
            S::constant(Rational::from(-1), Q, EXACT)
        );
    }

    #[test]
    fn inv_preserves_only_even_k() {
        let inv = inv_map::<Rational>(Q);
        assert!(inv.preserves(hk(4, Sigma::Plus)).unwrap());
        assert!(!inv.preserves(hk(3, Sigma::Plus)).unwrap());
        let lp = linear_part(&inv, hk(4, Sigma::Minus)).unwrap();
        assert_eq!((lp.eps1, lp.eps2, lp.b), (-1, -1, Rational::ZERO));
        let id = linear_part(&SeriesMap::identity(Q), hk(5, Sigma::Plus)).unwrap();
        assert_eq!((id.eps1, id.eps2, id.b), (1, 1, Rational::ZERO));
    }

    #[test]
    fn roundtrip_small() {
        let h = hk(4, Sigma::Plus);
        let g = S::from_terms(
            Q,
            8,
            [
                (0, 0, Rational::ONE),
                (1, 0, Rational::from(2)),
                (2, 1, Rational::from(-1)),
                (1, 2, Rational::from(3)),
            ],
        );
        assert!(
            roundtrip_invariants(&g, h, &S::zero(Q, EXACT))
                .unwrap()
                .equal
        );
        let w = S::polynomial_i64(Q, &[(1, 0, 1), (0, 2, -2)]);
        let report = roundtrip_invariants(&g, h, &w).unwrap();
        assert!(report.equal);
        assert_eq!(report.certified_order, 8);
    }
}
