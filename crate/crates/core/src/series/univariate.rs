use std::collections::BTreeMap;
use std::fmt;

use super::ring::{Coefficient, Rational, Ring};
use super::{
    check_ring, general_binomial, order_minus, order_plus, SeriesError, TruncatedSeries2, EXACT,
};

/// Truncated power series in one variable.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries1<C> {
    coeffs: BTreeMap<u32, C>,
    order: u32,
    ring: Ring,
}

impl<C: Coefficient> TruncatedSeries1<C> {
    pub fn zero(ring: Ring, order: u32) -> Self {
        assert!(
            C::accepts(ring),
            "coefficient type cannot live in ring {ring}"
        );
        TruncatedSeries1 {
            coeffs: BTreeMap::new(),
            order,
            ring,
        }
    }

    pub fn constant(value: C, ring: Ring, order: u32) -> Self {
        let mut s = Self::zero(ring, order);
        s.insert(0, value);
        s
    }

    /// The variable `t` itself.
    pub fn variable(ring: Ring, order: u32) -> Self {
        let mut s = Self::zero(ring, order);
        s.insert(1, C::one(ring));
        s
    }

    pub fn from_terms<I>(ring: Ring, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, C)>,
    {
        let mut s = Self::zero(ring, order);
        for (e, c) in terms {
            s.accumulate(e, &c);
        }
        s
    }

    /// Build from rational coefficients, converting into `ring`.
    pub fn from_rationals<I>(ring: Ring, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, Rational)>,
    {
        Self::from_terms(
            ring,
            order,
            terms
                .into_iter()
                .map(|(e, q)| (e, C::from_rational(&q, ring))),
        )
    }

    /// Exact polynomial from integer coefficients.
    pub fn polynomial_i64(ring: Ring, terms: &[(u32, i64)]) -> Self {
        Self::from_terms(
            ring,
            EXACT,
            terms.iter().map(|&(e, c)| (e, C::from_i64(c, ring))),
        )
    }

    fn insert(&mut self, e: u32, c: C) {
        if e > self.order || c.is_zero() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, c);
        }
    }

    fn accumulate(&mut self, e: u32, c: &C) {
        if e > self.order || c.is_zero() {
            return;
        }
        let next = match self.coeffs.get(&e) {
            Some(old) => old.add(c),
            None => c.clone(),
        };
        self.insert(e, next);
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn is_exact(&self) -> bool {
        self.order == EXACT
    }

    pub fn coeff(&self, e: u32) -> C {
        self.coeffs
            .get(&e)
            .cloned()
            .unwrap_or_else(|| C::zero(self.ring))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &C)> + '_ {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent present.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Truncate to `min(order, self.order)`.
    pub fn with_order(&self, order: u32) -> Self {
        let order = order.min(self.order);
        let coeffs = self
            .coeffs
            .range(..=order)
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        TruncatedSeries1 {
            coeffs,
            order,
            ring: self.ring,
        }
    }

    /// Reinterpret the stored terms as an exact polynomial.
    pub fn as_polynomial(&self) -> Self {
        TruncatedSeries1 {
            coeffs: self.coeffs.clone(),
            order: EXACT,
            ring: self.ring,
        }
    }

    pub fn map_ring<D: Coefficient>(&self, ring: Ring, f: impl Fn(&C) -> D) -> TruncatedSeries1<D> {
        TruncatedSeries1::from_terms(ring, self.order, self.terms().map(|(e, c)| (e, f(c))))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        check_ring(self.ring, other.ring)?;
        let mut out = self.with_order(other.order);
        for (e, c) in other.terms() {
            out.accumulate(e, c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        check_ring(self.ring, other.ring)?;
        Ok(self.mul_to(other, self.order.min(other.order)))
    }

    fn mul_to(&self, other: &Self, order: u32) -> Self {
        let mut out = Self::zero(self.ring, order);
        for (e1, c1) in self.terms() {
            if e1 > order {
                break;
            }
            for (e2, c2) in other.terms() {
                let e = e1 as u64 + e2 as u64;
                if e > order as u64 {
                    break;
                }
                out.accumulate(e as u32, &c1.mul(c2));
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries1 {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c.neg())).collect(),
            order: self.order,
            ring: self.ring,
        }
    }

    pub fn scale(&self, factor: &C) -> Self {
        Self::from_terms(
            self.ring,
            self.order,
            self.terms().map(|(e, c)| (e, c.mul(factor))),
        )
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(C::one(self.ring), self.ring, self.order);
        for _ in 0..n {
            acc = acc.mul_to(self, self.order);
        }
        acc
    }

    pub fn derivative(&self) -> Result<Self, SeriesError> {
        let order = order_minus(self.order, 1)?;
        Ok(Self::from_terms(
            self.ring,
            order,
            self.terms()
                .filter(|(e, _)| *e > 0)
                .map(|(e, c)| (e - 1, c.mul(&C::from_i64(e as i64, self.ring)))),
        ))
    }

    /// Antiderivative vanishing at zero; the order rises by one.
    pub fn antiderivative(&self) -> Self {
        Self::from_terms(
            self.ring,
            order_plus(self.order, 1),
            self.terms().map(|(e, c)| {
                let inv = Rational::ONE / Rational::from(e + 1);
                (e + 1, c.mul(&C::from_rational(&inv, self.ring)))
            }),
        )
    }

    /// Multiply by `t^m`.
    pub fn shift_up(&self, m: u32) -> Self {
        Self::from_terms(
            self.ring,
            order_plus(self.order, m),
            self.terms().map(|(e, c)| (e + m, c.clone())),
        )
    }

    /// Divide by `t^m`; every exponent must be at least `m`.
    pub fn shift_down(&self, m: u32) -> Result<Self, SeriesError> {
        if self.valuation().is_some_and(|v| v < m) {
            return Err(SeriesError::NotInvertible(format!(
                "series is not divisible by t^{m}"
            )));
        }
        let order = order_minus(self.order, m)?;
        Ok(Self::from_terms(
            self.ring,
            order,
            self.terms().map(|(e, c)| (e - m, c.clone())),
        ))
    }

    /// `self(inner(t))`.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        check_ring(self.ring, inner.ring)?;
        let order = self.composition_order(inner.order, !inner.coeff(0).is_zero())?;
        let inner = inner.with_order(order);
        let mut acc = Self::zero(self.ring, order);
        let Some(top) = self.degree() else {
            return Ok(acc);
        };
        for e in (0..=top).rev() {
            acc = acc.mul_to(&inner, order);
            acc.accumulate(e, &C::zero(self.ring));
            if let Some(c) = self.coeffs.get(&e) {
                acc.accumulate(0, c);
            }
        }
        Ok(acc)
    }

    fn composition_order(
        &self,
        inner_order: u32,
        inner_has_constant: bool,
    ) -> Result<u32, SeriesError> {
        if inner_has_constant {
            if !self.is_exact() {
                return Err(SeriesError::NonzeroConstantInner);
            }
            Ok(inner_order)
        } else {
            Ok(self.order.min(inner_order))
        }
    }

    /// `self(inner(x, xi))`: substitute a bivariate series.
    pub fn compose2(
        &self,
        inner: &TruncatedSeries2<C>,
    ) -> Result<TruncatedSeries2<C>, SeriesError> {
        check_ring(self.ring, inner.ring())?;
        let order = self.composition_order(inner.order(), !inner.coeff(0, 0).is_zero())?;
        let inner = inner.with_order(order);
        let mut acc = TruncatedSeries2::zero(self.ring, order);
        let Some(top) = self.degree() else {
            return Ok(acc);
        };
        for e in (0..=top).rev() {
            acc = acc.checked_mul(&inner)?;
            if let Some(c) = self.coeffs.get(&e) {
                acc = acc.checked_add(&TruncatedSeries2::constant(c.clone(), self.ring, order))?;
            }
        }
        Ok(acc)
    }

    /// Compositional inverse `g` with `self(g(t)) = t`, to `self.order`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        if self.is_exact() {
            return Err(SeriesError::NotInvertible(
                "exact polynomial: use invert_to".into(),
            ));
        }
        self.invert_to(self.order)
    }

    pub fn invert_to(&self, order: u32) -> Result<Self, SeriesError> {
        let order = order.min(self.order);
        if !self.coeff(0).is_zero() {
            return Err(SeriesError::NotInvertible("f(0) != 0".into()));
        }
        let slope_inv = self
            .coeff(1)
            .inv()
            .ok_or_else(|| SeriesError::NotInvertible("f'(0) = 0".into()))?;
        let f = self.with_order(order);
        let mut g = Self::zero(self.ring, order);
        if order >= 1 {
            g.insert(1, slope_inv.clone());
        }
        // Each pass fixes the next coefficient: [t^n] f(g) = a1 g_n + (known).
        for n in 2..=order {
            let trial = f.compose(&g.with_order(n))?;
            let residue = trial.coeff(n);
            g.insert(n, residue.mul(&slope_inv).neg());
        }
        Ok(g)
    }

    /// `1 / self`; the constant term must be invertible.
    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let c0_inv = self
            .coeff(0)
            .inv()
            .ok_or_else(|| SeriesError::NotInvertible("zero constant term".into()))?;
        if self.is_exact() && self.len() > 1 {
            return Err(SeriesError::NotInvertible(
                "reciprocal of a polynomial needs an order".into(),
            ));
        }
        let order = self.order;
        // u = 1 - c0^{-1} self, so 1/self = c0^{-1} * sum u^n.
        let normalized = self.scale(&c0_inv);
        let mut u = normalized.neg();
        u.accumulate(0, &C::one(self.ring));
        let mut acc = Self::constant(C::one(self.ring), self.ring, order);
        let mut power = acc.clone();
        for _ in 0..order.min(4096) {
            power = power.mul_to(&u, order);
            if power.is_zero() {
                break;
            }
            acc = acc.checked_add(&power)?;
        }
        Ok(acc.scale(&c0_inv))
    }

    /// `self^p` for a unit series (constant term exactly one), by the
    /// binomial expansion.
    pub fn unit_power(&self, p: &Rational) -> Result<Self, SeriesError> {
        if self.coeff(0) != C::one(self.ring) {
            return Err(SeriesError::NotInvertible(
                "unit_power needs constant term 1".into(),
            ));
        }
        if self.is_exact() && self.len() > 1 {
            return Err(SeriesError::NotInvertible(
                "power of a polynomial needs an order".into(),
            ));
        }
        let order = self.order;
        let mut u = self.clone();
        u.insert(0, C::zero(self.ring));
        let mut acc = Self::constant(C::one(self.ring), self.ring, order);
        let mut power = acc.clone();
        let mut n = 0;
        loop {
            n += 1;
            power = power.mul_to(&u, order);
            if power.is_zero() {
                break;
            }
            let c = C::from_rational(&general_binomial(p, n), self.ring);
            acc = acc.checked_add(&power.scale(&c))?;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        // Horner over the dense range.
        let Some(top) = self.degree() else {
            return 0.0;
        };
        let mut acc = 0.0;
        for e in (0..=top).rev() {
            acc = acc * t + self.coeffs.get(&e).map_or(0.0, |c| c.to_f64());
        }
        acc
    }

    /// Largest `|coefficient|` as f64.
    pub fn max_abs_f64(&self) -> f64 {
        self.terms()
            .map(|(_, c)| c.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

impl<C: Coefficient> fmt::Display for TruncatedSeries1<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")?;
        }
        for (n, (e, c)) in self.terms().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*t")?,
                _ => write!(f, "({c})*t^{e}")?,
            }
        }
        if !self.is_exact() {
            write!(f, " + O(t^{})", self.order + 1)?;
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<C: Coefficient> std::ops::$trait<&TruncatedSeries1<C>> for &TruncatedSeries1<C> {
            type Output = TruncatedSeries1<C>;
            fn $method(self, rhs: &TruncatedSeries1<C>) -> TruncatedSeries1<C> {
                self.$checked(rhs).expect("ring mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

/// Order of channel `i` (exponents `i + k n`) of a series known to `order`.
pub(crate) fn channel_order(order: u32, k: u32, i: u32) -> Result<u32, SeriesError> {
    if order == EXACT {
        Ok(EXACT)
    } else if order < i {
        Err(SeriesError::OrderUnderflow)
    } else {
        Ok((order - i) / k)
    }
}

/// Split `s(x) = sum_{i in channels} x^i s_i(x^k)`; terms outside the listed
/// channels must be absent.
pub(crate) fn split_channels<C: Coefficient>(
    s: &TruncatedSeries1<C>,
    k: u32,
    channels: std::ops::Range<u32>,
) -> Result<Vec<TruncatedSeries1<C>>, SeriesError> {
    let mut parts = channels
        .clone()
        .map(|i| {
            Ok(TruncatedSeries1::zero(
                s.ring(),
                channel_order(s.order(), k, i)?,
            ))
        })
        .collect::<Result<Vec<_>, SeriesError>>()?;
    for (e, c) in s.terms() {
        let i = e % k;
        if !channels.contains(&i) {
            return Err(SeriesError::NotReduced { exponent: e, k });
        }
        parts[(i - channels.start) as usize].accumulate(e / k, c);
    }
    Ok(parts)
}

/// Inverse of [`split_channels`].
pub(crate) fn join_channels<C: Coefficient>(
    parts: &[TruncatedSeries1<C>],
    k: u32,
    first_channel: u32,
    ring: Ring,
) -> TruncatedSeries1<C> {
    // Unknown terms of channel i start at x^{i + k(M_i + 1)}; the channel
    // k-1 (absent from the list) is exactly zero.
    let order = parts
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let i = first_channel + n as u32;
            if p.is_exact() {
                EXACT
            } else {
                (i as u64 + k as u64 * (p.order() as u64 + 1) - 1).min(EXACT as u64 - 1) as u32
            }
        })
        .min()
        .unwrap_or(EXACT);
    let mut out = TruncatedSeries1::zero(ring, order);
    for (n, p) in parts.iter().enumerate() {
        let i = first_channel + n as u32;
        for (e, c) in p.terms() {
            out.accumulate(i + k * e, c);
        }
    }
    out
}

/// Decompose a reduced residual `c(x) = sum_{i=0}^{k-2} x^i c_i(x^k)`.
pub fn c_decompose<C: Coefficient>(
    c: &TruncatedSeries1<C>,
    k: u32,
) -> Result<Vec<TruncatedSeries1<C>>, SeriesError> {
    split_channels(c, k, 0..k - 1)
}

/// Rebuild `sum_i x^i c_i(x^k)` from the components of [`c_decompose`].
pub fn c_recompose<C: Coefficient>(parts: &[TruncatedSeries1<C>], k: u32) -> TruncatedSeries1<C> {
    let ring = parts.first().map_or(Ring::Rational, |p| p.ring());
    join_channels(parts, k, 0, ring)
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = TruncatedSeries1<Rational>;
    const Q: Ring = Ring::Rational;

    fn q(n: i64, d: u64) -> Rational {
        Rational::from_parts(n.into(), d.into())
    }

    fn series(order: u32, terms: &[(u32, i64)]) -> S {
        S::from_terms(Q, order, terms.iter().map(|&(e, c)| (e, Rational::from(c))))
    }

    #[test]
    fn invert_identity_and_scaling() {
        let t = S::variable(Q, 6);
        assert_eq!(t.invert().unwrap(), t);
        let two_t = series(6, &[(1, 2)]);
        assert_eq!(
            two_t.invert().unwrap(),
            S::from_rationals(Q, 6, [(1, q(1, 2))])
        );
    }

    #[test]
    fn invert_x_plus_x_squared() {
        // Catalan numbers with alternating sign, computed independently by
        // fixed-point iteration g <- t - g^2.
        let f = series(8, &[(1, 1), (2, 1)]);
        let mut oracle = S::zero(Q, 8);
        let t = S::variable(Q, 8);
        for _ in 0..10 {
            oracle = &t - &(&oracle * &oracle);
        }
        let g = f.invert().unwrap();
        assert_eq!(g, oracle);
        assert_eq!(g.coeff(2), Rational::from(-1));
        assert_eq!(g.coeff(3), Rational::from(2));
        assert_eq!(g.coeff(4), Rational::from(-5));
        assert_eq!(f.compose(&g).unwrap(), t);
    }

    #[test]
    fn invert_rejects_flat_slope() {
        let f = series(5, &[(2, 1)]);
        assert!(matches!(f.invert(), Err(SeriesError::NotInvertible(_))));
    }

    #[test]
    fn compose_geometric() {
        // t/(1-t) truncated, composed with x.
        let geo = series(6, &[(1, 1), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1)]);
        let x = TruncatedSeries2::<Rational>::x(Q, 6);
        let out = geo.compose2(&x).unwrap();
        for e in 1..=6 {
            assert_eq!(out.coeff(e, 0), Rational::ONE);
        }
    }

    #[test]
    fn compose_needs_exact_outer_for_constant_inner() {
        let outer = series(4, &[(1, 1)]);
        let inner = series(4, &[(0, 1), (1, 1)]);
        assert_eq!(
            outer.compose(&inner),
            Err(SeriesError::NonzeroConstantInner)
        );
        let poly = S::polynomial_i64(Q, &[(0, 1), (1, 1)]);
        let one_plus = poly.compose(&inner).unwrap();
        assert_eq!(one_plus, series(4, &[(0, 2), (1, 1)]));
    }

    #[test]
    fn reciprocal_and_unit_power() {
        let f = series(6, &[(0, 1), (1, 1)]);
        let r = f.reciprocal().unwrap();
        assert_eq!(&f * &r, S::constant(Rational::ONE, Q, 6));
        let root = f.unit_power(&q(1, 2)).unwrap();
        assert_eq!(&root * &root, f);
        let cube = f.unit_power(&Rational::from(3)).unwrap();
        assert_eq!(cube, series(6, &[(0, 1), (1, 3), (2, 3), (3, 1)]));
    }

    #[test]
    fn derivative_underflow() {
        let c = series(0, &[(0, 3)]);
        assert_eq!(c.derivative(), Err(SeriesError::OrderUnderflow));
        let x3 = series(5, &[(3, 1)]);
        assert_eq!(x3.antiderivative(), S::from_rationals(Q, 6, [(4, q(1, 4))]));
    }

    #[test]
    fn decompose_examples() {
        let one = series(12, &[(0, 1)]);
        let parts = c_decompose(&one, 4).unwrap();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0].coeff(0), Rational::ONE);
        assert!(parts[1].is_zero() && parts[2].is_zero());

        let two_x4 = series(12, &[(4, 2)]);
        let parts = c_decompose(&two_x4, 4).unwrap();
        assert_eq!(parts[0], series(3, &[(1, 2)]));

        let x3 = series(12, &[(3, 1)]);
        assert_eq!(
            c_decompose(&x3, 4),
            Err(SeriesError::NotReduced { exponent: 3, k: 4 })
        );
    }

    #[test]
    fn recompose_inverts_decompose() {
        let c = series(13, &[(0, 1), (1, -2), (2, 5), (4, 7), (9, 1), (13, 3)]);
        let parts = c_decompose(&c, 4).unwrap();
        let back = c_recompose(&parts, 4);
        assert_eq!(back.with_order(13), c);
    }
}
