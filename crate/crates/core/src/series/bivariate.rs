use std::collections::BTreeMap;
use std::fmt;

use super::ring::{Coefficient, Rational, Ring};
use super::{check_ring, order_minus, order_plus, SeriesError, TruncatedSeries1, EXACT};

/// Truncated power series in `(x, xi)`, graded by total degree.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries2<C> {
    coeffs: BTreeMap<(u32, u32), C>,
    order: u32,
    ring: Ring,
}

fn within(i: u32, j: u32, order: u32) -> bool {
    i as u64 + j as u64 <= order as u64
}

impl<C: Coefficient> TruncatedSeries2<C> {
    pub fn zero(ring: Ring, order: u32) -> Self {
        assert!(
            C::accepts(ring),
            "coefficient type cannot live in ring {ring}"
        );
        TruncatedSeries2 {
            coeffs: BTreeMap::new(),
            order,
            ring,
        }
    }

    pub fn constant(value: C, ring: Ring, order: u32) -> Self {
        Self::monomial(ring, order, 0, 0, value)
    }

    pub fn monomial(ring: Ring, order: u32, i: u32, j: u32, value: C) -> Self {
        let mut s = Self::zero(ring, order);
        s.accumulate(i, j, &value);
        s
    }

    pub fn x(ring: Ring, order: u32) -> Self {
        Self::monomial(ring, order, 1, 0, C::one(ring))
    }

    pub fn xi(ring: Ring, order: u32) -> Self {
        Self::monomial(ring, order, 0, 1, C::one(ring))
    }

    pub fn from_terms<I>(ring: Ring, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, C)>,
    {
        let mut s = Self::zero(ring, order);
        for (i, j, c) in terms {
            s.accumulate(i, j, &c);
        }
        s
    }

    pub fn from_rationals<I>(ring: Ring, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, Rational)>,
    {
        Self::from_terms(
            ring,
            order,
            terms
                .into_iter()
                .map(|(i, j, q)| (i, j, C::from_rational(&q, ring))),
        )
    }

    /// Exact polynomial from integer coefficients `(i, j, c)` of `x^i xi^j`.
    pub fn polynomial_i64(ring: Ring, terms: &[(u32, u32, i64)]) -> Self {
        Self::from_terms(
            ring,
            EXACT,
            terms.iter().map(|&(i, j, c)| (i, j, C::from_i64(c, ring))),
        )
    }

    /// Embed a series in `x` alone.
    pub fn from_univariate_x(s: &TruncatedSeries1<C>) -> Self {
        Self::from_terms(
            s.ring(),
            s.order(),
            s.terms().map(|(e, c)| (e, 0, c.clone())),
        )
    }

    /// The `x`-only part as a univariate series, if no `xi` appears.
    pub fn to_univariate_x(&self) -> Option<TruncatedSeries1<C>> {
        if self.coeffs.keys().any(|&(_, j)| j > 0) {
            return None;
        }
        Some(TruncatedSeries1::from_terms(
            self.ring,
            self.order,
            self.terms().map(|(i, _, c)| (i, c.clone())),
        ))
    }

    pub(crate) fn accumulate(&mut self, i: u32, j: u32, c: &C) {
        if !within(i, j, self.order) || c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&(i, j)) {
            Some(old) => {
                let next = old.add(c);
                if next.is_zero() {
                    self.coeffs.remove(&(i, j));
                } else {
                    *old = next;
                }
            }
            None => {
                self.coeffs.insert((i, j), c.clone());
            }
        }
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

    pub fn coeff(&self, i: u32, j: u32) -> C {
        self.coeffs
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| C::zero(self.ring))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &C)> + '_ {
        self.coeffs.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest total degree present.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(i, j)| i + j).min()
    }

    /// Highest total degree present.
    pub fn total_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(i, j)| i + j).max()
    }

    pub fn with_order(&self, order: u32) -> Self {
        let order = order.min(self.order);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&(i, j), _)| within(i, j, order))
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        TruncatedSeries2 {
            coeffs,
            order,
            ring: self.ring,
        }
    }

    /// Reinterpret the stored terms as an exact polynomial.
    pub fn as_polynomial(&self) -> Self {
        TruncatedSeries2 {
            coeffs: self.coeffs.clone(),
            order: EXACT,
            ring: self.ring,
        }
    }

    pub fn map_ring<D: Coefficient>(&self, ring: Ring, f: impl Fn(&C) -> D) -> TruncatedSeries2<D> {
        TruncatedSeries2::from_terms(ring, self.order, self.terms().map(|(i, j, c)| (i, j, f(c))))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        check_ring(self.ring, other.ring)?;
        let mut out = self.with_order(other.order);
        for (i, j, c) in other.terms() {
            out.accumulate(i, j, c);
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

    pub(crate) fn mul_to(&self, other: &Self, order: u32) -> Self {
        let mut out = Self::zero(self.ring, order);
        for (i1, j1, c1) in self.terms() {
            for (i2, j2, c2) in other.terms() {
                let (i, j) = (i1 + i2, j1 + j2);
                if within(i, j, order) {
                    out.accumulate(i, j, &c1.mul(c2));
                }
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries2 {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.neg())).collect(),
            order: self.order,
            ring: self.ring,
        }
    }

    pub fn scale(&self, factor: &C) -> Self {
        Self::from_terms(
            self.ring,
            self.order,
            self.terms().map(|(i, j, c)| (i, j, c.mul(factor))),
        )
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(C::one(self.ring), self.ring, self.order);
        for _ in 0..n {
            acc = acc.mul_to(self, self.order);
        }
        acc
    }

    pub fn derivative_x(&self) -> Result<Self, SeriesError> {
        let order = order_minus(self.order, 1)?;
        Ok(self.raw_derivative_x(order))
    }

    pub fn derivative_xi(&self) -> Result<Self, SeriesError> {
        let order = order_minus(self.order, 1)?;
        Ok(self.raw_derivative_xi(order))
    }

    pub(crate) fn raw_derivative_x(&self, order: u32) -> Self {
        Self::from_terms(
            self.ring,
            order,
            self.terms()
                .filter(|(i, _, _)| *i > 0)
                .map(|(i, j, c)| (i - 1, j, c.mul(&C::from_i64(i as i64, self.ring)))),
        )
    }

    pub(crate) fn raw_derivative_xi(&self, order: u32) -> Self {
        Self::from_terms(
            self.ring,
            order,
            self.terms()
                .filter(|(_, j, _)| *j > 0)
                .map(|(i, j, c)| (i, j - 1, c.mul(&C::from_i64(j as i64, self.ring)))),
        )
    }

    /// Antiderivative in `x` vanishing on `x = 0`.
    pub fn antiderivative_x(&self) -> Self {
        Self::from_terms(
            self.ring,
            order_plus(self.order, 1),
            self.terms()
                .map(|(i, j, c)| (i + 1, j, c.mul(&reciprocal_int(i + 1, self.ring)))),
        )
    }

    /// Antiderivative in `xi` vanishing on `xi = 0`.
    pub fn antiderivative_xi(&self) -> Self {
        Self::from_terms(
            self.ring,
            order_plus(self.order, 1),
            self.terms()
                .map(|(i, j, c)| (i, j + 1, c.mul(&reciprocal_int(j + 1, self.ring)))),
        )
    }

    /// `{self, other}` with the convention `a_x b_xi - a_xi b_x`.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self, SeriesError> {
        poisson_bracket(self, other)
    }

    /// `self(x_sub, xi_sub)`.
    pub fn substitute(&self, x_sub: &Self, xi_sub: &Self) -> Result<Self, SeriesError> {
        check_ring(self.ring, x_sub.ring)?;
        check_ring(self.ring, xi_sub.ring)?;
        let has_constant = !x_sub.coeff(0, 0).is_zero() || !xi_sub.coeff(0, 0).is_zero();
        let order = if has_constant {
            if !self.is_exact() {
                return Err(SeriesError::NonzeroConstantInner);
            }
            x_sub.order.min(xi_sub.order)
        } else {
            self.order.min(x_sub.order).min(xi_sub.order)
        };
        let x_sub = x_sub.with_order(order);
        let xi_sub = xi_sub.with_order(order);
        // Horner in xi for each power of x, then Horner in x.
        let mut rows: BTreeMap<u32, Vec<(u32, &C)>> = BTreeMap::new();
        for (i, j, c) in self.terms() {
            rows.entry(i).or_default().push((j, c));
        }
        let Some(&top_i) = rows.keys().next_back() else {
            return Ok(Self::zero(self.ring, order));
        };
        let mut acc = Self::zero(self.ring, order);
        for i in (0..=top_i).rev() {
            acc = acc.mul_to(&x_sub, order);
            if let Some(row) = rows.get(&i) {
                let top_j = row.iter().map(|(j, _)| *j).max().unwrap_or(0);
                let mut inner = Self::zero(self.ring, order);
                let mut cursor = row.iter().rev().peekable();
                for j in (0..=top_j).rev() {
                    inner = inner.mul_to(&xi_sub, order);
                    if let Some(&&(jj, c)) = cursor.peek() {
                        if jj == j {
                            inner.accumulate(0, 0, c);
                            cursor.next();
                        }
                    }
                }
                acc = acc.checked_add(&inner)?;
            }
        }
        Ok(acc)
    }

    /// Whether only even powers of `xi` occur.
    pub fn is_even_in_xi(&self) -> bool {
        self.coeffs.keys().all(|&(_, j)| j % 2 == 0)
    }

    /// Write `self = g0(x, xi^2) + xi g1(x, xi^2)`.
    pub fn parity_split(&self) -> ParitySplit<C> {
        let mut even = Self::zero(self.ring, EXACT);
        let mut odd = Self::zero(self.ring, EXACT);
        for (i, j, c) in self.terms() {
            if j % 2 == 0 {
                even.accumulate(i, j / 2, c);
            } else {
                odd.accumulate(i, j / 2, c);
            }
        }
        ParitySplit {
            even,
            odd,
            order: self.order,
        }
    }

    pub fn eval_f64(&self, x: f64, xi: f64) -> f64 {
        self.terms()
            .map(|(i, j, c)| c.to_f64() * x.powi(i as i32) * xi.powi(j as i32))
            .sum()
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.terms()
            .map(|(_, _, c)| c.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

fn reciprocal_int<C: Coefficient>(n: u32, ring: Ring) -> C {
    C::from_rational(&(Rational::ONE / Rational::from(n)), ring)
}

/// `{a, b} = a_x b_xi - a_xi b_x`; the order drops by one.
pub fn poisson_bracket<C: Coefficient>(
    a: &TruncatedSeries2<C>,
    b: &TruncatedSeries2<C>,
) -> Result<TruncatedSeries2<C>, SeriesError> {
    check_ring(a.ring, b.ring)?;
    let order = order_minus(a.order.min(b.order), 1)?;
    let ax = a.raw_derivative_x(order);
    let axi = a.raw_derivative_xi(order);
    let bx = b.raw_derivative_x(order);
    let bxi = b.raw_derivative_xi(order);
    ax.mul_to(&bxi, order).checked_sub(&axi.mul_to(&bx, order))
}

/// Even/odd decomposition in `xi`; both parts are polynomials in
/// `(x, eta)` with `eta = xi^2`, and `order` is the order of the source in
/// the original grading.
#[derive(Clone, Debug, PartialEq)]
pub struct ParitySplit<C> {
    pub even: TruncatedSeries2<C>,
    pub odd: TruncatedSeries2<C>,
    pub order: u32,
}

impl<C: Coefficient> ParitySplit<C> {
    /// `even(x, xi^2) + xi odd(x, xi^2)`.
    pub fn recombine(&self) -> TruncatedSeries2<C> {
        let ring = self.even.ring();
        let mut out = TruncatedSeries2::zero(ring, self.order);
        for (i, j, c) in self.even.terms() {
            out.accumulate(i, 2 * j, c);
        }
        for (i, j, c) in self.odd.terms() {
            out.accumulate(i, 2 * j + 1, c);
        }
        out
    }
}

impl<C: Coefficient> fmt::Display for TruncatedSeries2<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")?;
        }
        for (n, (i, j, c)) in self.terms().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => write!(f, "*x")?,
                _ => write!(f, "*x^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "*xi")?,
                _ => write!(f, "*xi^{j}")?,
            }
        }
        if !self.is_exact() {
            write!(f, " + O({})", self.order + 1)?;
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<C: Coefficient> std::ops::$trait<&TruncatedSeries2<C>> for &TruncatedSeries2<C> {
            type Output = TruncatedSeries2<C>;
            fn $method(self, rhs: &TruncatedSeries2<C>) -> TruncatedSeries2<C> {
                self.$checked(rhs).expect("ring mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

#[cfg(test)]
mod tests {
    use super::*;

    type S = TruncatedSeries2<Rational>;
    const Q: Ring = Ring::Rational;

    fn poly(terms: &[(u32, u32, i64)]) -> S {
        S::polynomial_i64(Q, terms)
    }

    #[test]
    fn bracket_of_coordinates() {
        let x = S::x(Q, EXACT);
        let xi = S::xi(Q, EXACT);
        assert_eq!(x.poisson_bracket(&xi).unwrap(), poly(&[(0, 0, 1)]));
        assert_eq!(xi.poisson_bracket(&x).unwrap(), poly(&[(0, 0, -1)]));
    }

    #[test]
    fn bracket_drops_order() {
        let a = S::x(Q, 5);
        let b = poly(&[(0, 2, 1)]);
        let br = a.poisson_bracket(&b).unwrap();
        assert_eq!(br.order(), 4);
        assert_eq!(br, S::monomial(Q, 4, 0, 1, Rational::from(2)));
        let c = S::zero(Q, 0);
        assert_eq!(c.poisson_bracket(&b), Err(SeriesError::OrderUnderflow));
    }

    #[test]
    fn substitution_matches_expansion() {
        // g = x^2 xi, x -> x + xi, xi -> 2 xi.
        let g = poly(&[(2, 1, 1)]);
        let out = g
            .substitute(&poly(&[(1, 0, 1), (0, 1, 1)]), &poly(&[(0, 1, 2)]))
            .unwrap();
        assert_eq!(out, poly(&[(2, 1, 2), (1, 2, 4), (0, 3, 2)]));
    }

    #[test]
    fn substitution_truncates() {
        let g = S::from_terms(Q, 4, [(1, 0, Rational::ONE), (2, 2, Rational::ONE)]);
        let out = g
            .substitute(&poly(&[(1, 0, 1), (2, 0, 1)]), &S::xi(Q, EXACT))
            .unwrap();
        assert_eq!(out.order(), 4);
        assert_eq!(out.coeff(2, 0), Rational::ONE);
        assert_eq!(out.coeff(2, 2), Rational::ONE);
        assert_eq!(out.coeff(3, 2), Rational::ZERO);
    }

    #[test]
    fn parity_round_trip() {
        let g = S::from_terms(
            Q,
            6,
            [
                (1, 0, Rational::ONE),
                (0, 3, Rational::from(2)),
                (2, 4, Rational::from(-1)),
            ],
        );
        let split = g.parity_split();
        assert_eq!(split.even.coeff(2, 2), Rational::from(-1));
        assert_eq!(split.odd.coeff(0, 1), Rational::from(2));
        assert_eq!(split.recombine(), g);
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let g = poly(&[(3, 1, 2), (0, 4, 5)]);
        assert_eq!(g.antiderivative_x().derivative_x().unwrap(), g);
        assert_eq!(g.antiderivative_xi().derivative_xi().unwrap(), g);
    }
}
