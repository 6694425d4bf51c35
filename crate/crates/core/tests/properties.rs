mod common;

use ak_normal_forms::analysis::{action_compact, generalized_actions, QuadratureConfig};
use ak_normal_forms::cohomology::{solve_cohomological, ElimTable};
use ak_normal_forms::moser::{flow_map, inv_map, linear_part, pullback_form, roundtrip_with_map};
use ak_normal_forms::normalform::{
    canonicalize_sign, ch_form, ch_residual, d_f_dxi, f_form, f_series, fibration_form,
};
use ak_normal_forms::series::{
    c_decompose, c_recompose, poisson_bracket, AkHamiltonian, BigFloat, Coefficient, Rational,
    Ring, Sigma, TruncatedSeries1, TruncatedSeries2, EXACT,
};
use common::Q;
use proptest::prelude::*;

type S2 = TruncatedSeries2<Rational>;
type S1 = TruncatedSeries1<Rational>;

fn rational((num, den): (i64, u64)) -> Rational {
    Rational::from_parts(num.into(), den.into())
}

fn coeff() -> impl Strategy<Value = (i64, u64)> {
    (-6i64..=6, 1u64..=4)
}

fn series2(order: u32, max_terms: usize) -> impl Strategy<Value = S2> {
    prop::collection::vec((0..=order, 0..=order, coeff()), 0..max_terms).prop_map(move |terms| {
        S2::from_terms(
            Q,
            order,
            terms
                .into_iter()
                .filter(|&(i, j, _)| i + j <= order)
                .map(|(i, j, c)| (i, j, rational(c))),
        )
    })
}

/// Polynomial without constant term.
fn generator(degree: u32) -> impl Strategy<Value = S2> {
    prop::collection::vec((0..=degree, 0..=degree, coeff()), 1..5).prop_map(move |terms| {
        S2::from_terms(
            Q,
            EXACT,
            terms
                .into_iter()
                .filter(|&(i, j, _)| i + j >= 1 && i + j <= degree)
                .map(|(i, j, c)| (i, j, rational(c))),
        )
    })
}

fn hamiltonian() -> impl Strategy<Value = AkHamiltonian> {
    (2u32..=7, any::<bool>()).prop_map(|(k, plus)| {
        AkHamiltonian::new(k, if plus { Sigma::Plus } else { Sigma::Minus }).unwrap()
    })
}

fn reduced(k: u32, order: u32) -> impl Strategy<Value = S1> {
    (
        1i64..=4,
        any::<bool>(),
        prop::collection::vec((0..=order, coeff()), 0..8),
    )
        .prop_map(move |(c0, neg, terms)| {
            let lead = (0, Rational::from(if neg { -c0 } else { c0 }));
            let rest = terms
                .into_iter()
                .filter(|&(e, _)| e > 0 && e % k != k - 1)
                .map(|(e, c)| (e, rational(c)));
            S1::from_terms(Q, order, std::iter::once(lead).chain(rest))
        })
}

fn reduced_with_h() -> impl Strategy<Value = (AkHamiltonian, S1)> {
    hamiltonian().prop_flat_map(|h| (Just(h), reduced(h.k, 14)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(a in series2(8, 10), b in series2(8, 10), c in series2(6, 10)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) - &b, a.with_order(8));
    }

    #[test]
    fn bracket_antisymmetry_and_leibniz(a in series2(9, 8), b in series2(9, 8), c in series2(9, 8)) {
        let ab = poisson_bracket(&a, &b).unwrap();
        prop_assert_eq!(&ab, &poisson_bracket(&b, &a).unwrap().neg());
        let lhs = poisson_bracket(&a, &(&b * &c)).unwrap();
        let rhs = &(&ab * &c) + &(&b * &poisson_bracket(&a, &c).unwrap());
        let order = lhs.order().min(rhs.order());
        prop_assert_eq!(lhs.with_order(order), rhs.with_order(order));
    }

    #[test]
    fn parity_split_recombines(a in series2(12, 16)) {
        prop_assert_eq!(a.parity_split().recombine(), a);
    }

    #[test]
    fn decompose_recompose((h, c) in reduced_with_h()) {
        // Channel k-1 vanishes by reduction, which can certify one order more.
        let back = c_recompose(&c_decompose(&c, h.k).unwrap(), h.k);
        prop_assert!(back.order() >= c.order());
        prop_assert_eq!(back.with_order(c.order()), c);
    }

    #[test]
    fn inverse_series_composes_to_identity(a1 in 1i64..=5, rest in prop::collection::vec(coeff(), 0..8)) {
        let terms = std::iter::once((1, Rational::from(a1)))
            .chain(rest.into_iter().enumerate().map(|(n, c)| (n as u32 + 2, rational(c))));
        let f = S1::from_terms(Q, 10, terms);
        let g = f.invert().unwrap();
        let id = f.compose(&g).unwrap();
        prop_assert_eq!(id.clone(), S1::from_terms(Q, id.order(), [(1, Rational::ONE)]));
        prop_assert!(id.order() >= 10);
    }

    #[test]
    fn certificate_holds(h in hamiltonian(), g in series2(16, 20)) {
        let sol = solve_cohomological(&g, h).unwrap();
        prop_assert!(sol.verify(&g, h));
        prop_assert_eq!(sol.residual_order, 16);
        prop_assert!(sol.c.terms().all(|(e, _)| e % h.k != h.k - 1));
    }

    #[test]
    fn reduced_input_is_fixed((h, c) in reduced_with_h()) {
        let sol = solve_cohomological(&S2::from_univariate_x(&c), h).unwrap();
        prop_assert!(sol.u.is_zero());
        prop_assert_eq!(sol.c, c);
    }

    #[test]
    fn residual_constant_on_moser_class(h in hamiltonian(), g in series2(14, 16), w in generator(6)) {
        let moved = g.checked_add(&h.bracket(&w)).unwrap();
        let a = solve_cohomological(&g, h).unwrap();
        let b = solve_cohomological(&moved, h).unwrap();
        prop_assert_eq!(a.c, b.c);
    }

    #[test]
    fn elimination_closed_form(h in hamiltonian(), i in 0u32..12, j in 1u32..10) {
        let mut table = ElimTable::new(h);
        for (n, a) in table.chain(i, j).into_iter().enumerate() {
            prop_assert_eq!(a, ElimTable::closed_form(h.k, h.sigma, i, j, n as u32));
        }
    }

    #[test]
    fn f_form_is_structural((h, c) in reduced_with_h()) {
        let nf = f_form(&c, h).unwrap();
        let f = f_series(&nf).unwrap();
        prop_assert!(f.terms().all(|(e, _)| e % h.k != 0));
        let df = f.derivative().unwrap();
        prop_assert!(df.order() >= c.order());
        prop_assert_eq!(df.with_order(c.order()), c);
    }

    #[test]
    fn ch_form_certificate((h, c) in reduced_with_h()) {
        let (nf, _) = ch_form(&c, h).unwrap();
        prop_assert_eq!(ch_residual(&nf).unwrap(), c);
    }

    #[test]
    fn fibration_leading_is_one((h, c) in reduced_with_h()) {
        let precision = 192;
        let (nf, _) = ch_form(&c, h).unwrap();
        let (_, change) = fibration_form(&nf, precision).unwrap();
        let tol = 2f64.powi(-(precision as i32 - 16));
        let ring = Ring::big_float(precision);
        for n in 0..change.leading.order() {
            let expected = if n == 0 { BigFloat::one(ring) } else { BigFloat::zero(ring) };
            prop_assert!(change.leading.coeff(n).sub(&expected).abs().to_f64() <= tol);
        }
    }

    #[test]
    fn canonical_sign_is_orbit_invariant((h, c) in reduced_with_h()) {
        let nf = f_form(&c, h).unwrap();
        let (canon, _) = canonicalize_sign(&nf);
        let (again, flipped_again) = canonicalize_sign(&canon);
        prop_assert_eq!(&again.components, &canon.components);
        prop_assert!(!flipped_again);
        let (of_flip, _) = canonicalize_sign(&nf.apply_inv());
        prop_assert_eq!(of_flip.components, canon.components);
    }

    #[test]
    fn flows_preserve_h(h in hamiltonian().prop_filter("k >= 3", |h| h.k >= 3), w in generator(4)) {
        let map = flow_map(&w, h, 10).unwrap();
        prop_assert!(map.preserves(h).unwrap());
        let lin = linear_part(&map, h).unwrap();
        prop_assert_eq!((lin.eps1, lin.eps2), (1, 1));
    }

    #[test]
    fn pullback_is_functorial(g in series2(8, 10), w1 in generator(3), w2 in generator(3)) {
        let h = AkHamiltonian::new(4, Sigma::Plus).unwrap();
        let phi = flow_map(&w1, h, 9).unwrap();
        let psi = flow_map(&w2, h, 9).unwrap();
        let twice = pullback_form(&pullback_form(&g, &phi).unwrap(), &psi).unwrap();
        let once = pullback_form(&g, &phi.compose(&psi).unwrap()).unwrap();
        let order = twice.order().min(once.order());
        prop_assert_eq!(twice.with_order(order), once.with_order(order));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn inv_roundtrip_matches_after_canonicalizing(g in series2(10, 16)) {
        let h = AkHamiltonian::new(4, Sigma::Minus).unwrap();
        let r = roundtrip_with_map(&g, h, &inv_map(Q)).unwrap();
        prop_assert!(r.equal);
    }

    #[test]
    fn generalized_actions_constant_on_moser_class(g in series2(8, 10), w in generator(5)) {
        let h = AkHamiltonian::new(4, Sigma::Plus).unwrap();
        let moved = g.checked_add(&h.bracket(&w)).unwrap();
        let cfg = QuadratureConfig::default();
        for t in [0.02, 0.08] {
            let a = generalized_actions(&g, 4, t, &cfg).unwrap();
            let b = generalized_actions(&moved, 4, t, &cfg).unwrap();
            let scale = a.iter().chain(&b).fold(1e-3f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-7 * scale, "h={}: {} vs {}", t, x, y);
            }
        }
    }

    #[test]
    fn action_matches_primitive_form((c0, g) in (1i64..=3, series2(12, 10))) {
        // Give g a nonzero constant so the area form is symplectic.
        let g = g.checked_add(&S2::constant(Rational::from(c0), Q, EXACT)).unwrap();
        let h = AkHamiltonian::new(4, Sigma::Plus).unwrap();
        let nf = f_form(&solve_cohomological(&g, h).unwrap().c, h).unwrap();
        let df = d_f_dxi(&f_series(&nf).unwrap()).unwrap();
        let cfg = QuadratureConfig::default();
        let level = 1e-3;
        let a = action_compact(|x, xi| g.eval_f64(x, xi), 4, level, &cfg).unwrap();
        // d(f dxi) = -f' dxi ^ dx: the primitive form carries the opposite orientation.
        let b = -action_compact(|x, xi| df.eval_f64(x, xi), 4, level, &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * a.abs(), "{} vs {}", a, b);
    }
}
