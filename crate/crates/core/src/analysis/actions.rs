use std::cell::RefCell;
use std::f64::consts::FRAC_PI_2;

use serde::Serialize;
use statrs::function::beta::beta;

use super::quadrature::{integrate, Tolerance};
use super::{AnalysisError, QuadratureConfig};
use crate::cohomology::solve_cohomological;
use crate::series::{
    c_decompose, AkHamiltonian, Coefficient, Sigma, TruncatedSeries1, TruncatedSeries2,
};

/// Runs an outer integral whose integrand may fail; the first inner error
/// wins over the outer result.
struct Nested {
    error: RefCell<Option<AnalysisError>>,
}

impl Nested {
    fn new() -> Self {
        Nested {
            error: RefCell::new(None),
        }
    }

    fn inner<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64, tol: Tolerance) -> f64 {
        match integrate(f, a, b, tol) {
            Ok(r) => r.value,
            Err(e) => {
                self.error.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn finish(self, outer: Result<f64, AnalysisError>) -> Result<f64, AnalysisError> {
        match self.error.into_inner() {
            Some(e) => Err(e),
            None => outer,
        }
    }
}

/// `int_{xi^2 + x^k <= h} g dx dxi` for even `k`, with the outer variable
/// `xi = sqrt(h) sin(theta)`.
pub fn action_compact<G: Fn(f64, f64) -> f64>(
    g: G,
    k: u32,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, AnalysisError> {
    if k < 2 || k % 2 == 1 {
        return Err(AnalysisError::InvalidInput(format!(
            "compact action needs even k, got {k}"
        )));
    }
    if !(h > 0.0) {
        return Err(AnalysisError::InvalidInput(format!(
            "compact action needs h > 0, got {h}"
        )));
    }
    let root = h.sqrt();
    let nested = Nested::new();
    let outer = integrate(
        |theta: f64| {
            let (s, c) = theta.sin_cos();
            let xi = root * s;
            let half_width = (h * c * c).powf(1.0 / k as f64);
            root * c * nested.inner(|x| g(x, xi), -half_width, half_width, cfg.inner_tolerance())
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        cfg.tolerance(),
    )
    .map(|r| r.value);
    nested.finish(outer)
}

/// Integral of `g` over `{|xi| <= epsilon, 0 <= x <= (xi^2 - h)^{1/k}}` for
/// `-h_max <= h <= 0`.
pub fn action_noncompact<G: Fn(f64, f64) -> f64>(
    g: G,
    k: u32,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, AnalysisError> {
    cfg.validate()?;
    if k < 2 {
        return Err(AnalysisError::InvalidInput(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if !(h <= 0.0 && h >= -cfg.h_max) {
        return Err(AnalysisError::InvalidInput(format!(
            "h = {h} outside [-{}, 0]",
            cfg.h_max
        )));
    }
    let nested = Nested::new();
    let integrand = |xi: f64| {
        let top = (xi * xi - h).powf(1.0 / k as f64);
        nested.inner(|x| g(x, xi), 0.0, top, cfg.inner_tolerance())
    };
    // The boundary has a corner at xi = 0 when h = 0.
    let outer = integrate(integrand, -cfg.epsilon, 0.0, cfg.tolerance()).and_then(|left| {
        Ok(left.value + integrate(integrand, 0.0, cfg.epsilon, cfg.tolerance())?.value)
    });
    nested.finish(outer)
}

/// `int_{-1}^{1} f(h(1 - s^2), sqrt(h) s) (1 - s^2)^{-beta} ds` for
/// `0 <= beta < 1`, with `s = cos(phi)` and `phi = r^q` absorbing the
/// endpoint singularity.
pub(crate) fn unit_fiber_integral<F: Fn(f64, f64) -> f64>(
    f: F,
    h: f64,
    beta_exp: f64,
    tol: Tolerance,
) -> Result<f64, AnalysisError> {
    let q = 1.0 / (2.0 - 2.0 * beta_exp);
    let top = FRAC_PI_2.powf(1.0 / q);
    let root = h.sqrt();
    let r = integrate(
        |r: f64| {
            let phi = r.powf(q);
            let (s, c) = phi.sin_cos();
            let ratio = if phi > 0.0 { s / phi } else { 1.0 };
            let u = h * s * s;
            q * ratio.powf(1.0 - 2.0 * beta_exp) * (f(u, root * c) + f(u, -root * c))
        },
        0.0,
        top,
        tol,
    )?;
    Ok(r.value)
}

fn channel_exponent(k: u32, i: u32) -> f64 {
    (k - 1 - i) as f64 / k as f64
}

/// Terms `(n, j, c)` of `g_i(u, xi) = sum c u^n xi^j` for the channels
/// `i = 0..k-1` of `g = sum_i x^i g_i(x^k, xi)`.
fn channels<C: Coefficient>(g: &TruncatedSeries2<C>, k: u32) -> Vec<Vec<(i32, i32, f64)>> {
    let mut out = vec![Vec::new(); k as usize - 1];
    for (a, j, c) in g.terms() {
        let i = a % k;
        if i < k - 1 {
            out[i as usize].push(((a / k) as i32, j as i32, c.to_f64()));
        }
    }
    out
}

/// `A_i(h) = int g_i(h - xi^2, xi) (h - xi^2)^{-(k-1-i)/k} dxi` over
/// `|xi| <= sqrt(h)`, for `i = 0..=k-2`.
pub fn generalized_actions<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    k: u32,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>, AnalysisError> {
    if k < 2 {
        return Err(AnalysisError::InvalidInput(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if !(h > 0.0) {
        return Err(AnalysisError::InvalidInput(format!(
            "generalized actions need h > 0, got {h}"
        )));
    }
    channels(g, k)
        .into_iter()
        .enumerate()
        .map(|(i, terms)| {
            let b = channel_exponent(k, i as u32);
            let eval = |u: f64, xi: f64| {
                terms
                    .iter()
                    .map(|&(n, j, c)| c * u.powi(n) * xi.powi(j))
                    .sum::<f64>()
            };
            Ok(h.powf(0.5 - b) * unit_fiber_integral(eval, h, b, cfg.tolerance())?)
        })
        .collect()
}

/// Closed form of the generalized actions of a reduced residual:
/// `sum_n c_{in} h^{n + 1/2 - beta} B(1/2, n + 1 - beta)`.
pub fn symbolic_actions<C: Coefficient>(
    c: &TruncatedSeries1<C>,
    k: u32,
    h: f64,
) -> Result<Vec<f64>, AnalysisError> {
    let parts = c_decompose(c, k)?;
    Ok(parts
        .iter()
        .enumerate()
        .map(|(i, ci)| {
            let b = channel_exponent(k, i as u32);
            ci.terms()
                .map(|(n, cn)| {
                    let n = n as f64;
                    cn.to_f64() * h.powf(n + 0.5 - b) * beta(0.5, n + 1.0 - b)
                })
                .sum()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheckSample {
    pub h: f64,
    pub channel: u32,
    pub numeric: f64,
    pub symbolic: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub samples: Vec<CrossCheckSample>,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compare generalized actions of `g` from quadrature with the closed form
/// for the residual `c` of `g`. Errors are relative to the largest channel
/// at each `h`, so vanishing channels are judged on the common scale.
pub fn cross_check_invariants<C: Coefficient>(
    g: &TruncatedSeries2<C>,
    h: AkHamiltonian,
    h_samples: &[f64],
    cfg: &QuadratureConfig,
) -> Result<CrossCheckReport, AnalysisError> {
    if h.sigma != Sigma::Plus {
        return Err(AnalysisError::InvalidInput(
            "cross check needs sigma = +1".into(),
        ));
    }
    let sol = solve_cohomological(g, h)?;
    let mut samples = Vec::new();
    for &t in h_samples {
        let numeric = generalized_actions(g, h.k, t, cfg)?;
        let symbolic = symbolic_actions(&sol.c, h.k, t)?;
        let scale = numeric
            .iter()
            .chain(&symbolic)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, (num, sym)) in numeric.iter().zip(&symbolic).enumerate() {
            let rel_error = if scale > 0.0 {
                (num - sym).abs() / scale
            } else {
                0.0
            };
            samples.push(CrossCheckSample {
                h: t,
                channel: i as u32,
                numeric: *num,
                symbolic: *sym,
                rel_error,
            });
        }
    }
    let max_rel_error = samples.iter().map(|s| s.rel_error).fold(0.0, f64::max);
    Ok(CrossCheckReport {
        samples,
        max_rel_error,
        tolerance: cfg.cross_check_tol,
        passed: max_rel_error <= cfg.cross_check_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Rational, Ring};
    use std::f64::consts::PI;

    type S = TruncatedSeries2<Rational>;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn disc_area() {
        let a = action_compact(|_, _| 1.0, 2, 1.0, &cfg()).unwrap();
        assert!((a - PI).abs() < 1e-7);
    }

    #[test]
    fn quartic_area_matches_one_dimensional_reduction() {
        let oracle = integrate(
            |x: f64| 2.0 * (1.0 - x.powi(4)).sqrt(),
            -1.0,
            1.0,
            Tolerance::default(),
        )
        .unwrap()
        .value;
        let a = action_compact(|_, _| 1.0, 4, 1.0, &cfg()).unwrap();
        assert!((a - oracle).abs() < 1e-7 * oracle);
        assert!((a - 3.496_076_739_056_16).abs() < 1e-7);
    }

    #[test]
    fn odd_part_vanishes() {
        let a = action_compact(|x, _| x + x.powi(3), 4, 0.5, &cfg()).unwrap();
        assert!(a.abs() < 1e-9);
    }

    #[test]
    fn noncompact_morse_at_zero() {
        let c = cfg();
        let a = action_noncompact(|_, _| 1.0, 2, 0.0, &c).unwrap();
        assert!((a - c.epsilon * c.epsilon).abs() < 1e-8);
        let near = action_noncompact(|_, _| 1.0, 2, -1e-9, &c).unwrap();
        assert!((a - near).abs() < 1e-6);
        assert!(action_noncompact(|_, _| 1.0, 2, 0.5, &c).is_err());
    }

    #[test]
    fn unit_channel_is_beta() {
        let g =
            S::polynomial_i64(Ring::Rational, &[(0, 0, 1), (1, 0, 1), (2, 0, 1)]).with_order(10);
        for &h in &[0.01, 0.05, 0.1] {
            let a = generalized_actions(&g, 4, h, &cfg()).unwrap();
            for (i, ai) in a.iter().enumerate() {
                let p = (i as f64 + 1.0) / 4.0;
                let expected = h.powf(p - 0.5) * beta(0.5, p);
                assert!(
                    (ai - expected).abs() < 1e-8 * expected,
                    "i={i} h={h}: {ai} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn xi_squared_matches_symbolic() {
        let g = S::polynomial_i64(Ring::Rational, &[(0, 2, 1)]).with_order(12);
        let h = AkHamiltonian::new(4, Sigma::Plus).unwrap();
        let report = cross_check_invariants(&g, h, &[0.05], &cfg()).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.samples[0].rel_error < 1e-8);
    }
}
