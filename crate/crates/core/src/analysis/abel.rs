use std::f64::consts::PI;

use statrs::function::beta::beta;

use super::actions::unit_fiber_integral;
use super::quadrature::{integrate, Tolerance};
use super::{AnalysisError, QuadratureConfig, SampledFunction};

/// A function with a derivative on `[0, domain().1]`.
pub trait AbelData {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    fn domain(&self) -> (f64, f64);
}

impl AbelData for SampledFunction {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }

    fn derivative(&self, t: f64) -> f64 {
        SampledFunction::derivative(self, t)
    }

    fn domain(&self) -> (f64, f64) {
        SampledFunction::domain(self)
    }
}

/// Closure-backed data; the derivative is either given or taken by a
/// 4th-order central difference.
pub struct Callable<F, D> {
    f: F,
    df: D,
    upper: f64,
}

impl<F: Fn(f64) -> f64, D: Fn(f64) -> f64> Callable<F, D> {
    pub fn new(f: F, df: D, upper: f64) -> Self {
        Callable { f, df, upper }
    }
}

impl<F: Fn(f64) -> f64 + Clone + 'static> Callable<F, Box<dyn Fn(f64) -> f64>> {
    pub fn numeric(f: F, upper: f64) -> Self {
        let g = f.clone();
        let step = 1e-3 * upper.max(1e-3);
        let df = move |t: f64| {
            (g(t - 2.0 * step) - 8.0 * g(t - step) + 8.0 * g(t + step) - g(t + 2.0 * step))
                / (12.0 * step)
        };
        Callable {
            f,
            df: Box::new(df),
            upper,
        }
    }
}

impl<F: Fn(f64) -> f64, D: Fn(f64) -> f64> AbelData for Callable<F, D> {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn derivative(&self, t: f64) -> f64 {
        (self.df)(t)
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.upper)
    }
}

fn check_channel(k: u32, i: u32) -> Result<(), AnalysisError> {
    if k < 2 || i + 2 > k {
        return Err(AnalysisError::InvalidInput(format!(
            "channel i={i} outside 0..={} for k={k}",
            k as i64 - 2
        )));
    }
    Ok(())
}

/// `int_0^1 v^e phi(v) (1 - v)^{-1/2} dv`, split at `1/2`: `v = r^m` on the
/// left removes `v^e` for `e < 0`, `v = 1 - w^2` on the right removes the
/// square-root singularity.
fn abel_kernel_integral<P: Fn(f64) -> f64>(
    phi: P,
    e: f64,
    tol: Tolerance,
) -> Result<f64, AnalysisError> {
    let m = if e < 0.0 { 1.0 / (e + 1.0) } else { 1.0 };
    let left = integrate(
        |r: f64| {
            let v = r.powf(m);
            m * r.powf(m * (e + 1.0) - 1.0) * phi(v) / (1.0 - v).sqrt()
        },
        0.0,
        0.5f64.powf(1.0 / m),
        tol,
    )?;
    let right = integrate(
        |w: f64| {
            let v = 1.0 - w * w;
            2.0 * v.powf(e) * phi(v)
        },
        0.0,
        0.5f64.sqrt(),
        tol,
    )?;
    Ok(left.value + right.value)
}

/// Recover `c_i(t)` from `G = F[c_i]`, where
/// `F[c](h) = int_{-1}^{1} c(h(1 - s^2)) (1 - s^2)^{-(k-1-i)/k} ds`.
pub fn abel_invert<D: AbelData>(
    data: &D,
    k: u32,
    i: u32,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, AnalysisError> {
    check_channel(k, i)?;
    let (_, upper) = data.domain();
    if !(t >= 0.0 && t <= upper * (1.0 + 1e-12)) {
        return Err(AnalysisError::InvalidInput(format!(
            "t = {t} outside [0, {upper}]"
        )));
    }
    let a = (i as f64 + 1.0) / k as f64;
    let tol = cfg.inner_tolerance();
    let first = abel_kernel_integral(|v| data.value(t * v), a - 0.5, tol)?;
    let second = if t > 0.0 {
        abel_kernel_integral(|v| data.derivative(t * v), a + 0.5, tol)?
    } else {
        0.0
    };
    Ok((a * first + t * second) / PI)
}

/// The forward transform `F[c](h)`.
pub fn abel_forward<F: Fn(f64) -> f64>(
    c: F,
    k: u32,
    i: u32,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, AnalysisError> {
    check_channel(k, i)?;
    let b = (k - 1 - i) as f64 / k as f64;
    if h == 0.0 {
        return Ok(c(0.0) * beta(0.5, 1.0 - b));
    }
    if !(h > 0.0) {
        return Err(AnalysisError::InvalidInput(format!(
            "h = {h} must be nonnegative"
        )));
    }
    unit_fiber_integral(|u, _| c(u), h, b, cfg.tolerance())
}
