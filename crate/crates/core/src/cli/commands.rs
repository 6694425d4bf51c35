use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CliError, CompareInput, Mode, Outcome, ProblemSpec, RunOptions};
use crate::analysis::{
    abel_forward, abel_invert, action_compact, action_noncompact, cross_check_invariants,
    generalized_actions, growth_bound_check, AbelData, CrossCheckReport, GrowthReport,
    QuadratureConfig, SampledFunction,
};
use crate::cohomology::solve_cohomological;
use crate::moser::{inv_flip_consistent, inv_map, roundtrip_invariants, roundtrip_with_map};
use crate::normalform::{
    canonicalize_sign, ch_form, f_form, fibration_form, invariants_close, invariants_equal,
    FormKind, NormalForm, NormalFormJson,
};
use crate::series::{
    BigFloat, Coefficient, Rational, Ring, SeriesJson, Sigma, TruncatedSeries2, DEFAULT_PRECISION,
};

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub u: SeriesJson,
    pub verified: bool,
    pub order: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConversionSummary {
    /// Smallest `|b_ij|` used, as text.
    pub min_abs_b: Option<String>,
    /// Columns `j` whose constant changes with `i`.
    pub i_dependent_columns: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FibrationReport {
    pub form: NormalFormJson,
    /// The normalized leading function; `1` up to rounding.
    pub leading: SeriesJson,
    pub h: SeriesJson,
    pub fhat: SeriesJson,
    pub invariant_error: f64,
    pub leading_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalformReport {
    pub k: u32,
    pub sigma: Sigma,
    pub order: u32,
    pub ring: String,
    pub mode: Mode,
    pub residual: SeriesJson,
    pub certificate: Certificate,
    pub f_form: NormalFormJson,
    pub ch_form: NormalFormJson,
    pub conversion: ConversionSummary,
    pub fibration_form: Option<FibrationReport>,
}

fn normalform_in<C: Coefficient>(spec: &ProblemSpec) -> Result<NormalformReport, CliError> {
    let h = spec.hamiltonian()?;
    let g = spec.series::<C>()?;
    let sol = solve_cohomological(&g, h)?;
    let smooth = spec.mode == Mode::Smooth;
    let mut f = f_form(&sol.c, h)?;
    f.smooth_mode = smooth;
    let (mut ch, table) = ch_form(&sol.c, h)?;
    ch.smooth_mode = smooth;
    let fibration_form = if spec.options.fibration {
        let (fib, change) = fibration_form(&ch, spec.float_precision())?;
        Some(FibrationReport {
            form: NormalFormJson::from_form(&fib),
            leading: SeriesJson::from_series1(&change.leading),
            h: SeriesJson::from_series1(&change.h),
            fhat: SeriesJson::from_series1(&change.fhat),
            invariant_error: change.invariant_error(),
            leading_error: change.leading_error(),
        })
    } else {
        None
    };
    Ok(NormalformReport {
        k: h.k,
        sigma: h.sigma,
        order: g.order(),
        ring: g.ring().to_string(),
        mode: spec.mode,
        residual: SeriesJson::from_series1(&sol.c),
        certificate: Certificate {
            u: SeriesJson::from_series2(&sol.u),
            verified: sol.verify(&g, h),
            order: sol.residual_order,
        },
        f_form: NormalFormJson::from_form(&f),
        ch_form: NormalFormJson::from_form(&ch),
        conversion: ConversionSummary {
            min_abs_b: table.min_abs().map(|b| b.to_string()),
            i_dependent_columns: table.i_dependent_columns(),
        },
        fibration_form,
    })
}

/// All three normal forms of a problem, with the certificate of the residual.
pub fn cmd_normalform(spec: &ProblemSpec) -> Result<Outcome, CliError> {
    let report = match spec.ring()? {
        Ring::Rational => normalform_in::<Rational>(spec)?,
        Ring::BigFloat { .. } => normalform_in::<BigFloat>(spec)?,
    };
    let summary = format!(
        "normalform k={} sigma={} order={}: c has {} terms, certificate {}",
        report.k,
        report.sigma,
        report.order,
        match &report.residual.terms {
            crate::series::TermsJson::Univariate(t) => t.len(),
            crate::series::TermsJson::Bivariate(t) => t.len(),
        },
        if report.certificate.verified {
            "ok"
        } else {
            "FAILED"
        }
    );
    let passed = report.certificate.verified;
    Outcome::new(&report, summary, passed)
}

enum AnyForm {
    Exact(NormalForm<Rational>),
    Float(NormalForm<BigFloat>),
}

impl AnyForm {
    fn certified_order(&self) -> u32 {
        match self {
            AnyForm::Exact(nf) => nf.certified_order(),
            AnyForm::Float(nf) => nf.certified_order(),
        }
    }

    fn to_float(&self, precision: usize) -> NormalForm<BigFloat> {
        match self {
            AnyForm::Float(nf) => nf.clone(),
            AnyForm::Exact(nf) => {
                let ring = Ring::big_float(precision);
                NormalForm {
                    kind: nf.kind,
                    hamiltonian: nf.hamiltonian,
                    components: nf
                        .components
                        .iter()
                        .map(|c| c.map_ring(ring, |q| BigFloat::from_rational(q, ring)))
                        .collect(),
                    smooth_mode: nf.smooth_mode,
                    flipped: nf.flipped,
                    orientation_flipped: nf.orientation_flipped,
                    source_order: nf.source_order,
                }
            }
        }
    }
}

trait Wrap: Coefficient {
    fn wrap(nf: NormalForm<Self>) -> AnyForm;
}

impl Wrap for Rational {
    fn wrap(nf: NormalForm<Self>) -> AnyForm {
        AnyForm::Exact(nf)
    }
}

impl Wrap for BigFloat {
    fn wrap(nf: NormalForm<Self>) -> AnyForm {
        AnyForm::Float(nf)
    }
}

fn problem_form_in<C: Wrap>(
    spec: &ProblemSpec,
    kind: FormKind,
    precision: usize,
) -> Result<AnyForm, CliError> {
    let h = spec.hamiltonian()?;
    let sol = solve_cohomological(&spec.series::<C>()?, h)?;
    Ok(match kind {
        FormKind::FForm => C::wrap(f_form(&sol.c, h)?),
        FormKind::ChForm => C::wrap(ch_form(&sol.c, h)?.0),
        FormKind::FibrationForm => {
            AnyForm::Float(fibration_form(&ch_form(&sol.c, h)?.0, precision)?.0)
        }
    })
}

fn form_of(input: &CompareInput, kind: FormKind, precision: usize) -> Result<AnyForm, CliError> {
    match input {
        CompareInput::Problem(spec) => match spec.ring()? {
            Ring::Rational => problem_form_in::<Rational>(spec, kind, precision),
            Ring::BigFloat { .. } => problem_form_in::<BigFloat>(spec, kind, precision),
        },
        CompareInput::Form(json) => match json.ring()? {
            Ring::Rational => Ok(AnyForm::Exact(json.to_form()?)),
            Ring::BigFloat { .. } => Ok(AnyForm::Float(json.to_form()?)),
        },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub kind: FormKind,
    pub equal: bool,
    /// The forms agree only after the involution `(x, xi) -> (-x, -xi)`.
    pub flipped: bool,
    pub certified_order: u32,
    /// Absolute tolerance used for big-float forms; `null` for exact ones.
    pub tolerance: Option<f64>,
}

fn flip_needed<C: Coefficient>(a: &NormalForm<C>, b: &NormalForm<C>) -> bool {
    canonicalize_sign(a).1 != canonicalize_sign(b).1
}

/// Compare the invariants of two problems or emitted normal forms.
pub fn cmd_compare(
    a: &CompareInput,
    b: &CompareInput,
    run: &RunOptions,
) -> Result<Outcome, CliError> {
    let form_kind = |x: &CompareInput| match x {
        CompareInput::Form(json) => Some((json.kind, json.precision)),
        CompareInput::Problem(_) => None,
    };
    let (kind, json_precision) = match (form_kind(a), form_kind(b)) {
        (Some((ka, pa)), Some((kb, pb))) => {
            if ka != kb {
                return Err(CliError::Input(format!(
                    "cannot compare {ka:?} with {kb:?}"
                )));
            }
            (ka, pa.or(pb))
        }
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => (FormKind::FForm, None),
    };
    let precision = json_precision
        .or(run.precision)
        .unwrap_or(DEFAULT_PRECISION);
    let fa = form_of(a, kind, precision)?;
    let fb = form_of(b, kind, precision)?;
    let certified_order = fa.certified_order().min(fb.certified_order());
    let (equal, flipped, tolerance) = match (&fa, &fb) {
        (AnyForm::Exact(x), AnyForm::Exact(y)) => {
            let equal = invariants_equal(x, y)?;
            (equal, equal && flip_needed(x, y), None)
        }
        _ => {
            let (x, y) = (fa.to_float(precision), fb.to_float(precision));
            let scale = x
                .components
                .iter()
                .chain(&y.components)
                .map(|c| c.max_abs_f64())
                .fold(1.0, f64::max);
            let tol = run
                .tol
                .unwrap_or(BigFloat::noise_level(Ring::big_float(precision)) * 1e3 * scale);
            let equal = invariants_close(&x, &y, tol)?;
            (equal, equal && flip_needed(&x, &y), Some(tol))
        }
    };
    let report = CompareReport {
        kind,
        equal,
        flipped,
        certified_order,
        tolerance,
    };
    let summary = format!(
        "compare {:?}: {} (flipped: {}, certified order {})",
        kind,
        if equal { "equal" } else { "different" },
        flipped,
        certified_order
    );
    Outcome::new(&report, summary, true)
}

/// Random polynomial in `(x, xi)` with small rational coefficients, no
/// constant term and total degree at most `degree`.
pub fn random_generator<R: Rng>(rng: &mut R, degree: u32) -> TruncatedSeries2<Rational> {
    let mut terms = Vec::new();
    for d in 1..=degree {
        for j in 0..=d {
            if rng.random_bool(0.6) {
                let num: i64 = rng.random_range(-3..=3);
                let den: u64 = rng.random_range(1..=3);
                terms.push((d - j, j, Rational::from_parts(num.into(), den.into())));
            }
        }
    }
    TruncatedSeries2::from_terms(Ring::Rational, crate::series::EXACT, terms)
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripTrial {
    pub trial: u32,
    pub w: SeriesJson,
    pub equal: bool,
    pub certified_order: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvolutionCheck {
    pub equal: bool,
    pub flip_consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub seed: u64,
    pub trials: Vec<RoundtripTrial>,
    pub involution: Option<InvolutionCheck>,
    pub all_equal: bool,
}

/// Pull `omega` back along flows of `w X^_H` for random `w` and compare the
/// invariants; for even `k` also along the involution.
pub fn cmd_roundtrip(spec: &ProblemSpec, run: &RunOptions) -> Result<Outcome, CliError> {
    if spec.ring()? != Ring::Rational {
        return Err(CliError::Input(
            "roundtrip compares exactly and needs the rational ring".into(),
        ));
    }
    let h = spec.hamiltonian()?;
    let g = spec.series::<Rational>()?;
    let seed = run.seed.unwrap_or(0);
    let count = spec.options.trials.unwrap_or(10);
    let degree = spec.options.w_degree.unwrap_or(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(count as usize);
    for trial in 0..count {
        let w = random_generator(&mut rng, degree);
        let r = roundtrip_invariants(&g, h, &w)?;
        trials.push(RoundtripTrial {
            trial,
            w: SeriesJson::from_series2(&w),
            equal: r.equal,
            certified_order: r.certified_order,
        });
    }
    let involution = if h.k % 2 == 0 {
        let r = roundtrip_with_map(&g, h, &inv_map(Ring::Rational))?;
        Some(InvolutionCheck {
            equal: r.equal,
            flip_consistent: inv_flip_consistent(&r),
        })
    } else {
        None
    };
    let all_equal = trials.iter().all(|t| t.equal)
        && involution
            .as_ref()
            .is_none_or(|i| i.equal && i.flip_consistent);
    let report = RoundtripReport {
        seed,
        trials,
        involution,
        all_equal,
    };
    let summary = format!(
        "roundtrip k={} seed={}: {}/{} trials equal{}",
        h.k,
        seed,
        report.trials.iter().filter(|t| t.equal).count(),
        report.trials.len(),
        match &report.involution {
            Some(i) => format!(
                ", involution equal={} flip_consistent={}",
                i.equal, i.flip_consistent
            ),
            None => String::new(),
        }
    );
    Outcome::new(&report, summary, all_equal)
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionSample {
    pub h: f64,
    /// `compact` for `{H <= h}` (`sigma = +1`, even `k`, `h > 0`), `noncompact`
    /// for the strip region at `h <= 0`.
    pub region: Option<String>,
    pub action: Option<f64>,
    pub generalized: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionReport {
    pub k: u32,
    pub sigma: Sigma,
    pub epsilon: f64,
    pub samples: Vec<ActionSample>,
    pub cross_check: Option<CrossCheckReport>,
}

fn action_in<C: Coefficient>(
    spec: &ProblemSpec,
    levels: &[f64],
    cfg: &QuadratureConfig,
) -> Result<ActionReport, CliError> {
    let h = spec.hamiltonian()?;
    let g = spec.series::<C>()?;
    let plus = h.sigma == Sigma::Plus;
    let eval = |x: f64, xi: f64| g.eval_f64(x, xi);
    let mut samples = Vec::with_capacity(levels.len());
    for &t in levels {
        let sample = if t > 0.0 {
            if !plus {
                return Err(CliError::Input(format!(
                    "level h = {t} > 0 needs sigma = +1"
                )));
            }
            let compact = h.k % 2 == 0;
            ActionSample {
                h: t,
                region: compact.then(|| "compact".to_string()),
                action: if compact {
                    Some(action_compact(eval, h.k, t, cfg)?)
                } else {
                    None
                },
                generalized: Some(generalized_actions(&g, h.k, t, cfg)?),
            }
        } else {
            if plus {
                return Err(CliError::Input(format!(
                    "level h = {t} <= 0 needs sigma = -1"
                )));
            }
            ActionSample {
                h: t,
                region: Some("noncompact".into()),
                action: Some(action_noncompact(eval, h.k, t, cfg)?),
                generalized: None,
            }
        };
        samples.push(sample);
    }
    let positive: Vec<f64> = levels.iter().copied().filter(|&t| t > 0.0).collect();
    let cross_check = if plus && !positive.is_empty() {
        Some(cross_check_invariants(&g, h, &positive, cfg)?)
    } else {
        None
    };
    Ok(ActionReport {
        k: h.k,
        sigma: h.sigma,
        epsilon: cfg.epsilon,
        samples,
        cross_check,
    })
}

/// Actions and generalized actions at the requested levels, with the
/// symbolic cross check for `sigma = +1`.
pub fn cmd_action(
    spec: &ProblemSpec,
    levels: &[f64],
    run: &RunOptions,
) -> Result<Outcome, CliError> {
    let levels = if levels.is_empty() {
        spec.options.h.as_slice()
    } else {
        levels
    };
    if levels.is_empty() {
        return Err(CliError::Input("no energy levels given".into()));
    }
    let mut cfg = QuadratureConfig::default();
    if let Some(tol) = run.tol {
        cfg.cross_check_tol = tol;
    }
    cfg.validate()?;
    let report = match spec.ring()? {
        Ring::Rational => action_in::<Rational>(spec, levels, &cfg)?,
        Ring::BigFloat { .. } => action_in::<BigFloat>(spec, levels, &cfg)?,
    };
    let passed = report.cross_check.as_ref().is_none_or(|c| c.passed);
    let summary = format!(
        "action k={} at {} levels{}",
        report.k,
        report.samples.len(),
        match &report.cross_check {
            Some(c) => format!(
                ", cross check max rel error {:.3e} ({})",
                c.max_rel_error,
                if c.passed { "ok" } else { "FAILED" }
            ),
            None => String::new(),
        }
    );
    Outcome::new(&report, summary, passed)
}

#[derive(Clone, Debug, Serialize)]
pub struct AbelPoint {
    pub t: f64,
    pub c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbelCheck {
    pub h: f64,
    pub g: f64,
    pub reconstructed: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbelReport {
    pub k: u32,
    pub i: u32,
    pub c: Vec<AbelPoint>,
    pub checks: Vec<AbelCheck>,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

/// Number of nodes re-transformed as a consistency check.
const ABEL_CHECKS: usize = 20;

/// Invert `G = F[c_i]` at the nodes of `data` and re-apply the forward
/// transform at up to twenty positive nodes.
pub fn cmd_abel(
    data: &SampledFunction,
    k: u32,
    i: u32,
    run: &RunOptions,
) -> Result<Outcome, CliError> {
    let grid = data.grid();
    let cfg = QuadratureConfig::default();
    let tolerance = run.tol.unwrap_or(1e-6);
    let c = grid
        .iter()
        .map(|&t| {
            Ok(AbelPoint {
                t,
                c: abel_invert(data, k, i, t, &cfg)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let positive: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
    let stride = positive.len().div_ceil(ABEL_CHECKS).max(1);
    let mut checks = Vec::new();
    for &t in positive.iter().step_by(stride) {
        let failure = RefCell::new(None);
        let back = abel_forward(
            |s| {
                abel_invert(data, k, i, s, &cfg).unwrap_or_else(|e| {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                })
            },
            k,
            i,
            t,
            &cfg,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e.into());
        }
        let back = back?;
        let g = data.value(t);
        let rel_error = (back - g).abs() / g.abs().max(f64::MIN_POSITIVE);
        checks.push(AbelCheck {
            h: t,
            g,
            reconstructed: back,
            rel_error,
        });
    }
    let max_rel_error = checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    let report = AbelReport {
        k,
        i,
        c,
        checks,
        max_rel_error,
        tolerance,
    };
    let passed = max_rel_error <= tolerance;
    let summary = format!(
        "abel k={k} i={i}: {} nodes, forward check max rel error {:.3e} ({})",
        report.c.len(),
        max_rel_error,
        if passed { "ok" } else { "FAILED" }
    );
    Outcome::new(&report, summary, passed)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthSweep {
    pub reports: Vec<GrowthReport>,
    pub passed: bool,
}

/// The coefficient growth bound for each `k`.
pub fn cmd_checkgrowth(
    ks: &[u32],
    sigma: Sigma,
    i_max: u32,
    j_max: u32,
) -> Result<Outcome, CliError> {
    if ks.is_empty() || ks.iter().any(|&k| k < 2) {
        return Err(CliError::Input("check-growth needs k >= 2".into()));
    }
    let reports: Vec<GrowthReport> = ks
        .iter()
        .map(|&k| growth_bound_check(k, sigma, i_max, j_max))
        .collect();
    let passed = reports.iter().all(GrowthReport::passed);
    let checked: u64 = reports.iter().map(|r| r.checked).sum();
    let violations: usize = reports.iter().map(|r| r.violations.len()).sum();
    let summary = format!("check-growth k={ks:?} i<={i_max} j<={j_max}: {checked} coefficients, {violations} violations");
    Outcome::new(&GrowthSweep { reports, passed }, summary, passed)
}
