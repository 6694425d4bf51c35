//! Batch front-end used by the `aknf` binary.
//!
//! Every command returns an [`Outcome`]: a JSON report for stdout, a short
//! summary line for stderr and the process status. Errors map to exit codes
//! through [`CliError::exit_code`].

mod commands;

pub use commands::{
    cmd_abel, cmd_action, cmd_checkgrowth, cmd_compare, cmd_normalform, cmd_roundtrip,
    random_generator, AbelReport, ActionReport, CompareReport, GrowthSweep, NormalformReport,
    RoundtripReport,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::cohomology::CohomologyError;
use crate::moser::MoserError;
use crate::normalform::{NormalFormError, NormalFormJson};
use crate::series::{
    AkHamiltonian, Coefficient, Ring, SeriesError, SeriesJson, Sigma, TruncatedSeries2,
    DEFAULT_PRECISION,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CohomologyError> for CliError {
    fn from(e: CohomologyError) -> Self {
        match e {
            CohomologyError::Series(s) => s.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<NormalFormError> for CliError {
    fn from(e: NormalFormError) -> Self {
        match e {
            NormalFormError::Degenerate(m) => CliError::Degenerate(m),
            NormalFormError::Cohomology(c) => c.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<MoserError> for CliError {
    fn from(e: MoserError) -> Self {
        match e {
            MoserError::Series(s) => s.into(),
            MoserError::Cohomology(c) => c.into(),
            MoserError::NormalForm(n) => n.into(),
            MoserError::ValuationTooLow | MoserError::NotAkShape(_) => {
                CliError::Input(e.to_string())
            }
            MoserError::NonConvergent(_) => CliError::Numeric(e.to_string()),
            MoserError::NotHPreserving { .. } => CliError::Internal(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::NonConvergent { .. } => CliError::Numeric(e.to_string()),
            AnalysisError::InvalidInput(m) => CliError::Input(m),
            AnalysisError::Series(s) => s.into(),
            AnalysisError::Cohomology(c) => c.into(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("json: {e}"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Analytic,
    Smooth,
}

fn yes() -> bool {
    true
}

/// Command-specific knobs carried in the problem file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemOptions {
    /// Whether `normalform` also builds the fibration form.
    #[serde(default = "yes")]
    pub fibration: bool,
    /// Energy levels for `action`.
    #[serde(default)]
    pub h: Vec<f64>,
    /// Number of random trials for `roundtrip`.
    #[serde(default)]
    pub trials: Option<u32>,
    /// Total degree of the random `w` in `roundtrip`.
    #[serde(default)]
    pub w_degree: Option<u32>,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        ProblemOptions {
            fibration: true,
            h: Vec::new(),
            trials: None,
            w_degree: None,
        }
    }
}

/// A problem file: `H = xi^2 + sigma x^k` and the density `g` of `omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub k: u32,
    pub sigma: Sigma,
    pub order: u32,
    /// Ring of the computation; defaults to the ring of `g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    pub g: SeriesJson,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub options: ProblemOptions,
}

/// Command-line overrides shared by the subcommands.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub order: Option<u32>,
    pub precision: Option<usize>,
    pub mode: Option<Mode>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Apply overrides and re-validate.
    pub fn with_overrides(mut self, run: &RunOptions) -> Result<Self, CliError> {
        if let Some(order) = run.order {
            self.order = order;
        }
        if let Some(p) = run.precision {
            self.precision = Some(p);
        }
        if let Some(mode) = run.mode {
            self.mode = mode;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn hamiltonian(&self) -> Result<AkHamiltonian, CliError> {
        Ok(AkHamiltonian::new(self.k, self.sigma)?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.hamiltonian()?;
        if self.order < self.k {
            return Err(CliError::Input(format!(
                "order {} must be at least k = {}",
                self.order, self.k
            )));
        }
        self.ring()?;
        Ok(())
    }

    /// Ring of the computation.
    pub fn ring(&self) -> Result<Ring, CliError> {
        let g_ring = self.g.ring()?;
        let ring = match self.ring.as_deref() {
            None => g_ring,
            Some("rational") => Ring::Rational,
            Some("big-float") => Ring::big_float(
                self.precision
                    .or(g_ring.precision())
                    .unwrap_or(DEFAULT_PRECISION),
            ),
            Some(other) => return Err(CliError::Input(format!("unknown ring {other:?}"))),
        };
        if ring == Ring::Rational && g_ring != Ring::Rational {
            return Err(CliError::Input(
                "g has big-float coefficients but the ring is rational".into(),
            ));
        }
        Ok(match (ring, self.precision) {
            (Ring::BigFloat { .. }, Some(p)) => Ring::big_float(p),
            _ => ring,
        })
    }

    /// Precision used for the fibration form.
    pub fn float_precision(&self) -> usize {
        self.precision
            .or(self.g.precision)
            .unwrap_or(DEFAULT_PRECISION)
    }

    /// `g` in the ring of `C`, truncated at `order`.
    pub fn series<C: Coefficient>(&self) -> Result<TruncatedSeries2<C>, CliError> {
        let ring = self.ring()?;
        let mut g = self.g.clone();
        g.ring = ring.tag().to_string();
        g.precision = ring.precision();
        Ok(g.to_series2::<C>()?.with_order(self.order))
    }
}

/// Either a problem file or an emitted normal form; told apart by the
/// `kind` field normal forms carry.
#[derive(Clone, Debug, PartialEq)]
pub enum CompareInput {
    Problem(ProblemSpec),
    Form(NormalFormJson),
}

impl CompareInput {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("kind").is_some() {
            Ok(CompareInput::Form(serde_json::from_value(value)?))
        } else {
            let spec: ProblemSpec = serde_json::from_value(value)?;
            spec.validate()?;
            Ok(CompareInput::Problem(spec))
        }
    }
}

/// Result of a command.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: serde_json::Value,
    pub summary: String,
    /// `0` when every check in the report passed, `1` otherwise.
    pub status: i32,
}

impl Outcome {
    pub(crate) fn new<T: Serialize>(
        report: &T,
        summary: String,
        passed: bool,
    ) -> Result<Self, CliError> {
        Ok(Outcome {
            report: serde_json::to_value(report)?,
            summary,
            status: if passed { 0 } else { 1 },
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(&self.report).expect("json values always serialize");
        text.push('\n');
        text
    }
}
