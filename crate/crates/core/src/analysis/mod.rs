//! Numerical side: action integrals, generalized actions, Abel inversion and
//! the coefficient growth bound of the elimination.
//!
//! Everything here works in `f64`. Integrable endpoint singularities are
//! removed by explicit substitutions before the adaptive rule sees them.

mod abel;
mod actions;
mod growth;
pub mod quadrature;
mod sampled;

pub use abel::{abel_forward, abel_invert, AbelData, Callable};
pub use actions::{
    action_compact, action_noncompact, cross_check_invariants, generalized_actions,
    symbolic_actions, CrossCheckReport, CrossCheckSample,
};
pub use growth::{growth_bound, growth_bound_check, GrowthReport, GrowthViolation};
pub use sampled::SampledFunction;

use thiserror::Error;

use crate::cohomology::CohomologyError;
use crate::series::SeriesError;
use quadrature::Tolerance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("quadrature did not converge (estimate {estimate}, error {error})")]
    NonConvergent { estimate: f64, error: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// Numerical knobs shared by the analysis routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Half-width of the strip `|xi| <= epsilon` bounding the noncompact region.
    pub epsilon: f64,
    /// Largest `|h|` the routines are asked about.
    pub h_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Relative tolerance of symbolic-versus-numeric comparisons.
    pub cross_check_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            epsilon: 0.5,
            h_max: 0.1,
            abs_tol: 1e-14,
            rel_tol: 1e-8,
            max_subdivisions: 4000,
            cross_check_tol: 1e-4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.epsilon > 0.0 && self.h_max > 0.0) {
            return Err(AnalysisError::InvalidInput(
                "epsilon and h_max must be positive".into(),
            ));
        }
        if self.epsilon * self.epsilon <= self.h_max {
            return Err(AnalysisError::InvalidInput(format!(
                "epsilon^2 = {} must exceed h_max = {}",
                self.epsilon * self.epsilon,
                self.h_max
            )));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance {
            abs: self.abs_tol,
            rel: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }

    /// Tighter tolerance for inner integrals of nested quadratures.
    pub(crate) fn inner_tolerance(&self) -> Tolerance {
        Tolerance {
            abs: self.abs_tol * 1e-2,
            rel: self.rel_tol * 1e-2,
            max_subdivisions: self.max_subdivisions,
        }
    }
}
