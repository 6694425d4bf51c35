//! Normal forms of `(H, omega)` and the relations between them.
//!
//! Three presentations are produced from the reduced residual `c(x)`:
//!
//! * the primitive form `omega = d(f dxi)` with `f = sum_{i=1}^{k-1} x^i f_i(x^k)`;
//! * the form `omega = sum_{i=0}^{k-2} x^i c~_i(H) dxi ^ dx`;
//! * the fibration form, where `H` may be reparametrized and the leading
//!   function is normalized to `1`.
//!
//! For even `k` the involution `(x, xi) -> (-x, -xi)` preserves `H` and flips
//! the sign of one half of the components. [`canonicalize_sign`] picks a
//! deterministic representative of each orbit.

mod fibration;
mod forms;
mod json;
mod potential;

pub use fibration::{fibration_form, fibration_inverse, FibrationChange};
pub use forms::{
    ch_expand, ch_form, ch_residual, conversion_constant, f_form, f_series, ConversionTable,
};
pub use json::NormalFormJson;
pub use potential::{d_f_dxi, potential_form};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohomology::CohomologyError;
use crate::series::{AkHamiltonian, Coefficient, SeriesError, Sigma, TruncatedSeries1};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalFormError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error("degenerate form: {0}")]
    Degenerate(String),
    #[error("normal forms are not comparable: {0}")]
    Mismatch(String),
    #[error("structural check failed: {0}")]
    Structure(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormKind {
    #[serde(rename = "F_FORM")]
    FForm,
    #[serde(rename = "CH_FORM")]
    ChForm,
    #[serde(rename = "FIBRATION_FORM")]
    FibrationForm,
}

impl FormKind {
    /// Index `i` of the function stored at list position `l`.
    pub fn index_of(self, l: usize) -> u32 {
        match self {
            FormKind::ChForm => l as u32,
            FormKind::FForm | FormKind::FibrationForm => l as u32 + 1,
        }
    }

    /// Whether the `i`-th function changes sign under the involution (even `k`).
    pub fn in_sign_orbit(self, i: u32) -> bool {
        match self {
            FormKind::FForm => i % 2 == 0,
            FormKind::ChForm | FormKind::FibrationForm => i % 2 == 1,
        }
    }
}

/// A normal form: the list of invariant functions with its metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm<C> {
    pub kind: FormKind,
    pub hamiltonian: AkHamiltonian,
    pub components: Vec<TruncatedSeries1<C>>,
    pub smooth_mode: bool,
    pub flipped: bool,
    pub orientation_flipped: bool,
    /// Order in `x` of the residual the form was built from.
    pub source_order: u32,
}

/// Which components carry which kind of information.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInfo {
    pub k_even: bool,
    /// Indices whose functions change sign together under the involution.
    pub sign_orbit: Vec<u32>,
    /// Indices determined only through their Taylor series.
    pub taylor_only: Vec<u32>,
    /// Indices whose germ (not only Taylor series) is invariant; the
    /// truncated data certifies them only to the truncation order.
    pub germ: Vec<u32>,
}

impl<C: Coefficient> NormalForm<C> {
    pub fn k(&self) -> u32 {
        self.hamiltonian.k
    }

    pub fn sigma(&self) -> Sigma {
        self.hamiltonian.sigma
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.components.len()).map(|l| self.kind.index_of(l))
    }

    /// Component with function index `i`, if stored.
    pub fn component(&self, i: u32) -> Option<&TruncatedSeries1<C>> {
        (0..self.components.len())
            .find(|&l| self.kind.index_of(l) == i)
            .map(|l| &self.components[l])
    }

    /// Minimum order over the components.
    pub fn certified_order(&self) -> u32 {
        self.components
            .iter()
            .map(|c| c.order())
            .min()
            .unwrap_or(self.source_order)
    }

    /// Apply the involution's action on the components.
    pub fn apply_inv(&self) -> Self {
        let mut out = self.clone();
        if self.k() % 2 == 0 {
            for (l, comp) in out.components.iter_mut().enumerate() {
                if self.kind.in_sign_orbit(self.kind.index_of(l)) {
                    *comp = comp.neg();
                }
            }
        }
        out
    }

    pub fn relation(&self) -> RelationInfo {
        let k_even = self.k() % 2 == 0;
        let sign_orbit: Vec<u32> = if k_even {
            self.indices()
                .filter(|&i| self.kind.in_sign_orbit(i))
                .collect()
        } else {
            Vec::new()
        };
        let smooth_split = self.smooth_mode && k_even && self.sigma() == Sigma::Plus;
        let (taylor_only, germ) = if smooth_split {
            (
                sign_orbit.clone(),
                self.indices().filter(|i| !sign_orbit.contains(i)).collect(),
            )
        } else if self.smooth_mode {
            (self.indices().collect(), Vec::new())
        } else {
            (Vec::new(), self.indices().collect())
        };
        RelationInfo {
            k_even,
            sign_orbit,
            taylor_only,
            germ,
        }
    }

    /// Whether some sign-orbit component is nonzero.
    pub fn orbit_nonzero(&self) -> bool {
        self.k() % 2 == 0
            && self
                .components
                .iter()
                .enumerate()
                .any(|(l, c)| self.kind.in_sign_orbit(self.kind.index_of(l)) && !c.is_zero())
    }
}

/// Make the first nonzero sign-orbit coefficient, in (component index,
/// exponent) order, positive. Returns the representative and whether a flip
/// was applied.
pub fn canonicalize_sign<C: Coefficient>(nf: &NormalForm<C>) -> (NormalForm<C>, bool) {
    let mut out = nf.clone();
    out.flipped = false;
    if nf.k() % 2 == 1 {
        return (out, false);
    }
    let first = nf
        .components
        .iter()
        .enumerate()
        .filter(|(l, _)| nf.kind.in_sign_orbit(nf.kind.index_of(*l)))
        .find_map(|(_, comp)| comp.terms().next().map(|(_, c)| c.is_negative()));
    if first == Some(true) {
        let mut flipped = nf.apply_inv();
        flipped.flipped = true;
        (flipped, true)
    } else {
        (out, false)
    }
}

fn check_comparable<C: Coefficient>(
    a: &NormalForm<C>,
    b: &NormalForm<C>,
) -> Result<(), NormalFormError> {
    if a.kind != b.kind
        || a.hamiltonian != b.hamiltonian
        || a.components.len() != b.components.len()
    {
        return Err(NormalFormError::Mismatch(format!(
            "{:?} k={} sigma={} vs {:?} k={} sigma={}",
            a.kind,
            a.k(),
            a.sigma(),
            b.kind,
            b.k(),
            b.sigma()
        )));
    }
    Ok(())
}

/// Equality up to the involution, component-wise to the common order.
pub fn invariants_equal<C: Coefficient>(
    a: &NormalForm<C>,
    b: &NormalForm<C>,
) -> Result<bool, NormalFormError> {
    check_comparable(a, b)?;
    let (ca, _) = canonicalize_sign(a);
    let (cb, _) = canonicalize_sign(b);
    Ok(ca.components.iter().zip(&cb.components).all(|(x, y)| {
        let order = x.order().min(y.order());
        x.with_order(order) == y.with_order(order)
    }))
}

/// As [`invariants_equal`], with coefficients compared to an absolute
/// tolerance (for big-float forms).
pub fn invariants_close<C: Coefficient>(
    a: &NormalForm<C>,
    b: &NormalForm<C>,
    tol: f64,
) -> Result<bool, NormalFormError> {
    check_comparable(a, b)?;
    let (ca, _) = canonicalize_sign(a);
    let (cb, _) = canonicalize_sign(b);
    Ok(ca.components.iter().zip(&cb.components).all(|(x, y)| {
        let order = x.order().min(y.order());
        match x.with_order(order).checked_sub(&y.with_order(order)) {
            Ok(d) => d.max_abs_f64() <= tol,
            Err(_) => false,
        }
    }))
}
