//! Symplectic invariants of `A_{k-1}` singularities.
//!
//! Given `H = xi^2 + sigma x^k` and an area form `omega = g dxi ^ dx` with `g`
//! a truncated power series, this crate computes the residual `c(x)` of the
//! cohomological equation `{H, u} = g - c`, the normal forms built from it,
//! H-preserving test maps with their pullbacks, and numerical cross-checks
//! through action integrals and Abel inversion.

pub mod analysis;
pub mod cli;
pub mod cohomology;
pub mod moser;
pub mod normalform;
pub mod series;
