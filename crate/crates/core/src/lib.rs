//! Numerical simulation of locally constrained inverse curvature flows
//!
//! ```text
//! dx/dt = (n / F - u / lambda'(r)) nu,    F = n H_k / H_{k-1},
//! ```
//!
//! for rotationally symmetric star-shaped hypersurfaces in warped products
//! `(a, b) x S^n` with metric `dr^2 + lambda(r)^2 sigma`, together with the
//! integral functionals that are monotone along the flow and the geometric
//! inequalities they imply.
//!
//! Modules, bottom up:
//!
//! - [`warp`]: warping factors (spherical cap, hyperbolic, Euclidean,
//!   AdS-Schwarzschild) and radial primitives.
//! - [`grid`]: cell-centered polar-angle grid with pole reflection.
//! - [`geometry`]: support function, principal curvatures, `sigma_k`, `H_k`
//!   and the curvature quotient.
//! - [`initdata`]: slices, perturbed slices, off-center geodesic spheres.
//! - [`quantities`]: global functionals, integral identities, slice profiles
//!   and the inequality audit.
//! - [`flow`]: RK4 time stepping and diagnostics.
//! - [`monitors`]: monotonicity audits, convergence certificates, refinement
//!   orders.

// Negated comparisons are used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod initdata;
pub mod monitors;
pub mod numeric;
pub mod quantities;
pub mod warp;

pub use error::{Error, Result};
pub use flow::{evolve, DiagnosticsRecord, FlowConfig, FlowFailure, FlowOutcome, StopReason};
pub use geometry::{AxiKappa, CurvatureField, GraphSurface};
pub use grid::Grid;
pub use monitors::{ConvergenceCertificate, Direction, MonotoneVerdict};
pub use quantities::{Functionals, InequalityRecord, SliceProfile};
pub use warp::{Jet, WarpKind, WarpModel};
