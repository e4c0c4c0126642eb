//! Variational laboratory for rapidly rotating two-dimensional Bose–Einstein
//! condensates confined to a flat disc trap.
//!
//! The crate is organised around the objects that appear in the energy
//! analysis of the problem:
//!
//! * [`tf`]: closed-form Thomas–Fermi densities and energies, plus the
//!   reduced giant-vortex functional.
//! * [`field`]: the polar grid over the unit disc, complex wave fields and the
//!   discrete Gross–Pitaevskii energy in both its angular-momentum and its
//!   magnetic form.
//! * [`trial`]: the vortex-lattice and giant-vortex trial states.
//! * [`minimize`]: constrained descent on the unit L² sphere.
//! * [`symmetry`]: angular-momentum eigenspace minimisation and the
//!   symmetry-breaking diagnostics.
//! * [`experiment`]: parameter sweeps, remainder fits and on-disk records.
//!
//! All energies are dimensionless and refer to the unit disc.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod field;
pub mod minimize;
pub mod quadrature;
pub mod symmetry;
pub mod tf;
pub mod trial;

pub use error::{Error, Result};
pub use field::{BoundaryCondition, EnergyBreakdown, EnergyForm, GridSpec, WaveField};
pub use tf::{TfRegimeParams, TfSolution};

/// 4/√π, the angular-velocity threshold above which the Thomas–Fermi density
/// develops a central hole.
///
/// `FRAC_2_SQRT_PI` is the correctly rounded 2/√π and doubling it is exact, so
/// this is the correctly rounded threshold.
pub const HOLE_THRESHOLD: f64 = 2.0 * std::f64::consts::FRAC_2_SQRT_PI;
