//! Worst-case model risk under a relative-entropy budget, computed through its
//! thermodynamic counterpart.
//!
//! A loss functional `ℓ` over states is read as a negative energy `ε = −ℓ`, the
//! nominal measure as a density of states and a change of measure as an
//! occupation profile. Under that dictionary:
//!
//! - [`tilt`]: the worst case at a Lagrange multiplier `θ` is the canonical
//!   ensemble at inverse temperature `β = θ` (exponential tilting).
//! - [`quasistatic`]: the budget `η` is recovered by integrating `θ dV` along the
//!   family of worst cases, with a power-law spectrum as an analytic benchmark.
//! - [`thermalize`]: an ensemble Monte Carlo that relaxes occupations at fixed
//!   total energy to an exponential profile, yielding `θ` for a target risk.
//! - [`pathrisk`]: the worst-case risk PDE for `ℓ = ∫h dx + g(x_T)` under a
//!   driftless constant-volatility model, with a Monte Carlo cross-check.
//! - [`infoflow`]: entropy budgets from mutual-information arrival.
//!
//! Units: Boltzmann's constant is 1, so temperatures are in loss units and the
//! microstate count `N` is absorbed into the densities.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ensemble;
pub mod error;
pub mod infoflow;
pub mod math;
pub mod pathrisk;
pub mod quasistatic;
pub mod root;
pub mod step;
pub mod thermalize;
pub mod tilt;

pub use ensemble::{DiscreteEnsemble, Level, LossSample, MeasureChange};
pub use error::{Error, Result};
pub use step::StepFunction;
pub use tilt::{TiltCurve, TiltResult, TiltRow};
