//! Oscillator networks coupled to Langevin heat baths.
//!
//! The crate covers the whole pipeline from the network graph to numerical
//! verification of the steady-state theory:
//!
//! * [`graph`]: network topology, the nicely-connected growth operator and
//!   the controllability report, plus the built-in reference networks.
//! * [`potentials`]: the closed family of pinning/interaction potentials and
//!   sampled checkers for the structural conditions on them.
//! * [`dynamics`]: the Hamiltonian, its center-of-mass split, the splitting
//!   integrator with energy-budget bookkeeping, and the high-energy rescalings.
//! * [`diagnostics`]: Monte Carlo and linear-algebra oracles (Gibbs invariance,
//!   stationary moments, Lyapunov drift, dissipation tails, decay rates).
//! * [`config`] / [`runner`]: the JSON experiment format and the CLI driver.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod config;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod graph;
pub mod potentials;
pub mod rng;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
