//! Simulation of a quantum oscillator coupled to a classical reservoir,
//! with Bandt-Pompe ordinal analysis of the resulting time series.
//!
//! The pieces, bottom up:
//!
//! - [`dynamics`]: model parameters, the five-variable flow, energy, the
//!   motion invariant `I` and the relative energy `E_r`.
//! - [`integrator`]: fixed-step RK4 and adaptive Dormand-Prince sampling.
//! - [`ordinal`]: ordinal patterns and their distribution.
//! - [`quantifiers`]: permutation entropy, LMC and Jensen-Shannon
//!   complexities.
//! - [`poincare`]: section crossings of sampled trajectories.
//! - [`pipeline`]: relative-energy sweeps and result files.
//! - [`config`], [`cli`]: the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod ordinal;
pub mod pipeline;
pub mod poincare;
pub mod quantifiers;

pub use dynamics::{DynState, SystemParams, TimeSeries, Trajectory};
pub use error::{Error, Result};
