//! Event-driven Monte Carlo simulator and analytic oracles for random walk
//! on dynamical percolation over regular trees, finite graphs, and sampled
//! Galton–Watson trees.
//!
//! The crate is organized around the moving parts of the model:
//!
//! - [`graphs`]: lazily addressable trees, explicit finite graphs, sampled
//!   Galton–Watson trees, distances, and a brute-force Cheeger search.
//! - [`dyn_env`]: per-edge refresh processes materialized on demand, with
//!   memory-set/reset-time tracking and exact stationarity rollup.
//! - [`walker`]: the rate-1 walk, speed estimators, displacement profiles,
//!   and power-law fitting.
//! - [`evolving_set`]: exact one-step kernels on small finite graphs and
//!   the evolving-set / Diaconis–Fill machinery built on them.
//! - [`analytic`]: closed-form oracles (survival probabilities, the
//!   Galton–Watson speed, explicit bound formulas, birth–death statistics).
//! - [`percolation`]: static and interval-union cluster statistics on
//!   trees (one-arm curves, tails, trifurcations, Burton–Keane checks).
//! - [`experiments`]: configuration-driven sweeps, replica parallelism,
//!   CSV/manifest persistence, and the acceptance suite.
//!
//! See the `examples/` directory for one runnable program per capability;
//! the `dynaperc` binary drives the same experiments from config files.

pub mod acceptance;
pub mod analytic;
pub mod dyn_env;
pub mod error;
pub mod evolving_set;
pub mod experiments;
pub mod graphs;
pub mod percolation;
pub mod rng;
pub mod stats;
pub mod walker;

pub use error::{Error, Result};
