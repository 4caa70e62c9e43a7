//! Agent-based market simulation toolkit built around the kinetic Ising
//! model of trader imitation.
//!
//! The crate covers four connected pieces:
//!
//! - [`discrete_choice`]: random-utility choice, Gumbel noise and the logit
//!   model, with a Monte Carlo path to verify the closed form.
//! - [`market`] / [`experiments`]: the spin-market engine (profit-maximizing
//!   sign updates, impact-driven price formation, configurable topologies
//!   and schedules) plus coupling sweeps and the noise-induced-volatility
//!   experiment.
//! - [`stats`]: stylized-facts statistics for return series — heavy-tail
//!   (Hill) estimation, autocorrelations, the CV-of-logs discriminator and
//!   the excess-volatility variance diagnostic.
//! - [`qdt`]: the operational quantum-decision-theory scheme (utility plus
//!   attraction factors, quarter law, frequency comparison).
//!
//! Determinism is a hard contract: every stochastic routine is driven by an
//! explicit seed and reproduces bit-identical results. Multi-run
//! experiments parallelize over independent seeded jobs via [`parallel`]
//! (rayon by default, sequential with `--no-default-features`) without
//! changing any output.

// `!(x > 0.0)` comparisons are deliberate: they treat NaN as out of domain.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrete_choice;
pub mod error;
pub mod experiments;
pub mod market;
pub mod parallel;
pub mod persistence;
pub mod qdt;
pub mod rng;
pub mod schedule;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
