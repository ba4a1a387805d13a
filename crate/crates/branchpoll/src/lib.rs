//! Simulation and numerical analysis of multitype branching processes with
//! immigration and final product in a random environment, and of the
//! branching-type polling systems they model.
//!
//! The crate has three layers:
//!
//! - process models: [`env`](mod@env) (random environments), [`branching`]
//!   (population dynamics, life periods), [`polling`] (cyclic-server polling
//!   systems and their associated branching environments);
//! - numerics: [`analysis`] (Lyapunov exponent, moment function `s(x)`,
//!   Kesten tail index kappa), [`stats`] (Hill estimator, moment probes,
//!   empirical CCDFs, two-sample Kolmogorov-Smirnov);
//! - orchestration: [`config`], [`experiment`] and [`report`] drive seeded,
//!   reproducible experiment runs and CSV/text artifacts (used by the
//!   `branchpoll` binary and the runnable examples).
//!
//! All randomness flows through [`rng::StreamKey`], a splittable
//! counter-based stream keyed by `(seed, stream id)`, so replicated runs are
//! bit-reproducible regardless of worker count.

pub mod analysis;
pub mod branching;
pub mod config;
pub mod env;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod polling;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use rng::StreamKey;
