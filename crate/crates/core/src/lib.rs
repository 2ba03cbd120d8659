//! Model-based causal Bayesian optimization.
//!
//! The crate learns one Gaussian process per node of a structural causal
//! model whose DAG is known, and picks interventions by maximizing an
//! optimistic acquisition: every mechanism is replaced by
//! `mu + beta * sigma * eta` with `eta` in `[-1, 1]`, and actions and `eta`
//! are optimized jointly by gradient ascent through the composed model.
//!
//! Modules, bottom up:
//! - [`graph`]: the DAG, depth/parent statistics, minimal intervention sets.
//! - [`scm`]: ground-truth simulators, the task catalog, oracles.
//! - [`gp`]: vector-valued GP posteriors with input gradients.
//! - [`acquisition`]: `eta` parameterizations, rollouts, gradients, optimizer.
//! - [`engine`]: the soft, hard and single-GP UCB loops.
//! - [`metrics`]: regret and reward curves, seed aggregation.
//! - [`experiment`]: config files, seed and beta sweeps, CSV output.

pub mod acquisition;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod gp;
pub mod graph;
pub mod metrics;
pub mod scm;

pub use error::{McboError, Result};
