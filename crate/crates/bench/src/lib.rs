//! Experiment driver for `nap-amg`.
//!
//! An [`ExperimentConfig`] names a problem, a simulated machine and solver
//! settings. [`run_experiment`] builds the hierarchy, evaluates every
//! exchange under all three strategies, solves, and collects a [`Report`]
//! of per-level message counts, model inputs and modeled costs. Costs are
//! modeled times; the wall-clock time of the simulation itself is not part
//! of the report.

pub mod compare;
pub mod config;
pub mod error;
pub mod report;
mod run;

pub use compare::{compare_report, SpeedupTable};
pub use config::{ExperimentConfig, Problem};
pub use error::{BenchError, Result};
pub use report::{LevelReport, Report, SolveStatus};
pub use run::{load_report, run_experiment, Experiment};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
