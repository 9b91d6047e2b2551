//! Multigrid hierarchy construction.
//!
//! Classical (Ruge-Stüben style) coarsening uses a first-pass C/F splitting
//! (or PMIS) with direct interpolation; smoothed aggregation uses MIS-2 aggregates, a
//! piecewise-constant tentative prolongator, and Jacobi prolongator
//! smoothing. Splitting and aggregation run on the assembled level operator
//! with hash-based tie-breaking, so the hierarchy does not depend on the
//! number of ranks used to build it. Interpolation rows, `A P` and `Pᵀ(AP)`
//! are formed per rank with all remote data moved by the selected schedules.

pub mod interp;
mod setup;
pub mod split;
pub mod strength;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::comm::{Exchange, MessageLog, Strategy};
use crate::dense::DenseLu;
use crate::error::{Error, Result};
use crate::model::{CounterSource, ModelParams, Selection};
use crate::partition::PartitionedMatrix;
use crate::topology::Topology;

pub use setup::setup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    RugeStuben,
    SmoothedAggregation,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::RugeStuben => "ruge_stuben",
            SolverKind::SmoothedAggregation => "smoothed_aggregation",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ruge_stuben" | "rs" => Ok(SolverKind::RugeStuben),
            "smoothed_aggregation" | "sa" => Ok(SolverKind::SmoothedAggregation),
            other => Err(Error::Config {
                key: "solver".into(),
                msg: format!("expected `ruge_stuben` or `smoothed_aggregation`, got `{other}`"),
            }),
        }
    }
}

/// C/F splitting used by [`SolverKind::RugeStuben`].
///
/// PMIS is fully parallel in spirit but, paired with direct interpolation,
/// leaves many fine points with a single coarse neighbor and converges
/// slowly on 2D Laplacians. The sequential first pass coarsens less
/// aggressively and gives a far better cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coarsening {
    #[default]
    FirstPass,
    Pmis,
}

impl FromStr for Coarsening {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first_pass" => Ok(Coarsening::FirstPass),
            "pmis" => Ok(Coarsening::Pmis),
            other => Err(Error::Config {
                key: "coarsening".into(),
                msg: format!("expected `first_pass` or `pmis`, got `{other}`"),
            }),
        }
    }
}

/// Either let the models pick each exchange's strategy or force one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StrategyChoice {
    #[default]
    Auto,
    Fixed(Strategy),
}

impl StrategyChoice {
    pub fn resolve(self, selection: &Selection) -> Strategy {
        match self {
            StrategyChoice::Auto => selection.chosen,
            StrategyChoice::Fixed(s) => s,
        }
    }
}

impl fmt::Display for StrategyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyChoice::Auto => f.write_str("auto"),
            StrategyChoice::Fixed(s) => s.fmt(f),
        }
    }
}

impl FromStr for StrategyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(StrategyChoice::Auto),
            other => other.parse().map(StrategyChoice::Fixed),
        }
    }
}

impl TryFrom<String> for StrategyChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StrategyChoice> for String {
    fn from(s: StrategyChoice) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupConfig {
    pub solver: SolverKind,
    pub coarsening: Coarsening,
    pub strength_theta: f64,
    /// Coarsening stops once a level has at most this many rows.
    pub max_coarse: usize,
    pub prolongation_sweeps: usize,
    pub max_levels: usize,
    /// Coarsening also stops when a step keeps more than this fraction of
    /// the rows, which covers both failed and stalled coarsening.
    pub stall_ratio: f64,
    pub strategy: StrategyChoice,
    pub model: ModelParams,
    pub counters: CounterSource,
}

impl Default for SetupConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::RugeStuben,
            coarsening: Coarsening::FirstPass,
            strength_theta: strength::DEFAULT_THETA,
            max_coarse: 50,
            prolongation_sweeps: 1,
            max_levels: 25,
            stall_ratio: 0.9,
            strategy: StrategyChoice::Auto,
            model: ModelParams::default(),
            counters: CounterSource::Schedule,
        }
    }
}

impl SetupConfig {
    pub fn new(solver: SolverKind) -> Self {
        Self {
            solver,
            ..Self::default()
        }
    }
}

/// Model outcome for one exchange and the strategy actually executed.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub selection: Selection,
    pub strategy: Strategy,
    /// One exchange under each candidate schedule, indexed by
    /// [`Strategy::index`].
    pub logs: [MessageLog; 3],
}

impl Channel {
    pub fn log(&self, s: Strategy) -> &MessageLog {
        &self.logs[s.index()]
    }
}

/// Interpolation from the next coarser level, with its exchanges.
#[derive(Debug, Clone)]
pub struct Interp {
    pub p: PartitionedMatrix,
    /// Vector pattern of `P`: coarse values needed by `P e`.
    pub p_comm: Exchange,
    /// Reversed pattern: partial results of `Pᵀ r` sent back to owners.
    pub p_rev: Exchange,
    /// Rows of `P` fetched over the pattern of `A` for `A P`.
    pub spgemm: Channel,
    /// Partial rows of `Pᵀ (A P)` over `p_rev`.
    pub galerkin: Channel,
    pub interpolate: Channel,
    pub restrict: Channel,
}

#[derive(Debug, Clone)]
pub struct Level {
    pub a: PartitionedMatrix,
    /// Vector pattern of `A`.
    pub a_comm: Exchange,
    pub spmv: Channel,
    /// `None` on the coarsest level.
    pub interp: Option<Interp>,
}

impl Level {
    pub fn rows(&self) -> usize {
        self.a.global_rows()
    }

    pub fn nnz(&self) -> usize {
        self.a.nnz()
    }
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub topology: Topology,
    pub config: SetupConfig,
    pub levels: Vec<Level>,
    /// Factorization of the gathered coarsest operator.
    pub coarse: DenseLu,
}

impl Hierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> &Level {
        &self.levels[l]
    }

    /// Rows per level, finest first.
    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Level::rows).collect()
    }

    /// Total nonzeros over all levels divided by those of the finest.
    pub fn operator_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(Level::nnz).sum();
        total as f64 / self.levels[0].nnz().max(1) as f64
    }
}
