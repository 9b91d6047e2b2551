//! Latency/bandwidth cost models for the three communication strategies.
//!
//! Inter-node traffic is charged with the max-rate model, in which a node's
//! injection bandwidth is bounded both by the network interface (`R_N`) and
//! by what its processes can push (`R_b` each). The load-imbalance form
//! charges the larger of the node's total over `R_N` and the busiest
//! process's total over `R_b`. Intra-node traffic uses the postal model.
//!
//! Strategy costs, with all counters taken as maxima:
//!
//! ```text
//! standard: a n_proc          + max(s_node/R_N, s_proc/R_b)
//! NAP-2:    a n_proc2node     + max(s_node/R_N, s_proc/R_b)     + a_l (ppn-1) + s_proc/R_bl
//! NAP-3:    a n_node2node/ppn + max(s_node/R_N, s_node2node/R_b) + 2 (a_l (ppn-1) + s_node2node/R_bl)
//! ```
//!
//! The intra-node terms are upper bounds, not measurements. A schedule with
//! no inter-node traffic costs exactly zero under every model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comm::{counters_from, CommPattern, CommSchedule, Exchange, MessageLog, Strategy};
use crate::error::{Error, Result};
use crate::topology::Topology;

/// Hardware constants for one message protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolParams {
    /// Inter-node latency, seconds.
    pub alpha: f64,
    /// Intra-node latency, seconds.
    pub alpha_local: f64,
    /// Network-interface injection rate, bytes/s.
    pub rate_nid: f64,
    /// Per-process inter-node transport rate, bytes/s.
    pub rate_proc: f64,
    /// Intra-node transport rate, bytes/s.
    pub rate_local: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            alpha: 4e-6,
            alpha_local: 6e-7,
            rate_nid: 1.25e9,
            rate_proc: 2.5e8,
            rate_local: 5e9,
        }
    }
}

impl ProtocolParams {
    fn validate(&self, class: &str) -> Result<()> {
        let rates = [self.rate_nid, self.rate_proc, self.rate_local];
        if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParams(format!("{class}: rates must be positive")));
        }
        if !(self.alpha >= 0.0 && self.alpha_local >= 0.0)
            || !self.alpha.is_finite()
            || !self.alpha_local.is_finite()
        {
            return Err(Error::InvalidParams(format!(
                "{class}: latencies must be non-negative"
            )));
        }
        Ok(())
    }

    /// Rescales the unit of time: latencies times `c`, rates divided by `c`.
    pub fn time_scaled(&self, c: f64) -> Self {
        Self {
            alpha: self.alpha * c,
            alpha_local: self.alpha_local * c,
            rate_nid: self.rate_nid / c,
            rate_proc: self.rate_proc / c,
            rate_local: self.rate_local / c,
        }
    }
}

/// Model parameters for the short, eager and rendezvous protocols.
///
/// Loaded from TOML:
///
/// ```toml
/// short_threshold = 512     # messages below this many bytes are short
/// eager_threshold = 8192    # below this, eager; otherwise rendezvous
///
/// [short]
/// alpha = 4e-6
/// alpha_local = 6e-7
/// rate_nid = 1.25e9
/// rate_proc = 2.5e8
/// rate_local = 5e9
///
/// [eager]       # same keys
/// [rendezvous]  # same keys
/// ```
///
/// Missing keys take the defaults shown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub short_threshold: usize,
    pub eager_threshold: usize,
    pub short: ProtocolParams,
    pub eager: ProtocolParams,
    pub rendezvous: ProtocolParams,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::uniform(ProtocolParams::default())
    }
}

impl ModelParams {
    pub fn uniform(p: ProtocolParams) -> Self {
        Self {
            short_threshold: 512,
            eager_threshold: 8192,
            short: p,
            eager: p,
            rendezvous: p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.short_threshold >= self.eager_threshold {
            return Err(Error::InvalidParams(
                "protocol thresholds must be strictly increasing".into(),
            ));
        }
        self.short.validate("short")?;
        self.eager.validate("eager")?;
        self.rendezvous.validate("rendezvous")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let params: Self = toml::from_str(s).map_err(|e| Error::Config {
            key: "model-params".into(),
            msg: e.to_string(),
        })?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            key: "model-params".into(),
            msg: format!("{}: {e}", path.display()),
        })?;
        Self::from_toml_str(&text)
    }

    /// Protocol for a message of `bytes`.
    pub fn class_for(&self, bytes: usize) -> &ProtocolParams {
        if bytes < self.short_threshold {
            &self.short
        } else if bytes < self.eager_threshold {
            &self.eager
        } else {
            &self.rendezvous
        }
    }

    pub fn time_scaled(&self, c: f64) -> Self {
        Self {
            short: self.short.time_scaled(c),
            eager: self.eager.time_scaled(c),
            rendezvous: self.rendezvous.time_scaled(c),
            ..*self
        }
    }
}

/// Communication counters of one schedule. Inter-node quantities only,
/// except the `intra_*` totals of gather and scatter steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommCounters {
    /// Most processes any process exchanges inter-node messages with.
    pub n_proc: usize,
    /// Most inter-node bytes sent or received by one process.
    pub s_proc: usize,
    /// Most inter-node bytes injected or absorbed by one node.
    pub s_node: usize,
    /// Most nodes any process exchanges messages with.
    pub n_proc2node: usize,
    /// Most nodes any node exchanges messages with.
    pub n_node2node: usize,
    /// Most bytes moved between one ordered pair of nodes.
    pub s_node2node: usize,
    pub intra_messages: usize,
    pub intra_bytes: usize,
    /// Largest single modeled message; picks the protocol.
    pub max_message_bytes: usize,
    pub ppn: usize,
}

impl CommCounters {
    pub fn is_silent(&self) -> bool {
        self.n_proc == 0 && self.n_node2node == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelEstimate {
    pub strategy: Strategy,
    pub total: f64,
    pub latency: f64,
    pub bandwidth: f64,
    pub intra: f64,
}

impl ModelEstimate {
    fn new(strategy: Strategy, latency: f64, bandwidth: f64, intra: f64) -> Self {
        Self {
            strategy,
            total: latency + bandwidth + intra,
            latency,
            bandwidth,
            intra,
        }
    }

    fn zero(strategy: Strategy) -> Self {
        Self::new(strategy, 0.0, 0.0, 0.0)
    }
}

/// Max-rate model for `n` messages of at most `s` bytes from each of `ppn`
/// equally loaded processes: `a n + ppn s / min(R_N, ppn R_b)`.
///
/// The bandwidth term is evaluated as `max(ppn s / R_N, s / R_b)`, which is
/// the same quantity with the `min` moved out of the denominator.
pub fn max_rate(n: f64, s: f64, ppn: f64, p: &ProtocolParams) -> f64 {
    p.alpha * n + f64::max(ppn * s / p.rate_nid, s / p.rate_proc)
}

fn imbalanced(n: f64, s_node: f64, s_proc: f64, p: &ProtocolParams) -> (f64, f64) {
    (
        p.alpha * n,
        f64::max(s_node / p.rate_nid, s_proc / p.rate_proc),
    )
}

/// Max-rate model with load imbalance: `a n + max(s_node/R_N, s_proc/R_b)`.
pub fn max_rate_adjusted(n: f64, s_node: f64, s_proc: f64, p: &ProtocolParams) -> Result<f64> {
    if s_proc > s_node {
        return Err(Error::InconsistentCounters { s_proc, s_node });
    }
    let (lat, bw) = imbalanced(n, s_node, s_proc, p);
    Ok(lat + bw)
}

/// Postal model for on-node messages: `a_l n + s / R_bl`.
pub fn postal(n: f64, s: f64, p: &ProtocolParams) -> f64 {
    p.alpha_local * n + s / p.rate_local
}

/// Upper bound on the extra on-node traffic of a node-aware step: `ppn - 1`
/// messages carrying `s` bytes, none when a node has a single process.
fn redistribution(ppn: usize, s: f64, p: &ProtocolParams) -> f64 {
    if ppn <= 1 {
        0.0
    } else {
        postal((ppn - 1) as f64, s, p)
    }
}

pub fn model_standard(c: &CommCounters, params: &ModelParams) -> ModelEstimate {
    if c.is_silent() {
        return ModelEstimate::zero(Strategy::Standard);
    }
    let p = params.class_for(c.max_message_bytes);
    let (lat, bw) = imbalanced(c.n_proc as f64, c.s_node as f64, c.s_proc as f64, p);
    ModelEstimate::new(Strategy::Standard, lat, bw, 0.0)
}

pub fn model_nap2(c: &CommCounters, params: &ModelParams) -> ModelEstimate {
    if c.is_silent() {
        return ModelEstimate::zero(Strategy::Nap2);
    }
    let p = params.class_for(c.max_message_bytes);
    let (lat, bw) = imbalanced(c.n_proc2node as f64, c.s_node as f64, c.s_proc as f64, p);
    let intra = redistribution(c.ppn, c.s_proc as f64, p);
    ModelEstimate::new(Strategy::Nap2, lat, bw, intra)
}

pub fn model_nap3(c: &CommCounters, params: &ModelParams) -> ModelEstimate {
    if c.is_silent() {
        return ModelEstimate::zero(Strategy::Nap3);
    }
    let p = params.class_for(c.max_message_bytes);
    let ppn = c.ppn.max(1);
    // With one process per node that process carries every node-to-node
    // message, so its load is s_proc.
    let per_process = if ppn == 1 { c.s_proc } else { c.s_node2node };
    let (lat, bw) = imbalanced(
        c.n_node2node as f64 / ppn as f64,
        c.s_node as f64,
        per_process as f64,
        p,
    );
    let intra = 2.0 * redistribution(ppn, c.s_node2node as f64, p);
    ModelEstimate::new(Strategy::Nap3, lat, bw, intra)
}

pub fn model_for(strategy: Strategy, c: &CommCounters, params: &ModelParams) -> ModelEstimate {
    match strategy {
        Strategy::Standard => model_standard(c, params),
        Strategy::Nap2 => model_nap2(c, params),
        Strategy::Nap3 => model_nap3(c, params),
    }
}

/// Which schedule the counters for each model are measured on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CounterSource {
    /// Every model reads counters from the standard schedule, ignoring the
    /// payload shrinkage of duplicate elimination.
    Pattern,
    /// Each model reads counters from its own candidate schedule.
    #[default]
    Schedule,
}

impl std::str::FromStr for CounterSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pattern" => Ok(Self::Pattern),
            "schedule" => Ok(Self::Schedule),
            other => Err(Error::Config {
                key: "model_counters".into(),
                msg: format!("expected `pattern` or `schedule`, got `{other}`"),
            }),
        }
    }
}

/// Outcome of model-driven strategy selection for one exchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub chosen: Strategy,
    /// Indexed by [`Strategy::index`].
    pub estimates: [ModelEstimate; 3],
    /// Counters each estimate was computed from.
    pub counters: [CommCounters; 3],
}

impl Selection {
    pub fn estimate(&self, s: Strategy) -> &ModelEstimate {
        &self.estimates[s.index()]
    }

    /// Modeled standard cost over the cheapest node-aware cost.
    pub fn nap_speedup(&self) -> Option<f64> {
        let std = self.estimate(Strategy::Standard).total;
        let best = self
            .estimate(Strategy::Nap2)
            .total
            .min(self.estimate(Strategy::Nap3).total);
        (best > 0.0).then(|| std / best)
    }
}

/// Index of the minimum; earlier entries win ties.
pub fn argmin_strategy(estimates: &[ModelEstimate; 3]) -> Strategy {
    let mut best = Strategy::Standard;
    for s in Strategy::ALL {
        if estimates[s.index()].total < estimates[best.index()].total {
            best = s;
        }
    }
    best
}

/// Evaluates all three models on the schedules of `exchange` and picks the
/// cheapest. `size(origin, index)` gives payload bytes per item.
pub fn select_for(
    exchange: &Exchange,
    topo: &Topology,
    params: &ModelParams,
    source: CounterSource,
    size: impl Fn(usize, usize) -> usize,
) -> Selection {
    let counters_of =
        |sched: &CommSchedule| counters_from(&MessageLog::for_schedule(sched, &size), topo);
    let counters = match source {
        CounterSource::Schedule => Strategy::ALL.map(|s| counters_of(exchange.schedule(s))),
        CounterSource::Pattern => [counters_of(exchange.schedule(Strategy::Standard)); 3],
    };
    let estimates = Strategy::ALL.map(|s| model_for(s, &counters[s.index()], params));
    Selection {
        chosen: argmin_strategy(&estimates),
        estimates,
        counters,
    }
}

/// Builds the three candidate schedules for `pattern` and selects among them.
pub fn select_strategy(
    pattern: &CommPattern,
    topo: &Topology,
    params: &ModelParams,
    source: CounterSource,
    size: impl Fn(usize, usize) -> usize,
) -> Selection {
    select_for(&Exchange::new(pattern.clone(), topo), topo, params, source, size)
}
