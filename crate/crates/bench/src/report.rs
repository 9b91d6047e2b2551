//! Report types and their JSON/CSV renderings.
//!
//! `levels.csv` columns:
//! `level,rows,nnz,channel,kind,strategy,chosen,executed,inter_messages,
//! inter_bytes,intra_messages,intra_bytes,n_proc,s_proc,s_node,n_proc2node,
//! n_node2node,s_node2node,model_total,model_latency,model_bandwidth,model_intra`,
//! one row per level, channel and strategy.
//!
//! `messages.csv` columns:
//! `level,channel,strategy,step_class,src,dst,bytes,inter_node`, one row per
//! message of every candidate schedule.

use std::io::Write;

use nap_amg::amg::Channel;
use nap_amg::model::ModelEstimate;
use nap_amg::{CommCounters, Hierarchy, MessageLog, SolveOptions, Strategy};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub topology: TopologyReport,
    pub levels: Vec<LevelReport>,
    pub operator_complexity: f64,
    /// Sums over every channel of every level, one entry per strategy
    /// followed by `executed`.
    pub totals: Vec<TotalsReport>,
    pub solve: SolveReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub procs: usize,
    pub ppn: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub rows: usize,
    pub nnz: usize,
    /// Shape of `P` from the next coarser level; absent on the coarsest.
    pub interp: Option<InterpReport>,
    pub channels: Vec<ChannelReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpReport {
    pub coarse_rows: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Vector,
    Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    /// `spmv`, `spgemm`, `galerkin`, `interpolate` or `restrict`.
    pub name: String,
    pub kind: ChannelKind,
    /// The model's pick.
    pub chosen: Strategy,
    /// What setup and solve actually ran; differs from `chosen` only under
    /// a strategy override.
    pub executed: Strategy,
    /// Modeled standard cost over the cheaper node-aware cost.
    pub nap_speedup: Option<f64>,
    pub strategies: Vec<StrategyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub inter_messages: usize,
    pub inter_bytes: usize,
    pub intra_messages: usize,
    pub intra_bytes: usize,
    /// What the model was fed.
    pub counters: CommCounters,
    pub model: ModelEstimate,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TotalsReport {
    pub strategy: String,
    pub inter_messages: usize,
    pub inter_bytes: usize,
    pub intra_messages: usize,
    pub intra_bytes: usize,
    pub modeled_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub options: SolveOptions,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Relative residuals, starting at 1. Empty when the solve diverged.
    pub history: Vec<f64>,
    pub final_residual: f64,
}

impl Report {
    pub fn level_channels(&self) -> impl Iterator<Item = (usize, &ChannelReport)> {
        self.levels
            .iter()
            .flat_map(|l| l.channels.iter().map(move |c| (l.level, c)))
    }

    pub fn totals_for(&self, name: &str) -> Option<&TotalsReport> {
        self.totals.iter().find(|t| t.strategy == name)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

impl ChannelReport {
    pub fn strategy(&self, s: Strategy) -> &StrategyReport {
        &self.strategies[s.index()]
    }
}

/// Channels of a level, in report order.
pub(crate) fn level_channels(level: &nap_amg::amg::Level) -> Vec<(&'static str, ChannelKind, &Channel)> {
    let mut out = vec![("spmv", ChannelKind::Vector, &level.spmv)];
    if let Some(i) = &level.interp {
        out.extend([
            ("spgemm", ChannelKind::Matrix, &i.spgemm),
            ("galerkin", ChannelKind::Matrix, &i.galerkin),
            ("interpolate", ChannelKind::Vector, &i.interpolate),
            ("restrict", ChannelKind::Vector, &i.restrict),
        ]);
    }
    out
}

fn channel_report(name: &str, kind: ChannelKind, ch: &Channel) -> ChannelReport {
    let strategies = Strategy::ALL
        .iter()
        .map(|&s| {
            let log = ch.log(s);
            StrategyReport {
                strategy: s,
                inter_messages: log.inter_node_messages(),
                inter_bytes: log.inter_node_bytes(),
                intra_messages: log.intra_node_messages(),
                intra_bytes: log.intra_node_bytes(),
                counters: ch.selection.counters[s.index()],
                model: *ch.selection.estimate(s),
            }
        })
        .collect();
    ChannelReport {
        name: name.to_string(),
        kind,
        chosen: ch.selection.chosen,
        executed: ch.strategy,
        nap_speedup: ch.selection.nap_speedup(),
        strategies,
    }
}

pub(crate) fn level_reports(h: &Hierarchy) -> Vec<LevelReport> {
    h.levels
        .iter()
        .enumerate()
        .map(|(l, level)| LevelReport {
            level: l,
            rows: level.rows(),
            nnz: level.nnz(),
            interp: level.interp.as_ref().map(|i| InterpReport {
                coarse_rows: i.p.global_cols(),
                nnz: i.p.nnz(),
            }),
            channels: level_channels(level)
                .into_iter()
                .map(|(name, kind, ch)| channel_report(name, kind, ch))
                .collect(),
        })
        .collect()
}

pub(crate) fn totals(levels: &[LevelReport]) -> Vec<TotalsReport> {
    let mut out: Vec<TotalsReport> = Strategy::ALL
        .iter()
        .map(|s| TotalsReport {
            strategy: s.name().to_string(),
            ..TotalsReport::default()
        })
        .collect();
    out.push(TotalsReport {
        strategy: "executed".into(),
        ..TotalsReport::default()
    });
    for c in levels.iter().flat_map(|l| &l.channels) {
        for (slot, s) in Strategy::ALL.iter().map(|&s| (s.index(), s)).chain([(3, c.executed)]) {
            let r = c.strategy(s);
            let t = &mut out[slot];
            t.inter_messages += r.inter_messages;
            t.inter_bytes += r.inter_bytes;
            t.intra_messages += r.intra_messages;
            t.intra_bytes += r.intra_bytes;
            t.modeled_time += r.model.total;
        }
    }
    out
}

#[derive(Serialize)]
struct LevelRow<'a> {
    level: usize,
    rows: usize,
    nnz: usize,
    channel: &'a str,
    kind: ChannelKind,
    strategy: Strategy,
    chosen: Strategy,
    executed: Strategy,
    inter_messages: usize,
    inter_bytes: usize,
    intra_messages: usize,
    intra_bytes: usize,
    n_proc: usize,
    s_proc: usize,
    s_node: usize,
    n_proc2node: usize,
    n_node2node: usize,
    s_node2node: usize,
    model_total: f64,
    model_latency: f64,
    model_bandwidth: f64,
    model_intra: f64,
}

pub fn write_levels_csv(report: &Report, w: impl Write) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for l in &report.levels {
        for c in &l.channels {
            for s in &c.strategies {
                let k = &s.counters;
                out.serialize(LevelRow {
                    level: l.level,
                    rows: l.rows,
                    nnz: l.nnz,
                    channel: &c.name,
                    kind: c.kind,
                    strategy: s.strategy,
                    chosen: c.chosen,
                    executed: c.executed,
                    inter_messages: s.inter_messages,
                    inter_bytes: s.inter_bytes,
                    intra_messages: s.intra_messages,
                    intra_bytes: s.intra_bytes,
                    n_proc: k.n_proc,
                    s_proc: k.s_proc,
                    s_node: k.s_node,
                    n_proc2node: k.n_proc2node,
                    n_node2node: k.n_node2node,
                    s_node2node: k.s_node2node,
                    model_total: s.model.total,
                    model_latency: s.model.latency,
                    model_bandwidth: s.model.bandwidth,
                    model_intra: s.model.intra,
                })?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MessageRow<'a> {
    level: usize,
    channel: &'a str,
    strategy: Strategy,
    step_class: &'static str,
    src: usize,
    dst: usize,
    bytes: usize,
    inter_node: bool,
}

pub const MESSAGES_HEADER: [&str; 8] = [
    "level", "channel", "strategy", "step_class", "src", "dst", "bytes", "inter_node",
];

pub fn write_messages_csv(h: &Hierarchy, w: impl Write) -> csv::Result<()> {
    // Header written by hand so an empty exchange set still gets one.
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(MESSAGES_HEADER)?;
    for (l, level) in h.levels.iter().enumerate() {
        for (name, _, ch) in level_channels(level) {
            for s in Strategy::ALL {
                write_log(&mut out, l, name, s, ch.log(s))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn write_log<W: Write>(
    out: &mut csv::Writer<W>,
    level: usize,
    channel: &str,
    strategy: Strategy,
    log: &MessageLog,
) -> csv::Result<()> {
    for r in log.records() {
        out.serialize(MessageRow {
            level,
            channel,
            strategy,
            step_class: r.class.name(),
            src: r.src,
            dst: r.dst,
            bytes: r.bytes,
            inter_node: r.inter_node,
        })?;
    }
    Ok(())
}
