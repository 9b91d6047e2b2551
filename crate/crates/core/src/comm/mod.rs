//! Communication patterns and the three schedules that realize them.
//!
//! A [`CommPattern`] says which global indices every rank must send to every
//! other rank. A [`CommSchedule`] is an executable plan for the same
//! deliveries:
//!
//! * **standard**: one message per pattern edge, regardless of placement;
//! * **NAP-2**: each rank merges everything bound for a remote node into one
//!   message (each index once) to a representative there, which scatters it;
//! * **NAP-3**: everything a node sends to another node is gathered onto one
//!   local rank, crosses the network as a single message, and is scattered
//!   on arrival.
//!
//! Intra-node pattern edges are carried as-is by every strategy.

mod counters;
mod exec;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::topology::Topology;

pub use counters::counters_from;
pub use exec::{
    execute, execute_matrix, execute_vector, Delivery, MessageLog, MessageRecord,
    NONZERO_BYTES, ROW_HEADER_BYTES, VALUE_BYTES,
};

/// Indices one rank exchanges with one peer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternEdge {
    pub peer: usize,
    /// Sorted, duplicate free.
    pub indices: Vec<usize>,
    pub inter_node: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankPattern {
    pub sends: Vec<PatternEdge>,
    pub recvs: Vec<PatternEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommPattern {
    ranks: Vec<RankPattern>,
}

impl CommPattern {
    /// Builds a pattern from each rank's receive lists `(source, indices)`;
    /// the send side is derived as their mirror image.
    pub fn from_receives(topo: &Topology, recvs: Vec<Vec<(usize, Vec<usize>)>>) -> Self {
        let p = topo.num_procs();
        assert_eq!(recvs.len(), p, "one receive list per rank");
        let mut ranks = vec![RankPattern::default(); p];
        let mut sends: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); p];
        for (dst, list) in recvs.into_iter().enumerate() {
            let mut merged: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (src, idx) in list {
                assert_ne!(src, dst, "a rank never receives from itself");
                merged.entry(src).or_default().extend(idx);
            }
            for (src, mut idx) in merged {
                idx.sort_unstable();
                idx.dedup();
                if idx.is_empty() {
                    continue;
                }
                sends[src].insert(dst, idx.clone());
                ranks[dst].recvs.push(PatternEdge {
                    peer: src,
                    indices: idx,
                    inter_node: !topo.same_node(src, dst),
                });
            }
        }
        for (src, map) in sends.into_iter().enumerate() {
            ranks[src].sends = map
                .into_iter()
                .map(|(dst, indices)| PatternEdge {
                    peer: dst,
                    indices,
                    inter_node: !topo.same_node(src, dst),
                })
                .collect();
        }
        Self { ranks }
    }

    /// The same edges with every direction flipped: what was received is now
    /// sent. Used for transpose products, where contributions flow back to
    /// the owners of the indices.
    pub fn reversed(&self) -> Self {
        let ranks = self
            .ranks
            .iter()
            .map(|r| RankPattern {
                sends: r.recvs.clone(),
                recvs: r.sends.clone(),
            })
            .collect();
        Self { ranks }
    }

    pub fn num_procs(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, r: usize) -> &RankPattern {
        &self.ranks[r]
    }

    pub fn ranks(&self) -> &[RankPattern] {
        &self.ranks
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.iter().all(|r| r.sends.is_empty())
    }

    pub fn num_edges(&self) -> usize {
        self.ranks.iter().map(|r| r.sends.len()).sum()
    }

    pub fn num_inter_node_edges(&self) -> usize {
        self.ranks
            .iter()
            .flat_map(|r| &r.sends)
            .filter(|e| e.inter_node)
            .count()
    }

    /// `(src, dst, index)` for every send, sorted.
    pub fn send_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out: Vec<_> = self
            .ranks
            .iter()
            .enumerate()
            .flat_map(|(src, r)| {
                r.sends
                    .iter()
                    .flat_map(move |e| e.indices.iter().map(move |&i| (src, e.peer, i)))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// `(src, dst, index)` for every receive, sorted.
    pub fn recv_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out: Vec<_> = self
            .ranks
            .iter()
            .enumerate()
            .flat_map(|(dst, r)| {
                r.recvs
                    .iter()
                    .flat_map(move |e| e.indices.iter().map(move |&i| (e.peer, dst, i)))
            })
            .collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Standard,
    Nap2,
    Nap3,
}

impl Strategy {
    /// Tie-break order: simpler strategies first.
    pub const ALL: [Strategy; 3] = [Strategy::Standard, Strategy::Nap2, Strategy::Nap3];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Standard => "standard",
            Strategy::Nap2 => "nap2",
            Strategy::Nap3 => "nap3",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "standard" => Ok(Strategy::Standard),
            "nap2" => Ok(Strategy::Nap2),
            "nap3" => Ok(Strategy::Nap3),
            other => Err(Error::Config {
                key: "strategy".into(),
                msg: format!("unknown strategy `{other}`"),
            }),
        }
    }
}

/// Execution phases, run in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepClass {
    /// An intra-node pattern edge sent directly.
    Intra,
    /// Moving data to the local rank that will send it off-node.
    LocalGather,
    InterNode,
    /// Redistribution from the receiving representative.
    LocalScatter,
}

impl StepClass {
    pub fn name(self) -> &'static str {
        match self {
            StepClass::Intra => "intra",
            StepClass::LocalGather => "local_gather",
            StepClass::InterNode => "inter_node",
            StepClass::LocalScatter => "local_scatter",
        }
    }
}

/// One payload entry: the value `index` as held by `origin`, together with
/// every rank that still needs it downstream of this transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub origin: usize,
    pub index: usize,
    pub dests: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub class: StepClass,
    pub src: usize,
    pub dst: usize,
    /// Sorted by `(origin, index)`.
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommSchedule {
    strategy: Strategy,
    num_procs: usize,
    transfers: Vec<Transfer>,
}

impl CommSchedule {
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn num_procs(&self) -> usize {
        self.num_procs
    }

    /// Transfers in execution order: by step class, then source, then
    /// destination.
    pub fn transfers(&self) -> &[Transfer] {
        &self.transfers
    }

    pub fn is_empty(&self) -> bool {
        self.transfers.is_empty()
    }

    pub fn count(&self, class: StepClass) -> usize {
        self.transfers.iter().filter(|t| t.class == class).count()
    }

    /// Same plan, ignoring which strategy produced it.
    pub fn same_transfers(&self, other: &CommSchedule) -> bool {
        self.transfers == other.transfers
    }
}

/// Collects items per `(class, src, dst)`, merging destination sets of
/// repeated items.
#[derive(Default)]
struct Planner {
    transfers: BTreeMap<(StepClass, usize, usize), BTreeMap<(usize, usize), Vec<usize>>>,
}

impl Planner {
    fn push(&mut self, class: StepClass, src: usize, dst: usize, origin: usize, index: usize, dests: &[usize]) {
        debug_assert_ne!(src, dst);
        let d = self
            .transfers
            .entry((class, src, dst))
            .or_default()
            .entry((origin, index))
            .or_default();
        d.extend_from_slice(dests);
        d.sort_unstable();
        d.dedup();
    }

    fn finish(self, strategy: Strategy, num_procs: usize) -> CommSchedule {
        let transfers = self
            .transfers
            .into_iter()
            .map(|((class, src, dst), items)| Transfer {
                class,
                src,
                dst,
                items: items
                    .into_iter()
                    .map(|((origin, index), dests)| Item {
                        origin,
                        index,
                        dests,
                    })
                    .collect(),
            })
            .collect();
        CommSchedule {
            strategy,
            num_procs,
            transfers,
        }
    }
}

/// Intra-node edges go straight to the planner; the inter-node ones are
/// returned as `(src, dst, index)`.
fn split_edges(pattern: &CommPattern, planner: &mut Planner) -> Vec<(usize, usize, usize)> {
    let mut inter = Vec::new();
    for (src, rank) in pattern.ranks().iter().enumerate() {
        for e in &rank.sends {
            for &i in &e.indices {
                if e.inter_node {
                    inter.push((src, e.peer, i));
                } else {
                    planner.push(StepClass::Intra, src, e.peer, src, i, &[e.peer]);
                }
            }
        }
    }
    inter
}

pub fn build_standard(pattern: &CommPattern, topo: &Topology) -> CommSchedule {
    let mut planner = Planner::default();
    for (src, dst, i) in split_edges(pattern, &mut planner) {
        planner.push(StepClass::InterNode, src, dst, src, i, &[dst]);
    }
    planner.finish(Strategy::Standard, topo.num_procs())
}

/// Two-step: every rank sends one message per destination node, to the rank
/// on that node with local rank `node_of(src) mod ppn`, which then scatters.
pub fn build_nap2(pattern: &CommPattern, topo: &Topology) -> CommSchedule {
    let mut planner = Planner::default();
    // (src, dst node) -> (index -> final destinations)
    let mut grouped: BTreeMap<(usize, usize), BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    for (src, dst, i) in split_edges(pattern, &mut planner) {
        grouped
            .entry((src, topo.node(dst)))
            .or_default()
            .entry(i)
            .or_default()
            .push(dst);
    }
    for ((src, node), items) in grouped {
        let rep = topo.representative(node, topo.node(src));
        for (i, dests) in items {
            planner.push(StepClass::InterNode, src, rep, src, i, &dests);
            for &d in dests.iter().filter(|&&d| d != rep) {
                planner.push(StepClass::LocalScatter, rep, d, src, i, &[d]);
            }
        }
    }
    planner.finish(Strategy::Nap2, topo.num_procs())
}

/// Three-step: for each ordered node pair `(n, m)`, data is gathered on the
/// rank of `n` with local rank `m mod ppn`, sent as a single message to the
/// rank of `m` with local rank `n mod ppn`, and scattered there.
pub fn build_nap3(pattern: &CommPattern, topo: &Topology) -> CommSchedule {
    let mut planner = Planner::default();
    // (src node, dst node) -> ((origin, index) -> final destinations)
    let mut grouped: BTreeMap<(usize, usize), BTreeMap<(usize, usize), Vec<usize>>> =
        BTreeMap::new();
    for (src, dst, i) in split_edges(pattern, &mut planner) {
        grouped
            .entry((topo.node(src), topo.node(dst)))
            .or_default()
            .entry((src, i))
            .or_default()
            .push(dst);
    }
    for ((n, m), items) in grouped {
        let gatherer = topo.representative(n, m);
        let receiver = topo.representative(m, n);
        for ((origin, i), dests) in items {
            if origin != gatherer {
                planner.push(StepClass::LocalGather, origin, gatherer, origin, i, &dests);
            }
            planner.push(StepClass::InterNode, gatherer, receiver, origin, i, &dests);
            for &d in dests.iter().filter(|&&d| d != receiver) {
                planner.push(StepClass::LocalScatter, receiver, d, origin, i, &[d]);
            }
        }
    }
    planner.finish(Strategy::Nap3, topo.num_procs())
}

pub fn build_schedule(strategy: Strategy, pattern: &CommPattern, topo: &Topology) -> CommSchedule {
    match strategy {
        Strategy::Standard => build_standard(pattern, topo),
        Strategy::Nap2 => build_nap2(pattern, topo),
        Strategy::Nap3 => build_nap3(pattern, topo),
    }
}

/// A pattern with all three candidate schedules built, plus the strategy
/// currently used to execute it.
#[derive(Debug, Clone)]
pub struct Exchange {
    pattern: CommPattern,
    schedules: [CommSchedule; 3],
    active: Strategy,
}

impl Exchange {
    pub fn new(pattern: CommPattern, topo: &Topology) -> Self {
        let schedules = Strategy::ALL.map(|s| build_schedule(s, &pattern, topo));
        Self {
            pattern,
            schedules,
            active: Strategy::Standard,
        }
    }

    pub fn pattern(&self) -> &CommPattern {
        &self.pattern
    }

    pub fn schedule(&self, s: Strategy) -> &CommSchedule {
        &self.schedules[s.index()]
    }

    pub fn active(&self) -> Strategy {
        self.active
    }

    pub fn set_active(&mut self, s: Strategy) {
        self.active = s;
    }

    pub fn active_schedule(&self) -> &CommSchedule {
        self.schedule(self.active)
    }

    pub fn reversed(&self, topo: &Topology) -> Self {
        let mut ex = Self::new(self.pattern.reversed(), topo);
        ex.active = self.active;
        ex
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(topo: &Topology, triples: &[(usize, usize, usize)]) -> CommPattern {
        let mut recvs = vec![Vec::new(); topo.num_procs()];
        for &(src, dst, i) in triples {
            recvs[dst].push((src, vec![i]));
        }
        CommPattern::from_receives(topo, recvs)
    }

    #[test]
    fn empty_pattern_empty_schedules() {
        let topo = Topology::new(4, 2).unwrap();
        let p = pattern(&topo, &[]);
        for s in Strategy::ALL {
            assert!(build_schedule(s, &p, &topo).is_empty());
        }
    }

    #[test]
    fn mirror_sends() {
        let topo = Topology::new(4, 2).unwrap();
        let p = pattern(&topo, &[(0, 2, 1), (1, 2, 5), (0, 3, 1)]);
        assert_eq!(p.send_triples(), p.recv_triples());
        assert_eq!(p.rank(0).sends.len(), 2);
        assert_eq!(p.reversed().reversed(), p);
    }

    #[test]
    fn nap3_gather_on_modular_rank() {
        // Ranks 0..4 on node 0, 4..8 on node 1; node 0 gathers for node 1 on
        // local rank 1, node 1 receives on local rank 0.
        let topo = Topology::new(8, 4).unwrap();
        let p = pattern(&topo, &[(0, 5, 0), (2, 5, 2)]);
        let s = build_nap3(&p, &topo);
        let inter: Vec<_> = s.transfers().iter().filter(|t| t.class == StepClass::InterNode).collect();
        assert_eq!(inter.len(), 1);
        assert_eq!((inter[0].src, inter[0].dst), (1, 4));
        assert_eq!(s.count(StepClass::LocalGather), 2);
        assert_eq!(s.count(StepClass::LocalScatter), 1);
    }

    #[test]
    fn nap2_representative() {
        let topo = Topology::new(8, 4).unwrap();
        let p = pattern(&topo, &[(6, 1, 6), (6, 2, 6)]);
        let s = build_nap2(&p, &topo);
        let inter: Vec<_> = s.transfers().iter().filter(|t| t.class == StepClass::InterNode).collect();
        assert_eq!(inter.len(), 1);
        // source node 1 -> local rank 1 on node 0
        assert_eq!(inter[0].dst, 1);
        assert_eq!(inter[0].items.len(), 1);
        assert_eq!(inter[0].items[0].dests, vec![1, 2]);
        assert_eq!(s.count(StepClass::LocalScatter), 1);
    }

    #[test]
    fn strategy_parse() {
        assert_eq!("nap2".parse::<Strategy>().unwrap(), Strategy::Nap2);
        assert!("nap4".parse::<Strategy>().is_err());
    }
}
