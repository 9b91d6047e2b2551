use std::collections::{BTreeMap, BTreeSet};

use super::{MessageLog, StepClass};
use crate::model::CommCounters;
use crate::topology::Topology;

#[derive(Default)]
struct Side {
    msgs: usize,
    bytes: usize,
    nodes: BTreeSet<usize>,
}

/// Reduces a log to the quantities the performance models consume.
///
/// Every maximum is taken over both directions: a rank's `n_proc` is the
/// larger of the number of ranks it sends to and receives from, and a node's
/// bytes are the larger of what it injects and what it absorbs.
pub fn counters_from(log: &MessageLog, topo: &Topology) -> CommCounters {
    let p = topo.num_procs();
    let nodes = topo.num_nodes();
    let mut rank_send: Vec<Side> = (0..p).map(|_| Side::default()).collect();
    let mut rank_recv: Vec<Side> = (0..p).map(|_| Side::default()).collect();
    let mut node_send: Vec<Side> = (0..nodes).map(|_| Side::default()).collect();
    let mut node_recv: Vec<Side> = (0..nodes).map(|_| Side::default()).collect();
    let mut pair_bytes: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    let mut c = CommCounters {
        ppn: topo.ppn(),
        ..CommCounters::default()
    };

    for r in log.records() {
        match r.class {
            StepClass::Intra => continue,
            StepClass::LocalGather | StepClass::LocalScatter => {
                c.intra_messages += 1;
                c.intra_bytes += r.bytes;
                c.max_message_bytes = c.max_message_bytes.max(r.bytes);
                continue;
            }
            StepClass::InterNode => {}
        }
        c.max_message_bytes = c.max_message_bytes.max(r.bytes);
        let (ns, nd) = (topo.node(r.src), topo.node(r.dst));
        for (side, peer_node) in [(&mut rank_send[r.src], nd), (&mut rank_recv[r.dst], ns)] {
            side.msgs += 1;
            side.bytes += r.bytes;
            side.nodes.insert(peer_node);
        }
        for (side, peer_node) in [(&mut node_send[ns], nd), (&mut node_recv[nd], ns)] {
            side.msgs += 1;
            side.bytes += r.bytes;
            side.nodes.insert(peer_node);
        }
        *pair_bytes.entry((ns, nd)).or_default() += r.bytes;
    }

    for side in rank_send.iter().chain(&rank_recv) {
        c.n_proc = c.n_proc.max(side.msgs);
        c.s_proc = c.s_proc.max(side.bytes);
        c.n_proc2node = c.n_proc2node.max(side.nodes.len());
    }
    for side in node_send.iter().chain(&node_recv) {
        c.s_node = c.s_node.max(side.bytes);
        c.n_node2node = c.n_node2node.max(side.nodes.len());
    }
    c.s_node2node = pair_bytes.values().copied().max().unwrap_or(0);
    c
}
