//! Rank-to-node placement of the simulated machine.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `num_procs` ranks placed contiguously, `ppn` per node. Rank `r` lives on
/// node `r / ppn` with local rank `r % ppn`; the last node may be partial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    num_procs: usize,
    ppn: usize,
}

impl Topology {
    pub fn new(num_procs: usize, ppn: usize) -> Result<Self> {
        if num_procs == 0 || ppn == 0 {
            return Err(Error::InvalidTopology(format!(
                "num_procs = {num_procs}, ppn = {ppn}; both must be at least 1"
            )));
        }
        Ok(Self { num_procs, ppn })
    }

    pub fn num_procs(&self) -> usize {
        self.num_procs
    }

    pub fn ppn(&self) -> usize {
        self.ppn
    }

    pub fn num_nodes(&self) -> usize {
        self.num_procs.div_ceil(self.ppn)
    }

    pub fn node_of(&self, rank: usize) -> Result<usize> {
        self.check_rank(rank)?;
        Ok(rank / self.ppn)
    }

    pub fn local_rank(&self, rank: usize) -> Result<usize> {
        self.check_rank(rank)?;
        Ok(rank % self.ppn)
    }

    pub fn ranks_on(&self, node: usize) -> Result<Range<usize>> {
        if node >= self.num_nodes() {
            return Err(Error::NodeOutOfRange {
                node,
                num_nodes: self.num_nodes(),
            });
        }
        Ok(self.node_ranks(node))
    }

    /// Whether two ranks share a node. Ranks must be in range.
    pub fn same_node(&self, a: usize, b: usize) -> bool {
        self.node(a) == self.node(b)
    }

    // Unchecked helpers for hot paths where ranks come from a validated
    // pattern.
    pub(crate) fn node(&self, rank: usize) -> usize {
        debug_assert!(rank < self.num_procs);
        rank / self.ppn
    }

    pub(crate) fn node_ranks(&self, node: usize) -> Range<usize> {
        let start = node * self.ppn;
        start..(start + self.ppn).min(self.num_procs)
    }

    /// The rank on `node` whose local rank is `key` modulo the node's size.
    pub(crate) fn representative(&self, node: usize, key: usize) -> usize {
        let ranks = self.node_ranks(node);
        ranks.start + key % ranks.len()
    }

    fn check_rank(&self, rank: usize) -> Result<()> {
        if rank >= self.num_procs {
            return Err(Error::RankOutOfRange {
                rank,
                num_procs: self.num_procs,
            });
        }
        Ok(())
    }
}
