//! Deterministic execution of a schedule.
//!
//! Transfers run strictly in schedule order, which already groups them by
//! step class. A rank may only forward payload it originated or received
//! earlier; anything else is a planning bug and surfaces as
//! [`Error::MissingPayload`].

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use super::{CommSchedule, StepClass};
use crate::error::{Error, Result};
use crate::partition::{PartitionedMatrix, PartitionedVector};

/// Bytes per vector value.
pub const VALUE_BYTES: usize = 8;
/// Bytes per matrix nonzero: 4-byte column plus 8-byte value.
pub const NONZERO_BYTES: usize = 12;
/// Bytes per transferred matrix row: row id plus entry count.
pub const ROW_HEADER_BYTES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MessageRecord {
    pub class: StepClass,
    pub src: usize,
    pub dst: usize,
    pub bytes: usize,
    pub inter_node: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageLog {
    records: Vec<MessageRecord>,
}

impl MessageLog {
    /// The log executing `schedule` would produce, given the byte size of
    /// each `(origin, index)` payload.
    pub fn for_schedule(schedule: &CommSchedule, size: impl Fn(usize, usize) -> usize) -> Self {
        let records = schedule
            .transfers()
            .iter()
            .map(|t| MessageRecord {
                class: t.class,
                src: t.src,
                dst: t.dst,
                bytes: t.items.iter().map(|it| size(it.origin, it.index)).sum(),
                inter_node: t.class == StepClass::InterNode,
            })
            .collect();
        Self { records }
    }

    pub fn records(&self) -> &[MessageRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn inter_node_messages(&self) -> usize {
        self.records.iter().filter(|r| r.inter_node).count()
    }

    pub fn inter_node_bytes(&self) -> usize {
        self.records.iter().filter(|r| r.inter_node).map(|r| r.bytes).sum()
    }

    pub fn intra_node_messages(&self) -> usize {
        self.records.iter().filter(|r| !r.inter_node).count()
    }

    pub fn intra_node_bytes(&self) -> usize {
        self.records.iter().filter(|r| !r.inter_node).map(|r| r.bytes).sum()
    }

    pub const CSV_HEADER: &'static str = "step_class,src,dst,bytes,inter_node";

    /// `step_class,src,dst,bytes,inter_node`, one line per transfer.
    pub fn write_csv(&self, w: &mut impl Write, header: bool) -> io::Result<()> {
        if header {
            writeln!(w, "{}", Self::CSV_HEADER)?;
        }
        for r in &self.records {
            writeln!(w, "{}", Self::csv_row(r))?;
        }
        Ok(())
    }

    pub fn csv_row(r: &MessageRecord) -> String {
        format!(
            "{},{},{},{},{}",
            r.class.name(),
            r.src,
            r.dst,
            r.bytes,
            r.inter_node
        )
    }
}

/// Payload delivered to one rank, keyed by `(index, origin)`.
pub type Delivery<T> = BTreeMap<(usize, usize), T>;

/// Runs `schedule`, pulling each payload from its origin via `fetch`.
///
/// Returns, per rank, every item whose destination list named that rank,
/// plus the log of transfers with byte counts from `size`.
pub fn execute<T: Clone>(
    schedule: &CommSchedule,
    mut fetch: impl FnMut(usize, usize) -> T,
    size: impl Fn(&T) -> usize,
) -> Result<(Vec<Delivery<T>>, MessageLog)> {
    let p = schedule.num_procs();
    let mut held: Vec<BTreeMap<(usize, usize), T>> = vec![BTreeMap::new(); p];
    let mut delivered: Vec<Delivery<T>> = vec![BTreeMap::new(); p];
    let mut log = MessageLog::default();

    for t in schedule.transfers() {
        let mut bytes = 0;
        for item in &t.items {
            let key = (item.origin, item.index);
            let payload = match held[t.src].get(&key) {
                Some(v) => v.clone(),
                None if item.origin == t.src => fetch(item.origin, item.index),
                None => {
                    return Err(Error::MissingPayload {
                        src: t.src,
                        origin: item.origin,
                        index: item.index,
                    })
                }
            };
            bytes += size(&payload);
            if item.dests.contains(&t.dst) {
                delivered[t.dst].insert((item.index, item.origin), payload.clone());
            }
            held[t.dst].insert(key, payload);
        }
        log.records.push(MessageRecord {
            class: t.class,
            src: t.src,
            dst: t.dst,
            bytes,
            inter_node: t.class == StepClass::InterNode,
        });
    }
    Ok((delivered, log))
}

/// Exchanges owned vector values. Each rank gets `index -> value` for every
/// index its pattern receives.
pub fn execute_vector(
    schedule: &CommSchedule,
    x: &PartitionedVector,
) -> Result<(Vec<BTreeMap<usize, f64>>, MessageLog)> {
    let part = x.partition();
    let (delivered, log) = execute(
        schedule,
        |origin, index| {
            debug_assert_eq!(part.owner(index), origin);
            x.part(origin)[index - part.range(origin).start]
        },
        |_| VALUE_BYTES,
    )?;
    let out = delivered
        .into_iter()
        .map(|d| d.into_iter().map(|((i, _), v)| (i, v)).collect())
        .collect();
    Ok((out, log))
}

/// Exchanges whole rows of `b`; indices in the schedule are row numbers.
/// Each rank gets `row -> [(global column, value)]`.
#[allow(clippy::type_complexity)]
pub fn execute_matrix(
    schedule: &CommSchedule,
    b: &PartitionedMatrix,
) -> Result<(Vec<BTreeMap<usize, Vec<(usize, f64)>>>, MessageLog)> {
    let part = b.row_partition();
    let (delivered, log) = execute(
        schedule,
        |origin, row| {
            debug_assert_eq!(part.owner(row), origin);
            b.block(origin).row_global(row - part.range(origin).start)
        },
        |row: &Vec<(usize, f64)>| ROW_HEADER_BYTES + NONZERO_BYTES * row.len(),
    )?;
    let out = delivered
        .into_iter()
        .map(|d| d.into_iter().map(|((i, _), r)| (i, r)).collect())
        .collect();
    Ok((out, log))
}
