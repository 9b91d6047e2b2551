//! Distributed kernels driven by a communication schedule.
//!
//! Every kernel fetches remote data by executing the schedule it is given,
//! then computes each rank's share locally. Arithmetic never depends on the
//! schedule: values are combined in global column order, and contributions
//! to remotely owned rows are summed in source-rank order, so all three
//! strategies produce bitwise identical results.

use std::collections::BTreeMap;

use crate::comm::{
    execute, execute_matrix, execute_vector, CommSchedule, MessageLog, NONZERO_BYTES,
    ROW_HEADER_BYTES, VALUE_BYTES,
};
use crate::error::{Error, Result};
use crate::partition::{LocalBlock, PartitionedMatrix, PartitionedVector, RowPartition};
use crate::sparse::RowAccumulator;

fn check_ranks(op: &'static str, schedule: &CommSchedule, p: usize) -> Result<()> {
    if schedule.num_procs() != p {
        return Err(Error::DimensionMismatch {
            op,
            expected: p,
            found: schedule.num_procs(),
        });
    }
    Ok(())
}

fn check_partition(op: &'static str, expected: &RowPartition, found: &RowPartition) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            op,
            expected: expected.global_rows(),
            found: found.global_rows(),
        });
    }
    Ok(())
}

/// `y = A x`. `schedule` must realize the vector pattern of `a`.
pub fn spmv(
    a: &PartitionedMatrix,
    x: &PartitionedVector,
    schedule: &CommSchedule,
) -> Result<(PartitionedVector, MessageLog)> {
    check_ranks("dist::spmv", schedule, a.num_procs())?;
    check_partition("dist::spmv", a.col_partition(), x.partition())?;
    let (recv, log) = execute_vector(schedule, x)?;
    let parts = a
        .blocks()
        .iter()
        .zip(&recv)
        .enumerate()
        .map(|(rank, (block, got))| {
            let local = x.part(rank);
            let col_first = a.col_partition().range(rank).start;
            let off: Vec<f64> = block
                .off_proc_col_map()
                .iter()
                .map(|g| got[g])
                .collect();
            (0..block.n_rows())
                .map(|i| {
                    let mut acc = 0.0;
                    visit_values(block, i, col_first, local, &off, |v| acc += v);
                    acc
                })
                .collect()
        })
        .collect();
    Ok((
        PartitionedVector::from_parts(a.row_partition().clone(), parts),
        log,
    ))
}

/// Calls `f(a_ij * x_j)` for local row `i` in ascending global column order.
fn visit_values(
    block: &LocalBlock,
    i: usize,
    col_first: usize,
    local: &[f64],
    off: &[f64],
    mut f: impl FnMut(f64),
) {
    let (on_c, on_v) = block.on_proc().row(i);
    let (off_c, off_v) = block.off_proc().row(i);
    let map = block.off_proc_col_map();
    let (mut a, mut b) = (0, 0);
    while a < on_c.len() || b < off_c.len() {
        let take_on = match (on_c.get(a), off_c.get(b)) {
            (Some(&c), Some(&k)) => c + col_first < map[k],
            (Some(_), None) => true,
            _ => false,
        };
        if take_on {
            f(on_v[a] * local[on_c[a]]);
            a += 1;
        } else {
            f(off_v[b] * off[off_c[b]]);
            b += 1;
        }
    }
}

/// Sums `(origin, value)` contributions in origin order, starting from the
/// first one.
fn ordered_sum(mut terms: Vec<(usize, f64)>) -> f64 {
    terms.sort_by_key(|&(origin, _)| origin);
    let mut it = terms.into_iter().map(|(_, v)| v);
    match it.next() {
        Some(first) => it.fold(first, |acc, v| acc + v),
        None => 0.0,
    }
}

/// `y = Aᵀ x`, with `x` split like the rows of `a` and `y` like its columns.
/// `schedule` must realize the reversed vector pattern of `a`.
pub fn spmv_transpose(
    a: &PartitionedMatrix,
    x: &PartitionedVector,
    schedule: &CommSchedule,
) -> Result<(PartitionedVector, MessageLog)> {
    let p = a.num_procs();
    check_ranks("dist::spmv_transpose", schedule, p)?;
    check_partition("dist::spmv_transpose", a.row_partition(), x.partition())?;
    let cols = a.col_partition();

    // Per rank, partial sums keyed by global column.
    let partials: Vec<BTreeMap<usize, f64>> = a
        .blocks()
        .iter()
        .enumerate()
        .map(|(rank, block)| {
            let xr = x.part(rank);
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (i, &xi) in xr.iter().enumerate() {
                block.visit_row(i, |j, v| {
                    let t = v * xi;
                    acc.entry(j).and_modify(|s| *s += t).or_insert(t);
                });
            }
            acc
        })
        .collect();

    let (recv, log) = execute(
        schedule,
        |origin, j| partials[origin].get(&j).copied().unwrap_or(0.0),
        |_| VALUE_BYTES,
    )?;

    let parts = (0..p)
        .map(|rank| {
            cols.range(rank)
                .map(|j| {
                    let mut terms: Vec<(usize, f64)> = recv[rank]
                        .range((j, 0)..(j + 1, 0))
                        .map(|(&(_, origin), &v)| (origin, v))
                        .collect();
                    if let Some(&v) = partials[rank].get(&j) {
                        terms.push((rank, v));
                    }
                    ordered_sum(terms)
                })
                .collect()
        })
        .collect();
    Ok((PartitionedVector::from_parts(cols.clone(), parts), log))
}

/// `C = A B`. Rows of `b` matching the off-process columns of `a` are
/// fetched through `schedule`, which must realize the vector pattern of `a`.
pub fn spgemm(
    a: &PartitionedMatrix,
    b: &PartitionedMatrix,
    schedule: &CommSchedule,
) -> Result<(PartitionedMatrix, MessageLog)> {
    check_ranks("dist::spgemm", schedule, a.num_procs())?;
    check_partition("dist::spgemm", a.col_partition(), b.row_partition())?;
    let (recv, log) = execute_matrix(schedule, b)?;
    let b_rows = b.row_partition();
    let width = b.global_cols();
    let mut acc = RowAccumulator::new(width);

    let mut rows = Vec::with_capacity(a.num_procs());
    for (rank, block) in a.blocks().iter().enumerate() {
        let own = b.block(rank);
        let first = b_rows.range(rank).start;
        let mut local = Vec::with_capacity(block.n_rows());
        for i in 0..block.n_rows() {
            block.visit_row(i, |k, a_ik| {
                if b_rows.owner(k) == rank {
                    own.visit_row(k - first, |j, b_kj| acc.add(j, a_ik * b_kj));
                } else {
                    for &(j, b_kj) in &recv[rank][&k] {
                        acc.add(j, a_ik * b_kj);
                    }
                }
            });
            local.push(acc.drain_row());
        }
        rows.push(local);
    }
    let c = PartitionedMatrix::from_local_rows(
        a.row_partition().clone(),
        b.col_partition().clone(),
        rows,
    )?;
    Ok((c, log))
}

/// `C = Aᵀ B` for `a` and `b` split over the same rows. Each rank forms the
/// rows of `C` its rows of `a` touch and ships the remotely owned ones to
/// their owners, which add them in source-rank order.
///
/// Built in two phases so the payload sizes are known before a schedule is
/// picked: [`TransposeProduct::new`] does the local work, and
/// [`TransposeProduct::finish`] communicates and combines.
#[derive(Debug, Clone)]
pub struct TransposeProduct {
    c_rows: RowPartition,
    c_cols: RowPartition,
    /// `partials[rank][j]` is row `j` of the rank's share of `C`.
    partials: Vec<BTreeMap<usize, Vec<(usize, f64)>>>,
}

impl TransposeProduct {
    pub fn new(a: &PartitionedMatrix, b: &PartitionedMatrix) -> Result<Self> {
        check_partition("dist::transpose_spgemm", a.row_partition(), b.row_partition())?;
        let partials = (0..a.num_procs())
            .map(|rank| {
                let (ab, bb) = (a.block(rank), b.block(rank));
                let mut acc: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
                for i in 0..ab.n_rows() {
                    let b_row = bb.row_global(i);
                    ab.visit_row(i, |j, a_ij| {
                        let row = acc.entry(j).or_default();
                        for &(k, b_ik) in &b_row {
                            let t = a_ij * b_ik;
                            row.entry(k).and_modify(|s| *s += t).or_insert(t);
                        }
                    });
                }
                acc.into_iter()
                    .map(|(j, row)| (j, row.into_iter().collect()))
                    .collect()
            })
            .collect();
        Ok(Self {
            c_rows: a.col_partition().clone(),
            c_cols: b.col_partition().clone(),
            partials,
        })
    }

    /// Bytes of the partial row `j` formed on `origin`.
    pub fn payload_bytes(&self, origin: usize, j: usize) -> usize {
        let nnz = self.partials[origin].get(&j).map_or(0, Vec::len);
        ROW_HEADER_BYTES + NONZERO_BYTES * nnz
    }

    /// Ships partial rows to their owners. `schedule` must realize the
    /// reversed vector pattern of `a`.
    pub fn finish(&self, schedule: &CommSchedule) -> Result<(PartitionedMatrix, MessageLog)> {
        let p = self.partials.len();
        check_ranks("dist::transpose_spgemm", schedule, p)?;
        let (recv, log) = execute(
            schedule,
            |origin, j| self.partials[origin].get(&j).cloned().unwrap_or_default(),
            |row: &Vec<(usize, f64)>| ROW_HEADER_BYTES + NONZERO_BYTES * row.len(),
        )?;

        let mut acc = RowAccumulator::new(self.c_cols.global_rows());
        let mut rows = Vec::with_capacity(p);
        for rank in 0..p {
            let mut local = Vec::with_capacity(self.c_rows.local_len(rank));
            for j in self.c_rows.range(rank) {
                let mut terms: Vec<(usize, &Vec<(usize, f64)>)> = recv[rank]
                    .range((j, 0)..(j + 1, 0))
                    .map(|(&(_, origin), row)| (origin, row))
                    .collect();
                if let Some(row) = self.partials[rank].get(&j) {
                    terms.push((rank, row));
                }
                terms.sort_by_key(|t| t.0);
                for (_, row) in terms {
                    for &(k, v) in row {
                        acc.add(k, v);
                    }
                }
                local.push(acc.drain_row());
            }
            rows.push(local);
        }
        let c = PartitionedMatrix::from_local_rows(self.c_rows.clone(), self.c_cols.clone(), rows)?;
        Ok((c, log))
    }
}

/// `C = Aᵀ B`; see [`TransposeProduct`].
pub fn transpose_spgemm(
    a: &PartitionedMatrix,
    b: &PartitionedMatrix,
    schedule: &CommSchedule,
) -> Result<(PartitionedMatrix, MessageLog)> {
    check_ranks("dist::transpose_spgemm", schedule, a.num_procs())?;
    TransposeProduct::new(a, b)?.finish(schedule)
}
