//! Row-wise distribution of matrices and vectors across simulated ranks.
//!
//! Each rank owns a contiguous block of rows. Its rows are split into an
//! on-process block (columns whose vector entries the rank owns, stored with
//! local column indices) and an off-process block whose columns are
//! compressed through `off_proc_col_map`. The off-process columns are exactly
//! what a rank must receive before it can multiply.

use std::ops::Range;

use crate::comm::CommPattern;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::topology::Topology;

/// Contiguous block partition of `0..global_rows`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPartition {
    first_row: Vec<usize>,
}

impl RowPartition {
    /// Rank `r` gets rows `ceil(r n / p) .. ceil((r + 1) n / p)`, which is the
    /// inverse of `row -> floor(row p / n)`.
    pub fn balanced(global_rows: usize, num_procs: usize) -> Self {
        assert!(num_procs > 0, "partition needs at least one rank");
        let first_row = (0..=num_procs)
            .map(|r| (r * global_rows).div_ceil(num_procs))
            .collect();
        Self { first_row }
    }

    pub fn from_offsets(first_row: Vec<usize>) -> Result<Self> {
        if first_row.len() < 2 || first_row[0] != 0 {
            return Err(Error::InvalidMatrix(
                "partition offsets must start at 0 and name at least one rank".into(),
            ));
        }
        if first_row.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidMatrix("partition offsets decrease".into()));
        }
        Ok(Self { first_row })
    }

    /// Partition whose rank `r` owns `counts[r]` consecutive rows.
    pub fn from_counts(counts: &[usize]) -> Self {
        let mut first_row = Vec::with_capacity(counts.len() + 1);
        first_row.push(0);
        for &c in counts {
            first_row.push(first_row.last().unwrap() + c);
        }
        Self { first_row }
    }

    pub fn num_procs(&self) -> usize {
        self.first_row.len() - 1
    }

    pub fn global_rows(&self) -> usize {
        *self.first_row.last().unwrap()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.first_row
    }

    pub fn range(&self, rank: usize) -> Range<usize> {
        self.first_row[rank]..self.first_row[rank + 1]
    }

    pub fn local_len(&self, rank: usize) -> usize {
        self.first_row[rank + 1] - self.first_row[rank]
    }

    /// Rank owning `row`.
    pub fn owner(&self, row: usize) -> usize {
        debug_assert!(row < self.global_rows());
        self.first_row.partition_point(|&f| f <= row) - 1
    }
}

/// One rank's share of a distributed matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBlock {
    pub(crate) on_proc: CsrMatrix,
    pub(crate) off_proc: CsrMatrix,
    pub(crate) off_proc_col_map: Vec<usize>,
    pub(crate) col_first: usize,
}

impl LocalBlock {
    pub fn on_proc(&self) -> &CsrMatrix {
        &self.on_proc
    }

    pub fn off_proc(&self) -> &CsrMatrix {
        &self.off_proc
    }

    pub fn off_proc_col_map(&self) -> &[usize] {
        &self.off_proc_col_map
    }

    pub fn n_rows(&self) -> usize {
        self.on_proc.n_rows()
    }

    pub fn nnz(&self) -> usize {
        self.on_proc.nnz() + self.off_proc.nnz()
    }

    /// Visits local row `i` in ascending global column order.
    pub fn visit_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        let (on_c, on_v) = self.on_proc.row(i);
        let (off_c, off_v) = self.off_proc.row(i);
        let (mut a, mut b) = (0, 0);
        while a < on_c.len() || b < off_c.len() {
            let on_g = on_c.get(a).map(|&c| c + self.col_first);
            let off_g = off_c.get(b).map(|&c| self.off_proc_col_map[c]);
            match (on_g, off_g) {
                (Some(g), Some(h)) if g < h => {
                    f(g, on_v[a]);
                    a += 1;
                }
                (Some(g), None) => {
                    f(g, on_v[a]);
                    a += 1;
                }
                (_, Some(h)) => {
                    f(h, off_v[b]);
                    b += 1;
                }
                (None, None) => unreachable!(),
            }
        }
    }

    /// Local row `i` as `(global column, value)` pairs.
    pub fn row_global(&self, i: usize) -> Vec<(usize, f64)> {
        let mut row = Vec::with_capacity(self.on_proc.row_nnz(i) + self.off_proc.row_nnz(i));
        self.visit_row(i, |c, v| row.push((c, v)));
        row
    }
}

/// A matrix split row-wise over ranks (`row_partition`), with its columns
/// matched to vector ownership (`col_partition`).
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedMatrix {
    row_partition: RowPartition,
    col_partition: RowPartition,
    blocks: Vec<LocalBlock>,
}

impl PartitionedMatrix {
    /// Builds from each rank's rows given as sorted `(global column, value)`
    /// lists.
    pub fn from_local_rows(
        row_partition: RowPartition,
        col_partition: RowPartition,
        rows: Vec<Vec<Vec<(usize, f64)>>>,
    ) -> Result<Self> {
        let p = row_partition.num_procs();
        if col_partition.num_procs() != p || rows.len() != p {
            return Err(Error::DimensionMismatch {
                op: "from_local_rows",
                expected: p,
                found: rows.len().min(col_partition.num_procs()),
            });
        }
        let n_cols = col_partition.global_rows();
        let mut blocks = Vec::with_capacity(p);
        for (rank, local) in rows.into_iter().enumerate() {
            if local.len() != row_partition.local_len(rank) {
                return Err(Error::DimensionMismatch {
                    op: "from_local_rows",
                    expected: row_partition.local_len(rank),
                    found: local.len(),
                });
            }
            let cols = col_partition.range(rank);
            let mut off_map: Vec<usize> = local
                .iter()
                .flatten()
                .map(|&(c, _)| c)
                .filter(|c| !cols.contains(c))
                .collect();
            off_map.sort_unstable();
            off_map.dedup();
            if let Some(&c) = off_map.last() {
                if c >= n_cols {
                    return Err(Error::InvalidMatrix(format!(
                        "column {c} outside 0..{n_cols}"
                    )));
                }
            }

            let mut on_rows = Vec::with_capacity(local.len());
            let mut off_rows = Vec::with_capacity(local.len());
            for row in local {
                let mut on = Vec::new();
                let mut off = Vec::new();
                for (c, v) in row {
                    if cols.contains(&c) {
                        on.push((c - cols.start, v));
                    } else {
                        let k = off_map.binary_search(&c).expect("column collected above");
                        off.push((k, v));
                    }
                }
                on_rows.push(on);
                off_rows.push(off);
            }
            blocks.push(LocalBlock {
                on_proc: CsrMatrix::from_sorted_rows(cols.len(), on_rows)?,
                off_proc: CsrMatrix::from_sorted_rows(off_map.len(), off_rows)?,
                off_proc_col_map: off_map,
                col_first: cols.start,
            });
        }
        Ok(Self {
            row_partition,
            col_partition,
            blocks,
        })
    }

    pub fn row_partition(&self) -> &RowPartition {
        &self.row_partition
    }

    pub fn col_partition(&self) -> &RowPartition {
        &self.col_partition
    }

    pub fn num_procs(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, rank: usize) -> &LocalBlock {
        &self.blocks[rank]
    }

    pub fn blocks(&self) -> &[LocalBlock] {
        &self.blocks
    }

    pub fn global_rows(&self) -> usize {
        self.row_partition.global_rows()
    }

    pub fn global_cols(&self) -> usize {
        self.col_partition.global_rows()
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(LocalBlock::nnz).sum()
    }

    /// Every rank's rows in global column indexing.
    pub fn local_rows(&self) -> Vec<Vec<Vec<(usize, f64)>>> {
        self.blocks
            .iter()
            .map(|b| (0..b.n_rows()).map(|i| b.row_global(i)).collect())
            .collect()
    }

    /// Reassembles the global matrix.
    pub fn gather(&self) -> CsrMatrix {
        let rows = self.local_rows().into_iter().flatten().collect();
        CsrMatrix::from_sorted_rows(self.global_cols(), rows)
            .expect("blocks hold canonical rows")
    }

    /// Stored entries in global row `k`.
    pub fn row_nnz(&self, k: usize) -> usize {
        let r = self.row_partition.owner(k);
        let i = k - self.row_partition.range(r).start;
        let b = &self.blocks[r];
        b.on_proc.row_nnz(i) + b.off_proc.row_nnz(i)
    }

    /// Diagonal of a matrix whose rows and columns share one partition;
    /// missing entries read as zero.
    pub fn diagonal(&self) -> Result<PartitionedVector> {
        if self.row_partition != self.col_partition {
            return Err(Error::DimensionMismatch {
                op: "diagonal",
                expected: self.global_rows(),
                found: self.global_cols(),
            });
        }
        let parts = self
            .blocks
            .iter()
            .map(|b| {
                (0..b.n_rows())
                    .map(|i| {
                        let (c, v) = b.on_proc.row(i);
                        c.binary_search(&i).map_or(0.0, |k| v[k])
                    })
                    .collect()
            })
            .collect();
        Ok(PartitionedVector::from_parts(self.row_partition.clone(), parts))
    }
}

/// Splits a square matrix using `part` for both rows and columns.
pub fn distribute(a: &CsrMatrix, part: &RowPartition) -> Result<PartitionedMatrix> {
    let cols = if a.n_rows() == a.n_cols() {
        part.clone()
    } else {
        RowPartition::balanced(a.n_cols(), part.num_procs())
    };
    distribute_rect(a, part, &cols)
}

pub fn distribute_rect(
    a: &CsrMatrix,
    rows: &RowPartition,
    cols: &RowPartition,
) -> Result<PartitionedMatrix> {
    if rows.global_rows() != a.n_rows() {
        return Err(Error::PartitionMismatch {
            rows: a.n_rows(),
            partition: rows.global_rows(),
        });
    }
    if cols.global_rows() != a.n_cols() {
        return Err(Error::PartitionMismatch {
            rows: a.n_cols(),
            partition: cols.global_rows(),
        });
    }
    let local = (0..rows.num_procs())
        .map(|r| {
            rows.range(r)
                .map(|i| {
                    let (c, v) = a.row(i);
                    c.iter().copied().zip(v.iter().copied()).collect()
                })
                .collect()
        })
        .collect();
    PartitionedMatrix::from_local_rows(rows.clone(), cols.clone(), local)
}

/// Vector communication needs of `m`: each rank receives its off-process
/// columns from their owners; sends mirror the receives.
pub fn comm_pattern(m: &PartitionedMatrix, topo: &Topology) -> Result<CommPattern> {
    if topo.num_procs() != m.num_procs() {
        return Err(Error::InvalidTopology(format!(
            "topology has {} ranks but the matrix is split over {}",
            topo.num_procs(),
            m.num_procs()
        )));
    }
    let cols = m.col_partition();
    let recvs = m
        .blocks()
        .iter()
        .map(|b| {
            let mut edges: Vec<(usize, Vec<usize>)> = Vec::new();
            for &g in &b.off_proc_col_map {
                let owner = cols.owner(g);
                match edges.last_mut() {
                    Some((peer, idx)) if *peer == owner => idx.push(g),
                    _ => edges.push((owner, vec![g])),
                }
            }
            edges
        })
        .collect();
    Ok(CommPattern::from_receives(topo, recvs))
}

/// A vector split into per-rank contiguous pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedVector {
    partition: RowPartition,
    parts: Vec<Vec<f64>>,
}

impl PartitionedVector {
    pub fn from_global(x: &[f64], partition: &RowPartition) -> Result<Self> {
        if x.len() != partition.global_rows() {
            return Err(Error::PartitionMismatch {
                rows: x.len(),
                partition: partition.global_rows(),
            });
        }
        let parts = (0..partition.num_procs())
            .map(|r| x[partition.range(r)].to_vec())
            .collect();
        Ok(Self {
            partition: partition.clone(),
            parts,
        })
    }

    pub fn zeros(partition: &RowPartition) -> Self {
        Self {
            partition: partition.clone(),
            parts: (0..partition.num_procs())
                .map(|r| vec![0.0; partition.local_len(r)])
                .collect(),
        }
    }

    pub(crate) fn from_parts(partition: RowPartition, parts: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(parts.len(), partition.num_procs());
        Self { partition, parts }
    }

    pub fn partition(&self) -> &RowPartition {
        &self.partition
    }

    pub fn part(&self, rank: usize) -> &[f64] {
        &self.parts[rank]
    }

    pub fn parts(&self) -> &[Vec<f64>] {
        &self.parts
    }

    /// Owner's value of global entry `i`.
    pub fn get(&self, i: usize) -> f64 {
        let r = self.partition.owner(i);
        self.parts[r][i - self.partition.range(r).start]
    }

    pub fn to_global(&self) -> Vec<f64> {
        self.parts.iter().flatten().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn balanced_offsets() {
        let p = RowPartition::balanced(10, 4);
        assert_eq!(p.offsets(), &[0, 3, 5, 8, 10]);
        for row in 0..10 {
            assert_eq!(p.owner(row), row * 4 / 10);
        }
    }

    #[test]
    fn owner_skips_empty_ranks() {
        let p = RowPartition::from_offsets(vec![0, 0, 2, 2, 3]).unwrap();
        assert_eq!(p.owner(0), 1);
        assert_eq!(p.owner(2), 3);
    }

    #[test]
    fn tridiagonal_col_map() {
        let a = tridiag(4);
        let m = distribute(&a, &RowPartition::balanced(4, 4)).unwrap();
        assert_eq!(m.block(1).off_proc_col_map(), &[0, 2]);
        assert_eq!(m.gather(), a);
    }

    #[test]
    fn block_diagonal_has_no_off_proc() {
        let a = CsrMatrix::from_dense(&[
            vec![2.0, 1.0, 0.0, 0.0],
            vec![1.0, 2.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, 1.0],
            vec![0.0, 0.0, 1.0, 2.0],
        ]);
        let m = distribute(&a, &RowPartition::balanced(4, 2)).unwrap();
        assert!(m.blocks().iter().all(|b| b.off_proc().nnz() == 0));
        let topo = Topology::new(2, 1).unwrap();
        assert!(comm_pattern(&m, &topo).unwrap().is_empty());
    }

    #[test]
    fn single_rank_is_all_on_proc() {
        let a = tridiag(5);
        let m = distribute(&a, &RowPartition::balanced(5, 1)).unwrap();
        assert_eq!(m.block(0).on_proc(), &a);
        assert!(m.block(0).off_proc_col_map().is_empty());
    }

    #[test]
    fn size_mismatch() {
        let a = tridiag(5);
        assert!(matches!(
            distribute(&a, &RowPartition::balanced(4, 2)),
            Err(Error::PartitionMismatch { .. })
        ));
    }

    #[test]
    fn tridiagonal_pattern_tags() {
        let m = distribute(&tridiag(4), &RowPartition::balanced(4, 4)).unwrap();
        let topo = Topology::new(4, 2).unwrap();
        let pat = comm_pattern(&m, &topo).unwrap();
        let recvs = &pat.rank(1).recvs;
        assert_eq!(recvs.len(), 2);
        assert_eq!((recvs[0].peer, recvs[0].indices.clone(), recvs[0].inter_node), (0, vec![0], false));
        assert_eq!((recvs[1].peer, recvs[1].indices.clone(), recvs[1].inter_node), (2, vec![2], true));
    }

    #[test]
    fn vector_round_trip() {
        let p = RowPartition::balanced(7, 3);
        let x: Vec<f64> = (0..7).map(f64::from).collect();
        let v = PartitionedVector::from_global(&x, &p).unwrap();
        assert_eq!(v.to_global(), x);
        assert_eq!(v.get(5), 5.0);
    }
}
