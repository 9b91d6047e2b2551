//! Compressed-sparse-row storage and the serial kernels everything else is
//! built on.
//!
//! Matrices are always kept in canonical form: column indices strictly
//! increasing within a row, no duplicates. Row accumulation walks columns in
//! ascending order so a distributed kernel that visits the same entries in the
//! same order produces bit-identical output.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking every canonical-form
    /// invariant.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_ptr has length {} for {} rows",
                row_ptr.len(),
                n_rows
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidMatrix("row_ptr[0] must be 0".into()));
        }
        if col_idx.len() != values.len() || row_ptr[n_rows] != col_idx.len() {
            return Err(Error::InvalidMatrix(format!(
                "row_ptr ends at {} but there are {} column indices and {} values",
                row_ptr[n_rows],
                col_idx.len(),
                values.len()
            )));
        }
        for i in 0..n_rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidMatrix(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for (k, &c) in cols.iter().enumerate() {
                if c >= n_cols {
                    return Err(Error::InvalidMatrix(format!(
                        "column {c} in row {i} outside 0..{n_cols}"
                    )));
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::InvalidMatrix(format!(
                        "row {i} columns not strictly increasing"
                    )));
                }
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Assembles from (row, col, value) triplets. Duplicate coordinates are
    /// summed in input order.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({r}, {c}) outside {n_rows}x{n_cols}"
                )));
            }
        }
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from per-row sorted `(column, value)` lists.
    pub fn from_sorted_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n_rows = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self::new(n_rows, n_cols, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Converts a dense row-major matrix, keeping only nonzero entries.
    pub fn from_dense(dense: &[Vec<f64>]) -> Self {
        let n_cols = dense.first().map_or(0, Vec::len);
        let rows = dense
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Self::from_sorted_rows(n_cols, rows).expect("dense rows are canonical")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Entry `(i, j)`, or `None` when it is not stored.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    /// Stored diagonal; missing entries read as zero.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i).unwrap_or(0.0))
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        dense
    }

    pub fn into_parts(self) -> (usize, usize, Vec<usize>, Vec<usize>, Vec<f64>) {
        (
            self.n_rows,
            self.n_cols,
            self.row_ptr,
            self.col_idx,
            self.values,
        )
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                op: "spmv",
                expected: self.n_cols,
                found: x.len(),
            });
        }
        Ok((0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut acc = 0.0;
                for (&c, &v) in cols.iter().zip(vals) {
                    acc += v * x[c];
                }
                acc
            })
            .collect())
    }

    /// Gustavson row-by-row product `A B`. Entries that cancel to zero stay
    /// in the pattern.
    pub fn spgemm(&self, b: &CsrMatrix) -> Result<CsrMatrix> {
        if self.n_cols != b.n_rows {
            return Err(Error::DimensionMismatch {
                op: "spgemm",
                expected: self.n_cols,
                found: b.n_rows,
            });
        }
        let mut acc = RowAccumulator::new(b.n_cols);
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.n_rows {
            let (a_cols, a_vals) = self.row(i);
            for (&k, &a_ik) in a_cols.iter().zip(a_vals) {
                let (b_cols, b_vals) = b.row(k);
                acc.scatter(a_ik, b_cols, b_vals);
            }
            acc.drain_into(&mut col_idx, &mut values);
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: b.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                col_idx[slot] = i;
                values[slot] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Exact structural and value symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols && *self == self.transpose()
    }
}

pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    a.spmv(x)
}

pub fn spgemm(a: &CsrMatrix, b: &CsrMatrix) -> Result<CsrMatrix> {
    a.spgemm(b)
}

pub fn transpose(a: &CsrMatrix) -> CsrMatrix {
    a.transpose()
}

/// Dense scatter accumulator for one output row of a sparse product.
///
/// The first contribution to a column is stored, later ones are added, so the
/// rounding sequence depends only on the order of `scatter` calls.
pub(crate) struct RowAccumulator {
    values: Vec<f64>,
    occupied: Vec<bool>,
    touched: Vec<usize>,
}

impl RowAccumulator {
    pub(crate) fn new(width: usize) -> Self {
        Self {
            values: vec![0.0; width],
            occupied: vec![false; width],
            touched: Vec::new(),
        }
    }

    pub(crate) fn scatter(&mut self, scale: f64, cols: &[usize], vals: &[f64]) {
        for (&j, &v) in cols.iter().zip(vals) {
            self.add(j, scale * v);
        }
    }

    pub(crate) fn add(&mut self, j: usize, v: f64) {
        if self.occupied[j] {
            self.values[j] += v;
        } else {
            self.occupied[j] = true;
            self.values[j] = v;
            self.touched.push(j);
        }
    }

    pub(crate) fn drain_into(&mut self, cols: &mut Vec<usize>, vals: &mut Vec<f64>) {
        self.touched.sort_unstable();
        for &j in &self.touched {
            cols.push(j);
            vals.push(self.values[j]);
            self.occupied[j] = false;
        }
        self.touched.clear();
    }

    pub(crate) fn drain_row(&mut self) -> Vec<(usize, f64)> {
        self.touched.sort_unstable();
        let row = self.touched.iter().map(|&j| (j, self.values[j])).collect();
        for &j in &self.touched {
            self.occupied[j] = false;
        }
        self.touched.clear();
        row
    }
}
