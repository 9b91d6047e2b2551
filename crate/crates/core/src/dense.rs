//! Dense LU factorization for the coarsest level.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Relative pivot size below which a matrix is treated as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// `P A Q = L U` with unit lower `L`.
///
/// Partial pivoting is tried first (`Q = I`). If a pivot falls below
/// `PIVOT_TOLERANCE * max|A|`, the factorization restarts with complete
/// pivoting and stops at the numerical rank; [`DenseLu::solve`] then returns
/// the basic solution with the trailing unknowns set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    rank: usize,
}

impl DenseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::DimensionMismatch {
                op: "dense LU",
                expected: a.n_rows(),
                found: a.n_cols(),
            });
        }
        let n = a.n_rows();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                dense[i * n + j] = x;
            }
        }
        let max = dense.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = PIVOT_TOLERANCE * max;
        Ok(Self::eliminate(n, dense.clone(), tol, false)
            .unwrap_or_else(|| Self::eliminate(n, dense, tol, true).expect("complete pivoting")))
    }

    fn eliminate(n: usize, mut lu: Vec<f64>, tol: f64, complete: bool) -> Option<Self> {
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut rank = n;
        for k in 0..n {
            let (mut pr, mut pc, mut best) = (k, k, -1.0);
            let cols = if complete { k..n } else { k..k + 1 };
            for j in cols {
                for i in k..n {
                    let v = lu[i * n + j].abs();
                    if v > best {
                        (pr, pc, best) = (i, j, v);
                    }
                }
            }
            if best <= tol || best == 0.0 {
                if !complete {
                    return None;
                }
                rank = k;
                break;
            }
            if pr != k {
                for j in 0..n {
                    lu.swap(k * n + j, pr * n + j);
                }
                row_perm.swap(k, pr);
            }
            if pc != k {
                for i in 0..n {
                    lu.swap(i * n + k, i * n + pc);
                }
                col_perm.swap(k, pc);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / pivot;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Some(Self {
            n,
            lu,
            row_perm,
            col_perm,
            rank,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Numerical rank; equals `n` unless the fallback was taken.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                op: "dense LU solve",
                expected: n,
                found: b.len(),
            });
        }
        let r = self.rank;
        let mut y: Vec<f64> = self.row_perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i.min(r) {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s;
        }
        let mut z = vec![0.0; n];
        for i in (0..r).rev() {
            let mut s = y[i];
            for j in i + 1..r {
                s -= self.lu[i * n + j] * z[j];
            }
            z[i] = s / self.lu[i * n + i];
        }
        let mut x = vec![0.0; n];
        for (i, &c) in self.col_perm.iter().enumerate() {
            x[c] = z[i];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let lu = DenseLu::factor(&CsrMatrix::identity(3)).unwrap();
        assert_eq!(lu.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let x = DenseLu::factor(&a).unwrap().solve(&[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn needs_row_swap() {
        let a = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let x = DenseLu::factor(&a).unwrap().solve(&[2.0, 5.0]).unwrap();
        assert_eq!(x, vec![5.0, 2.0]);
    }

    #[test]
    fn singular_neumann_compatible() {
        let n = 6;
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            if i > 0 {
                d[i][i - 1] = -1.0;
                d[i][i] += 1.0;
            }
            if i + 1 < n {
                d[i][i + 1] = -1.0;
                d[i][i] += 1.0;
            }
        }
        let a = CsrMatrix::from_dense(&d);
        let lu = DenseLu::factor(&a).unwrap();
        assert_eq!(lu.rank(), n - 1);
        let b = vec![1.0, -2.0, 0.5, 0.5, 1.0, -1.0];
        let x = lu.solve(&b).unwrap();
        let r = a.spmv(&x).unwrap();
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() <= 1e-10 * 2.0);
        }
    }
}
