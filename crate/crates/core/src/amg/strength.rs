//! Strength of connection.
//!
//! Both rules return a matrix whose pattern holds the strong couplings of
//! each row (diagonal excluded) and whose values are the matching entries of
//! `A`.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Default strength tolerance.
pub const DEFAULT_THETA: f64 = 0.25;

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTheta(theta))
    }
}

fn check_square(a: &CsrMatrix) -> Result<()> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::DimensionMismatch {
            op: "strength",
            expected: a.n_rows(),
            found: a.n_cols(),
        });
    }
    Ok(())
}

fn filter(a: &CsrMatrix, mut keep: impl FnMut(usize, usize, f64) -> bool) -> CsrMatrix {
    let rows = (0..a.n_rows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter()
                .zip(vals)
                .filter(|&(&j, &v)| j != i && keep(i, j, v))
                .map(|(&j, &v)| (j, v))
                .collect()
        })
        .collect();
    CsrMatrix::from_sorted_rows(a.n_cols(), rows).expect("subset of a canonical matrix")
}

/// Classical rule: `j` is strong for `i` when
/// `-a_ij >= theta * max_{k != i} (-a_ik)`. Rows without negative
/// off-diagonals have no strong connections.
pub fn strength_classical(a: &CsrMatrix, theta: f64) -> Result<CsrMatrix> {
    check_theta(theta)?;
    check_square(a)?;
    let thresholds: Vec<f64> = (0..a.n_rows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            let m = cols
                .iter()
                .zip(vals)
                .filter(|&(&j, _)| j != i)
                .map(|(_, &v)| -v)
                .fold(0.0, f64::max);
            theta * m
        })
        .collect();
    Ok(filter(a, |i, _, v| {
        thresholds[i] > 0.0 && -v >= thresholds[i]
    }))
}

/// Symmetric rule for aggregation: `|a_ij| >= theta * sqrt(|a_ii a_jj|)`.
/// Explicit zeros are never strong.
pub fn strength_symmetric(a: &CsrMatrix, theta: f64) -> Result<CsrMatrix> {
    check_theta(theta)?;
    check_square(a)?;
    let d = a.diagonal();
    Ok(filter(a, |i, j, v| {
        v != 0.0 && v.abs() >= theta * (d[i] * d[j]).abs().sqrt()
    }))
}
