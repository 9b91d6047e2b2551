//! Interpolation operators.

use std::collections::BTreeMap;

use super::split::{Aggregation, CfLabel};
use crate::comm::{execute, CommSchedule, VALUE_BYTES};
use crate::dist;
use crate::error::{Error, Result};
use crate::partition::{PartitionedMatrix, PartitionedVector, RowPartition};
use crate::sparse::CsrMatrix;

/// Coarse column of every C point, in global row order.
pub fn coarse_indices(labels: &[CfLabel]) -> Vec<Option<usize>> {
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            (l == CfLabel::Coarse).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Number of coarse points owned by each rank.
pub fn coarse_partition(cidx: &[Option<usize>], fine: &RowPartition) -> RowPartition {
    let counts: Vec<usize> = (0..fine.num_procs())
        .map(|r| cidx[fine.range(r)].iter().flatten().count())
        .collect();
    RowPartition::from_counts(&counts)
}

/// Direct interpolation weights of row `i`.
///
/// `row` holds `(j, a_ij)` in column order, `strong` the strong neighbors of
/// `i`, and `coarse(j)` the coarse column of `j` if it is a C point.
/// Negative and positive couplings are scaled separately so that the full
/// row sum of each sign is carried by the interpolatory neighbors; if no
/// positive coupling is interpolatory, positive couplings are lumped onto
/// the diagonal.
pub fn direct_row(
    i: usize,
    row: &[(usize, f64)],
    strong: &[usize],
    coarse: impl Fn(usize) -> Option<usize>,
) -> Result<Vec<(usize, f64)>> {
    if let Some(c) = coarse(i) {
        return Ok(vec![(c, 1.0)]);
    }
    if strong.is_empty() {
        return Ok(Vec::new());
    }
    let mut diag = 0.0;
    let (mut neg_all, mut pos_all, mut neg_c, mut pos_c) = (0.0, 0.0, 0.0, 0.0);
    let mut interp = Vec::new();
    for &(j, v) in row {
        if j == i {
            diag = v;
            continue;
        }
        if v < 0.0 {
            neg_all += v;
        } else {
            pos_all += v;
        }
        if let (Some(c), Ok(_)) = (coarse(j), strong.binary_search(&j)) {
            if v < 0.0 {
                neg_c += v;
            } else {
                pos_c += v;
            }
            interp.push((c, v));
        }
    }
    if interp.is_empty() {
        return Err(Error::MissingStrongCoarse { row: i });
    }
    let alpha = if neg_c != 0.0 { neg_all / neg_c } else { 0.0 };
    let beta = if pos_c != 0.0 {
        pos_all / pos_c
    } else {
        diag += pos_all;
        0.0
    };
    if diag == 0.0 {
        return Err(Error::ZeroDiagonal { row: i });
    }
    Ok(interp
        .into_iter()
        .map(|(c, v)| {
            let scale = if v < 0.0 { alpha } else { beta };
            (c, -scale * v / diag)
        })
        .collect())
}

/// Direct interpolation on a serial matrix.
pub fn direct_interpolation(
    a: &CsrMatrix,
    s: &CsrMatrix,
    labels: &[CfLabel],
) -> Result<CsrMatrix> {
    let cidx = coarse_indices(labels);
    let n_coarse = cidx.iter().flatten().count();
    let rows = (0..a.n_rows())
        .map(|i| {
            let (c, v) = a.row(i);
            let row: Vec<_> = c.iter().copied().zip(v.iter().copied()).collect();
            direct_row(i, &row, s.row(i).0, |j| cidx[j])
        })
        .collect::<Result<Vec<_>>>()?;
    CsrMatrix::from_sorted_rows(n_coarse, rows)
}

/// Direct interpolation with each rank forming its own rows. Coarse indices
/// of off-process neighbors are fetched through `schedule`, which must
/// realize the vector pattern of `a`.
pub fn direct_interpolation_dist(
    a: &PartitionedMatrix,
    s: &CsrMatrix,
    labels: &[CfLabel],
    schedule: &CommSchedule,
) -> Result<PartitionedMatrix> {
    let fine = a.row_partition();
    let cidx = coarse_indices(labels);
    let coarse = coarse_partition(&cidx, fine);
    let (remote, _) = execute(schedule, |_, j| cidx[j], |_| VALUE_BYTES)?;

    let mut rows = Vec::with_capacity(a.num_procs());
    for (rank, block) in a.blocks().iter().enumerate() {
        let range = fine.range(rank);
        let known: BTreeMap<usize, Option<usize>> =
            remote[rank].iter().map(|(&(j, _), &c)| (j, c)).collect();
        let lookup = |j: usize| {
            if range.contains(&j) {
                cidx[j]
            } else {
                known[&j]
            }
        };
        let local = range
            .clone()
            .enumerate()
            .map(|(li, gi)| direct_row(gi, &block.row_global(li), s.row(gi).0, lookup))
            .collect::<Result<Vec<_>>>()?;
        rows.push(local);
    }
    PartitionedMatrix::from_local_rows(fine.clone(), coarse, rows)
}

/// Piecewise-constant prolongator with unit-norm columns: row `i` has the
/// single entry `1/sqrt(|agg|)` in the column of its aggregate.
pub fn tentative_prolongator(agg: &Aggregation, fine: &RowPartition) -> Result<PartitionedMatrix> {
    let sizes = agg.sizes();
    let counts: Vec<usize> = (0..fine.num_procs())
        .map(|r| {
            let range = fine.range(r);
            agg.roots.iter().filter(|&&root| range.contains(&root)).count()
        })
        .collect();
    let coarse = RowPartition::from_counts(&counts);
    let rows = (0..fine.num_procs())
        .map(|r| {
            fine.range(r)
                .map(|i| {
                    let a = agg.aggregate[i];
                    vec![(a, 1.0 / (sizes[a] as f64).sqrt())]
                })
                .collect()
        })
        .collect();
    PartitionedMatrix::from_local_rows(fine.clone(), coarse, rows)
}

fn rank_ordered_norm(v: &PartitionedVector) -> f64 {
    v.parts()
        .iter()
        .map(|p| p.iter().fold(0.0, |s, x| s + x * x))
        .fold(0.0, |s, x| s + x)
        .sqrt()
}

/// Estimate of the spectral radius of `D⁻¹A` by ten steps of power
/// iteration from the ones vector. Falls back to the Gershgorin bound when
/// the iteration collapses to zero.
pub fn spectral_radius_estimate(a: &PartitionedMatrix, schedule: &CommSchedule) -> Result<f64> {
    let d = a.diagonal()?;
    let part = a.row_partition();
    for (r, p) in d.parts().iter().enumerate() {
        if let Some(k) = p.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroDiagonal {
                row: part.range(r).start + k,
            });
        }
    }
    let scale = |y: PartitionedVector| {
        let parts = y
            .parts()
            .iter()
            .zip(d.parts())
            .map(|(y, d)| y.iter().zip(d).map(|(y, d)| y / d).collect())
            .collect();
        PartitionedVector::from_parts(part.clone(), parts)
    };
    let mut v = PartitionedVector::from_parts(
        part.clone(),
        (0..part.num_procs()).map(|r| vec![1.0; part.local_len(r)]).collect(),
    );
    let mut rho = 0.0;
    for _ in 0..10 {
        let (y, _) = dist::spmv(a, &v, schedule)?;
        let w = scale(y);
        let norm = rank_ordered_norm(&w);
        let prev = rank_ordered_norm(&v);
        if norm == 0.0 || prev == 0.0 {
            rho = 0.0;
            break;
        }
        rho = norm / prev;
        let parts = w
            .parts()
            .iter()
            .map(|p| p.iter().map(|x| x / norm).collect())
            .collect();
        v = PartitionedVector::from_parts(part.clone(), parts);
    }
    if rho > 0.0 {
        return Ok(rho);
    }
    let bound = a
        .blocks()
        .iter()
        .zip(d.parts())
        .flat_map(|(b, d)| {
            (0..b.n_rows()).map(move |i| {
                let mut s = 0.0;
                b.visit_row(i, |_, v| s += v.abs());
                s / d[i].abs()
            })
        })
        .fold(0.0, f64::max);
    Ok(bound)
}

/// One Jacobi smoothing step `P - omega D⁻¹ (A P)`. `schedule` must realize
/// the vector pattern of `a`; rows of `p` travel over it.
pub fn smooth_prolongator(
    a: &PartitionedMatrix,
    p: &PartitionedMatrix,
    omega: f64,
    schedule: &CommSchedule,
) -> Result<PartitionedMatrix> {
    let d = a.diagonal()?;
    let (ap, _) = dist::spgemm(a, p, schedule)?;
    let rows = (0..a.num_procs())
        .map(|rank| {
            let (pb, apb) = (p.block(rank), ap.block(rank));
            d.part(rank)
                .iter()
                .enumerate()
                .map(|(i, &dii)| {
                    let s = omega / dii;
                    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
                    pb.visit_row(i, |j, v| {
                        out.insert(j, v);
                    });
                    apb.visit_row(i, |j, v| {
                        let e = out.entry(j).or_insert(0.0);
                        *e -= s * v;
                    });
                    out.into_iter().collect()
                })
                .collect()
        })
        .collect();
    PartitionedMatrix::from_local_rows(p.row_partition().clone(), p.col_partition().clone(), rows)
}
