//! V-cycle solve over a hierarchy.
//!
//! Every kernel moves data with the strategy recorded for that exchange in
//! the hierarchy. Norms are reduced by summing each rank's partial sum in
//! rank order, so the residual history is the same for every strategy.

use serde::{Deserialize, Serialize};

use crate::amg::Hierarchy;
use crate::comm::CommSchedule;
use crate::dense::DenseLu;
use crate::dist;
use crate::error::{Error, Result};
use crate::partition::{PartitionedMatrix, PartitionedVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop once `|r| / |b|` drops below this.
    pub rtol: f64,
    pub jacobi_weight: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            rtol: 1e-8,
            jacobi_weight: 2.0 / 3.0,
            pre_sweeps: 1,
            post_sweeps: 1,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(Error::Config {
                key: "rtol".into(),
                msg: format!("must be positive, got {}", self.rtol),
            });
        }
        if !(self.jacobi_weight > 0.0 && self.jacobi_weight.is_finite()) {
            return Err(Error::Config {
                key: "jacobi_weight".into(),
                msg: format!("must be positive, got {}", self.jacobi_weight),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x: PartitionedVector,
    /// `|r_k| / |b|` before each cycle and after the last; starts at 1.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn map_parts(
    a: &PartitionedVector,
    b: &PartitionedVector,
    f: impl Fn(f64, f64) -> f64,
) -> PartitionedVector {
    let parts = a
        .parts()
        .iter()
        .zip(b.parts())
        .map(|(x, y)| x.iter().zip(y).map(|(&x, &y)| f(x, y)).collect())
        .collect();
    PartitionedVector::from_parts(a.partition().clone(), parts)
}

/// Euclidean norm with per-rank partial sums added in rank order.
pub fn norm2(v: &PartitionedVector) -> f64 {
    v.parts()
        .iter()
        .map(|p| p.iter().fold(0.0, |s, x| s + x * x))
        .fold(0.0, |s, x| s + x)
        .sqrt()
}

fn checked_diagonal(a: &PartitionedMatrix) -> Result<PartitionedVector> {
    let d = a.diagonal()?;
    for (r, p) in d.parts().iter().enumerate() {
        if let Some(k) = p.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroDiagonal {
                row: a.row_partition().range(r).start + k,
            });
        }
    }
    Ok(d)
}

/// `sweeps` steps of `x += omega D⁻¹ (b - A x)`.
pub fn relax_jacobi(
    a: &PartitionedMatrix,
    schedule: &CommSchedule,
    x: &mut PartitionedVector,
    b: &PartitionedVector,
    sweeps: usize,
    omega: f64,
) -> Result<()> {
    if sweeps == 0 {
        return Ok(());
    }
    let d = checked_diagonal(a)?;
    for _ in 0..sweeps {
        let (ax, _) = dist::spmv(a, x, schedule)?;
        let r = map_parts(b, &ax, |b, ax| b - ax);
        let step = map_parts(&r, &d, |r, d| omega * r / d);
        *x = map_parts(x, &step, |x, s| x + s);
    }
    Ok(())
}

/// `b - A x`.
pub fn residual(
    a: &PartitionedMatrix,
    schedule: &CommSchedule,
    x: &PartitionedVector,
    b: &PartitionedVector,
) -> Result<PartitionedVector> {
    let (ax, _) = dist::spmv(a, x, schedule)?;
    Ok(map_parts(b, &ax, |b, ax| b - ax))
}

/// `Pᵀ r`; `schedule` realizes the reversed pattern of `p`.
pub fn restrict(
    p: &PartitionedMatrix,
    schedule: &CommSchedule,
    r: &PartitionedVector,
) -> Result<PartitionedVector> {
    Ok(dist::spmv_transpose(p, r, schedule)?.0)
}

/// `P e`; `schedule` realizes the pattern of `p`.
pub fn interpolate(
    p: &PartitionedMatrix,
    schedule: &CommSchedule,
    e: &PartitionedVector,
) -> Result<PartitionedVector> {
    Ok(dist::spmv(p, e, schedule)?.0)
}

/// Gathers `b`, solves with the coarse factorization, and scatters the
/// solution back to the owners.
pub fn coarse_solve(lu: &DenseLu, b: &PartitionedVector) -> Result<PartitionedVector> {
    let x = lu.solve(&b.to_global())?;
    PartitionedVector::from_global(&x, b.partition())
}

/// One V-cycle on level `l`, updating `x` in place.
pub fn vcycle(
    h: &Hierarchy,
    l: usize,
    x: &mut PartitionedVector,
    b: &PartitionedVector,
    opts: &SolveOptions,
) -> Result<()> {
    let level = h.level(l);
    let Some(interp) = &level.interp else {
        *x = coarse_solve(&h.coarse, b)?;
        return Ok(());
    };
    let a_sched = level.a_comm.schedule(level.spmv.strategy);
    relax_jacobi(&level.a, a_sched, x, b, opts.pre_sweeps, opts.jacobi_weight)?;
    let r = residual(&level.a, a_sched, x, b)?;
    let rc = restrict(
        &interp.p,
        interp.p_rev.schedule(interp.restrict.strategy),
        &r,
    )?;
    let mut ec = PartitionedVector::zeros(rc.partition());
    vcycle(h, l + 1, &mut ec, &rc, opts)?;
    let e = interpolate(
        &interp.p,
        interp.p_comm.schedule(interp.interpolate.strategy),
        &ec,
    )?;
    *x = map_parts(x, &e, |x, e| x + e);
    relax_jacobi(&level.a, a_sched, x, b, opts.post_sweeps, opts.jacobi_weight)
}

/// Consecutive cycles a residual may stay above ten times its initial value
/// before the solve is abandoned.
const DIVERGENCE_STRIKES: usize = 3;

/// Runs V-cycles from a zero initial guess until `|r| / |b| < rtol` or
/// `max_iters` cycles. Returns [`Error::Diverged`] if the relative residual
/// exceeds ten times its initial value for three consecutive cycles.
pub fn solve(h: &Hierarchy, b: &PartitionedVector, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    let fine = &h.level(0).a;
    if b.partition() != fine.row_partition() {
        return Err(Error::DimensionMismatch {
            op: "solve",
            expected: fine.global_rows(),
            found: b.partition().global_rows(),
        });
    }
    let mut x = PartitionedVector::zeros(b.partition());
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(SolveResult {
            x,
            history: vec![0.0],
            iterations: 0,
            converged: true,
        });
    }
    let a_sched = h.level(0).a_comm.schedule(h.level(0).spmv.strategy);
    let mut history = vec![norm2(&residual(fine, a_sched, &x, b)?) / bnorm];
    let mut strikes = 0;
    let mut iterations = 0;
    while history[iterations] >= opts.rtol && iterations < opts.max_iters {
        vcycle(h, 0, &mut x, b, opts)?;
        iterations += 1;
        let rel = norm2(&residual(fine, a_sched, &x, b)?) / bnorm;
        history.push(rel);
        if !rel.is_finite() {
            return Err(Error::Diverged {
                iteration: iterations,
                residual: rel,
            });
        }
        if rel > 10.0 * history[0] {
            strikes += 1;
            if strikes >= DIVERGENCE_STRIKES {
                return Err(Error::Diverged {
                    iteration: iterations,
                    residual: rel,
                });
            }
        } else {
            strikes = 0;
        }
    }
    let converged = history[iterations] < opts.rtol;
    Ok(SolveResult {
        x,
        history,
        iterations,
        converged,
    })
}
