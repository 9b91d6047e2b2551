use super::interp::{
    direct_interpolation_dist, smooth_prolongator, spectral_radius_estimate,
    tentative_prolongator,
};
use super::split::{first_pass, mis2_aggregate, pmis};
use super::strength::{strength_classical, strength_symmetric};
use super::{Channel, Coarsening, Hierarchy, Interp, Level, SetupConfig, SolverKind};
use crate::comm::{CommSchedule, Exchange, MessageLog, Strategy, NONZERO_BYTES, ROW_HEADER_BYTES, VALUE_BYTES};
use crate::dense::DenseLu;
use crate::dist::{self, TransposeProduct};
use crate::error::{Error, Result};
use crate::model::select_for;
use crate::partition::{comm_pattern, PartitionedMatrix};
use crate::topology::Topology;

/// Builds the hierarchy for `a`, choosing a strategy for every exchange.
///
/// Coarsening stops when a level has at most `max_coarse` rows, when
/// `max_levels` is reached, or when a coarsening step keeps more than
/// `stall_ratio` of the rows.
pub fn setup(a: PartitionedMatrix, topo: &Topology, config: &SetupConfig) -> Result<Hierarchy> {
    if a.row_partition() != a.col_partition() {
        return Err(Error::DimensionMismatch {
            op: "setup",
            expected: a.global_rows(),
            found: a.global_cols(),
        });
    }
    if topo.num_procs() != a.num_procs() {
        return Err(Error::InvalidTopology(format!(
            "topology has {} ranks but the matrix is split over {}",
            topo.num_procs(),
            a.num_procs()
        )));
    }
    if !(config.strength_theta > 0.0 && config.strength_theta <= 1.0) {
        return Err(Error::InvalidTheta(config.strength_theta));
    }
    if !(config.stall_ratio > 0.0 && config.stall_ratio <= 1.0) {
        return Err(Error::Config {
            key: "stall_ratio".into(),
            msg: format!("must lie in (0, 1], got {}", config.stall_ratio),
        });
    }
    config.model.validate()?;

    let channel = |ex: &Exchange, size: &dyn Fn(usize, usize) -> usize| {
        let selection = select_for(ex, topo, &config.model, config.counters, size);
        Channel {
            selection,
            strategy: config.strategy.resolve(&selection),
            logs: Strategy::ALL.map(|s| MessageLog::for_schedule(ex.schedule(s), size)),
        }
    };

    let mut levels = Vec::new();
    let mut a = a;
    loop {
        let a_comm = Exchange::new(comm_pattern(&a, topo)?, topo);
        let spmv = channel(&a_comm, &|_, _| VALUE_BYTES);
        let n = a.global_rows();
        let last = n <= config.max_coarse || levels.len() + 1 >= config.max_levels.max(1);
        let p = if last {
            None
        } else {
            Some(prolongator(&a, a_comm.schedule(spmv.strategy), config)?)
                .filter(|p| {
                    let nc = p.global_cols();
                    nc > 0 && nc < n && nc as f64 <= config.stall_ratio * n as f64
                })
        };
        let Some(p) = p else {
            levels.push(Level {
                a,
                a_comm,
                spmv,
                interp: None,
            });
            break;
        };

        let p_comm = Exchange::new(comm_pattern(&p, topo)?, topo);
        let p_rev = p_comm.reversed(topo);
        let spgemm = channel(&a_comm, &|_, k| ROW_HEADER_BYTES + NONZERO_BYTES * p.row_nnz(k));
        let (ap, _) = dist::spgemm(&a, &p, a_comm.schedule(spgemm.strategy))?;
        let product = TransposeProduct::new(&p, &ap)?;
        let galerkin = channel(&p_rev, &|origin, j| product.payload_bytes(origin, j));
        let (coarse, _) = product.finish(p_rev.schedule(galerkin.strategy))?;
        let interpolate = channel(&p_comm, &|_, _| VALUE_BYTES);
        let restrict = channel(&p_rev, &|_, _| VALUE_BYTES);

        levels.push(Level {
            a,
            a_comm,
            spmv,
            interp: Some(Interp {
                p,
                p_comm,
                p_rev,
                spgemm,
                galerkin,
                interpolate,
                restrict,
            }),
        });
        a = coarse;
    }

    let coarse = DenseLu::factor(&levels.last().expect("at least one level").a.gather())?;
    Ok(Hierarchy {
        topology: *topo,
        config: config.clone(),
        levels,
        coarse,
    })
}

fn prolongator(
    a: &PartitionedMatrix,
    schedule: &CommSchedule,
    config: &SetupConfig,
) -> Result<PartitionedMatrix> {
    let global = a.gather();
    match config.solver {
        SolverKind::RugeStuben => {
            let s = strength_classical(&global, config.strength_theta)?;
            let labels = match config.coarsening {
                Coarsening::FirstPass => first_pass(&s),
                Coarsening::Pmis => pmis(&s),
            };
            direct_interpolation_dist(a, &s, &labels, schedule)
        }
        SolverKind::SmoothedAggregation => {
            let s = strength_symmetric(&global, config.strength_theta)?;
            let agg = mis2_aggregate(&s);
            let mut p = tentative_prolongator(&agg, a.row_partition())?;
            if config.prolongation_sweeps > 0 {
                let rho = spectral_radius_estimate(a, schedule)?;
                let omega = 4.0 / (3.0 * rho);
                for _ in 0..config.prolongation_sweeps {
                    p = smooth_prolongator(a, &p, omega, schedule)?;
                }
            }
            Ok(p)
        }
    }
}
