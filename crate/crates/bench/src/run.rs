use std::fs;
use std::path::Path;

use nap_amg::{distribute, setup, solve, Error, Hierarchy, PartitionedVector, RowPartition};

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::report::{
    level_reports, totals, write_levels_csv, write_messages_csv, Report, SolveReport, SolveStatus,
    TopologyReport, SCHEMA,
};

/// A finished run: the report plus the hierarchy its message logs came from.
#[derive(Debug)]
pub struct Experiment {
    pub report: Report,
    pub hierarchy: Hierarchy,
}

/// Builds the hierarchy, evaluates every exchange under all three
/// strategies and solves `A x = 1` from a zero guess.
///
/// Divergence is recorded in the report rather than returned as an error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    let topo = config.topology()?;
    let a = config.problem.assemble()?;
    let n = a.n_rows();
    let part = RowPartition::balanced(n, topo.num_procs());
    let m = distribute(&a, &part).map_err(BenchError::from_core)?;
    let h = setup(m, &topo, &config.setup).map_err(BenchError::from_core)?;

    let b = PartitionedVector::from_global(&vec![1.0; n], &part).map_err(BenchError::from_core)?;
    let solve = match solve(&h, &b, &config.solve) {
        Ok(r) => SolveReport {
            options: config.solve,
            status: if r.converged {
                SolveStatus::Converged
            } else {
                SolveStatus::MaxIters
            },
            iterations: r.iterations,
            final_residual: r.history.last().copied().unwrap_or(0.0),
            history: r.history,
        },
        Err(Error::Diverged {
            iteration,
            residual,
        }) => SolveReport {
            options: config.solve,
            status: SolveStatus::Diverged,
            iterations: iteration,
            history: Vec::new(),
            final_residual: residual,
        },
        Err(e) => return Err(BenchError::from_core(e)),
    };

    let levels = level_reports(&h);
    let report = Report {
        schema: SCHEMA,
        config: config.clone(),
        topology: TopologyReport {
            procs: topo.num_procs(),
            ppn: topo.ppn(),
            nodes: topo.num_nodes(),
        },
        totals: totals(&levels),
        operator_complexity: h.operator_complexity(),
        levels,
        solve,
    };
    Ok(Experiment {
        report,
        hierarchy: h,
    })
}

impl Experiment {
    pub fn levels_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_levels_csv(&self.report, &mut buf).expect("writing to memory");
        buf
    }

    pub fn messages_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_messages_csv(&self.hierarchy, &mut buf).expect("writing to memory");
        buf
    }

    /// Writes `report.json`, `levels.csv` and `messages.csv` into `dir`,
    /// creating it if needed.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| BenchError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, bytes) in [
            ("report.json", self.report.to_json().into_bytes()),
            ("levels.csv", self.levels_csv()),
            ("messages.csv", self.messages_csv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(io(&path))?;
        }
        Ok(())
    }
}

/// Reads a `report.json` written by [`Experiment::write_outputs`].
pub fn load_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let report: Report = serde_json::from_str(&text).map_err(|source| BenchError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if report.schema != SCHEMA {
        return Err(BenchError::config(
            format!("schema ({})", path.display()),
            format!("expected {SCHEMA}, found {}", report.schema),
        ));
    }
    Ok(report)
}
