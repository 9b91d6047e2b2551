use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use nap_amg::{Coarsening, CounterSource, ModelParams, SetupConfig, SolveOptions, SolverKind, StrategyChoice};
use nap_amg_bench::{
    compare_report, load_report, run_experiment, BenchError, ExperimentConfig, Problem, SolveStatus,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemKind {
    Laplace2d,
    Laplace3d,
    /// Rotated anisotropic diffusion.
    Aniso2d,
}

/// Runs one AMG experiment on a simulated multi-node machine and writes
/// per-level communication counters and modeled costs.
///
/// Exit status: 0 when the solve converges, 1 on a configuration error,
/// 2 when it diverges or runs out of iterations.
#[derive(Debug, Parser)]
#[command(name = "nap-bench", version)]
struct Cli {
    #[arg(long, value_enum, default_value = "laplace2d")]
    problem: ProblemKind,
    /// Matrix Market file; replaces `--problem`.
    #[arg(long)]
    matrix_file: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    nx: usize,
    /// Defaults to `--nx`.
    #[arg(long)]
    ny: Option<usize>,
    /// Defaults to `--nx`.
    #[arg(long)]
    nz: Option<usize>,
    /// Weak conductivity of `aniso2d`.
    #[arg(long, default_value_t = 0.001)]
    eps: f64,
    /// Rotation of `aniso2d` in degrees.
    #[arg(long, default_value_t = 30.0)]
    theta_angle: f64,
    #[arg(long, default_value_t = 16)]
    procs: usize,
    #[arg(long, default_value_t = 4)]
    ppn: usize,
    /// `ruge_stuben` (`rs`) or `smoothed_aggregation` (`sa`).
    #[arg(long, default_value = "ruge_stuben", value_parser = |s: &str| s.parse::<SolverKind>())]
    solver: SolverKind,
    /// `first_pass` or `pmis`.
    #[arg(long, default_value = "first_pass", value_parser = |s: &str| s.parse::<Coarsening>())]
    coarsening: Coarsening,
    #[arg(long, default_value_t = 0.25)]
    strength_theta: f64,
    #[arg(long, default_value_t = 50)]
    max_coarse: usize,
    /// Jacobi sweeps applied to the tentative prolongator.
    #[arg(long, default_value_t = 1)]
    sweeps: usize,
    /// `auto`, `standard`, `nap2` or `nap3`.
    #[arg(long, default_value = "auto", value_parser = |s: &str| s.parse::<StrategyChoice>())]
    strategy: StrategyChoice,
    /// TOML file of protocol parameters.
    #[arg(long)]
    model_params: Option<PathBuf>,
    /// Counters fed to the models: `schedule` or `pattern`.
    #[arg(long, default_value = "schedule", value_parser = |s: &str| s.parse::<CounterSource>())]
    model_counters: CounterSource,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    jacobi_weight: f64,
    #[arg(long, default_value = "nap-bench-out")]
    out: PathBuf,
    /// Print the modeled speedup table of an existing report and exit.
    #[arg(long, value_name = "REPORT_JSON")]
    compare: Option<PathBuf>,
}

impl Cli {
    fn config(&self) -> Result<ExperimentConfig, BenchError> {
        let ny = self.ny.unwrap_or(self.nx);
        let nz = self.nz.unwrap_or(self.nx);
        let problem = match (&self.matrix_file, self.problem) {
            (Some(path), _) => Problem::MatrixFile { path: path.clone() },
            (None, ProblemKind::Laplace2d) => Problem::Laplace2d { nx: self.nx, ny },
            (None, ProblemKind::Laplace3d) => Problem::Laplace3d { nx: self.nx, ny, nz },
            (None, ProblemKind::Aniso2d) => Problem::RotatedAniso2d {
                nx: self.nx,
                ny,
                eps: self.eps,
                theta: self.theta_angle.to_radians(),
            },
        };
        let model = match &self.model_params {
            Some(path) => ModelParams::load(path).map_err(|e| {
                BenchError::config(format!("model-params ({})", path.display()), e)
            })?,
            None => ModelParams::default(),
        };
        let setup = SetupConfig {
            solver: self.solver,
            coarsening: self.coarsening,
            strength_theta: self.strength_theta,
            max_coarse: self.max_coarse,
            prolongation_sweeps: self.sweeps,
            strategy: self.strategy,
            model,
            counters: self.model_counters,
            ..SetupConfig::default()
        };
        let solve = SolveOptions {
            max_iters: self.max_iters,
            rtol: self.rtol,
            jacobi_weight: self.jacobi_weight,
            ..SolveOptions::default()
        };
        Ok(ExperimentConfig {
            problem,
            procs: self.procs,
            ppn: self.ppn,
            model_params: self.model_params.clone(),
            setup,
            solve,
        })
    }
}

fn run(cli: &Cli) -> Result<ExitCode, BenchError> {
    if let Some(path) = &cli.compare {
        print!("{}", compare_report(&load_report(path)?));
        return Ok(ExitCode::SUCCESS);
    }
    let config = cli.config()?;
    let start = Instant::now();
    let exp = run_experiment(&config)?;
    let elapsed = start.elapsed();
    exp.write_outputs(&cli.out)?;

    let r = &exp.report;
    let sizes: Vec<usize> = r.levels.iter().map(|l| l.rows).collect();
    println!("levels: {sizes:?}  operator complexity {:.3}", r.operator_complexity);
    println!(
        "solve: {:?} after {} cycles, relative residual {:e}",
        r.solve.status, r.solve.iterations, r.solve.final_residual
    );
    print!("{}", compare_report(r));
    println!("wrote {}", cli.out.display());
    eprintln!("simulation wall-clock {:.3} s (diagnostic only)", elapsed.as_secs_f64());

    Ok(match r.solve.status {
        SolveStatus::Converged => ExitCode::SUCCESS,
        SolveStatus::MaxIters | SolveStatus::Diverged => ExitCode::from(2),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
