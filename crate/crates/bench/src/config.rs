use std::f64::consts::PI;
use std::path::PathBuf;

use nap_amg::{generate_stencil, mtx, CsrMatrix, SetupConfig, SolveOptions, Stencil, Topology};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// The matrix an experiment runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Laplace2d { nx: usize, ny: usize },
    Laplace3d { nx: usize, ny: usize, nz: usize },
    /// `theta` in radians.
    RotatedAniso2d { nx: usize, ny: usize, eps: f64, theta: f64 },
    MatrixFile { path: PathBuf },
}

impl Problem {
    /// Rotated anisotropy with `eps = 0.001` at thirty degrees.
    pub fn rotated_default(nx: usize, ny: usize) -> Self {
        Problem::RotatedAniso2d {
            nx,
            ny,
            eps: 0.001,
            theta: PI / 6.0,
        }
    }

    pub fn assemble(&self) -> Result<CsrMatrix> {
        let grid = |kind, dims: &[usize]| {
            generate_stencil(kind, dims).map_err(|e| BenchError::config("nx/ny/nz", e))
        };
        match *self {
            Problem::Laplace2d { nx, ny } => grid(Stencil::Laplace2d, &[nx, ny]),
            Problem::Laplace3d { nx, ny, nz } => grid(Stencil::Laplace3d, &[nx, ny, nz]),
            Problem::RotatedAniso2d { nx, ny, eps, theta } => {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(BenchError::config("eps", format!("must be positive, got {eps}")));
                }
                if !theta.is_finite() {
                    return Err(BenchError::config("theta-angle", "must be finite"));
                }
                grid(Stencil::RotatedAniso2d { eps, theta }, &[nx, ny])
            }
            Problem::MatrixFile { ref path } => {
                let a = mtx::read_matrix_market(path).map_err(|source| BenchError::Matrix {
                    path: path.clone(),
                    source,
                })?;
                if a.n_rows() != a.n_cols() {
                    return Err(BenchError::Matrix {
                        path: path.clone(),
                        source: nap_amg::Error::InvalidMatrix(format!(
                            "expected a square matrix, got {} x {}",
                            a.n_rows(),
                            a.n_cols()
                        )),
                    });
                }
                Ok(a)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub procs: usize,
    pub ppn: usize,
    /// Model parameters file already loaded into `setup.model`; kept for
    /// the report only.
    pub model_params: Option<PathBuf>,
    pub setup: SetupConfig,
    pub solve: SolveOptions,
}

impl ExperimentConfig {
    pub fn new(problem: Problem, procs: usize, ppn: usize, setup: SetupConfig) -> Self {
        Self {
            problem,
            procs,
            ppn,
            model_params: None,
            setup,
            solve: SolveOptions::default(),
        }
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::new(self.procs, self.ppn).map_err(|e| BenchError::config("procs/ppn", e))
    }

    /// Checks everything that can be checked before assembling the matrix.
    pub fn validate(&self) -> Result<()> {
        self.topology()?;
        let s = &self.setup;
        if !(s.strength_theta > 0.0 && s.strength_theta <= 1.0) {
            return Err(BenchError::config(
                "strength-theta",
                format!("must lie in (0, 1], got {}", s.strength_theta),
            ));
        }
        if !(s.stall_ratio > 0.0 && s.stall_ratio <= 1.0) {
            return Err(BenchError::config(
                "stall_ratio",
                format!("must lie in (0, 1], got {}", s.stall_ratio),
            ));
        }
        s.model.validate().map_err(|e| {
            let key = match &self.model_params {
                Some(p) => format!("model-params ({})", p.display()),
                None => "model-params".into(),
            };
            BenchError::config(key, e)
        })?;
        self.solve.validate().map_err(BenchError::from_core)
    }
}
