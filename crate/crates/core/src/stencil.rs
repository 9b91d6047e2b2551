//! Structured-grid model problems.
//!
//! Grid points are numbered lexicographically with `x` fastest. Neighbors
//! outside the grid are dropped without touching the diagonal (homogeneous
//! Dirichlet boundary).

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stencil {
    /// 5-point Laplacian, diagonal 4.
    Laplace2d,
    /// 7-point Laplacian, diagonal 6.
    Laplace3d,
    /// Diffusion with conductivities `1` and `eps` along axes rotated by
    /// `theta` radians.
    RotatedAniso2d { eps: f64, theta: f64 },
}

impl Stencil {
    /// Strong anisotropy (`eps = 0.001`) rotated by thirty degrees.
    pub fn rotated_default() -> Self {
        Stencil::RotatedAniso2d {
            eps: 0.001,
            theta: PI / 6.0,
        }
    }

    pub fn dimensions(&self) -> usize {
        match self {
            Stencil::Laplace3d => 3,
            _ => 2,
        }
    }

    /// Offsets and coefficients, center included.
    fn entries(&self) -> Vec<([i64; 3], f64)> {
        match *self {
            Stencil::Laplace2d => vec![
                ([0, -1, 0], -1.0),
                ([-1, 0, 0], -1.0),
                ([0, 0, 0], 4.0),
                ([1, 0, 0], -1.0),
                ([0, 1, 0], -1.0),
            ],
            Stencil::Laplace3d => vec![
                ([0, 0, -1], -1.0),
                ([0, -1, 0], -1.0),
                ([-1, 0, 0], -1.0),
                ([0, 0, 0], 6.0),
                ([1, 0, 0], -1.0),
                ([0, 1, 0], -1.0),
                ([0, 0, 1], -1.0),
            ],
            Stencil::RotatedAniso2d { eps, theta } => rotated_entries(eps, theta),
        }
    }
}

/// Central differences for `-div(D grad u)` with `D = Q diag(1, eps) Q^T`,
/// followed by moving each positive off-center coefficient onto the center.
/// The lumping keeps interior row sums at zero and makes the operator an
/// M-matrix for every angle.
fn rotated_entries(eps: f64, theta: f64) -> Vec<([i64; 3], f64)> {
    let (s, c) = theta.sin_cos();
    let dxx = c * c + eps * s * s;
    let dyy = s * s + eps * c * c;
    let dxy = (1.0 - eps) * c * s;
    let corner = 0.5 * dxy;
    let raw = [
        ([-1, -1, 0], -corner),
        ([0, -1, 0], -dyy),
        ([1, -1, 0], corner),
        ([-1, 0, 0], -dxx),
        ([1, 0, 0], -dxx),
        ([-1, 1, 0], corner),
        ([0, 1, 0], -dyy),
        ([1, 1, 0], -corner),
    ];
    let mut center = 2.0 * dxx + 2.0 * dyy;
    let mut out = Vec::with_capacity(9);
    for (off, v) in raw {
        if v > 0.0 {
            center += v;
        } else if v < 0.0 {
            out.push((off, v));
        }
    }
    out.push(([0, 0, 0], center));
    out.sort_by_key(|(o, _)| (o[2], o[1], o[0]));
    out
}

impl FromStr for Stencil {
    type Err = Error;

    /// Accepts `laplace2d`, `laplace3d` and `aniso2d` (default anisotropy).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace2d" | "laplace2d_5pt" => Ok(Stencil::Laplace2d),
            "laplace3d" | "laplace3d_7pt" => Ok(Stencil::Laplace3d),
            "aniso2d" | "rotated_aniso_2d" => Ok(Stencil::rotated_default()),
            other => Err(Error::UnknownStencil(other.to_string())),
        }
    }
}

/// Assembles the stencil on a grid. `dims` must supply one extent per
/// dimension of the stencil, each at least one.
pub fn generate_stencil(kind: Stencil, dims: &[usize]) -> Result<CsrMatrix> {
    let d = kind.dimensions();
    if dims.len() != d || dims.contains(&0) {
        return Err(Error::InvalidGrid(dims.to_vec()));
    }
    let (nx, ny, nz) = (dims[0], dims[1], if d == 3 { dims[2] } else { 1 });
    let n = nx * ny * nz;
    let entries = kind.entries();

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n * entries.len());
    let mut values = Vec::with_capacity(n * entries.len());
    row_ptr.push(0);
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                for &([dx, dy, dz], v) in &entries {
                    let (px, py, pz) = (x + dx, y + dy, z + dz);
                    if px < 0 || py < 0 || pz < 0 {
                        continue;
                    }
                    let (px, py, pz) = (px as usize, py as usize, pz as usize);
                    if px >= nx || py >= ny || pz >= nz {
                        continue;
                    }
                    col_idx.push(px + nx * (py + ny * pz));
                    values.push(v);
                }
                row_ptr.push(col_idx.len());
            }
        }
    }
    CsrMatrix::new(n, n, row_ptr, col_idx, values)
}
