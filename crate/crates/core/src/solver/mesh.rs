use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform periodic mesh; `ny == 1` denotes a one-dimensional grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
}

impl Mesh {
    pub fn new(nx: usize, ny: usize, dx: f64) -> Result<Self> {
        if nx < 3 || ny == 0 || ny == 2 || !(dx > 0.0) {
            return Err(Error::domain(
                "Mesh",
                format!("need nx >= 3, ny = 1 or ny >= 3, dx > 0; got {nx}x{ny}, dx={dx}"),
            ));
        }
        Ok(Mesh { nx, ny, dx })
    }

    pub fn line(nx: usize, dx: f64) -> Result<Self> {
        Self::new(nx, 1, dx)
    }

    pub fn dim(&self) -> usize {
        if self.ny == 1 {
            1
        } else {
            2
        }
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Cell volume dx^d.
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.dim() as i32)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    /// Periodic neighbour indices (left, right) in x.
    #[inline]
    pub fn x_neighbors(&self, k: usize) -> (usize, usize) {
        let (i, j) = self.ij(k);
        let l = if i == 0 { self.nx - 1 } else { i - 1 };
        let r = if i + 1 == self.nx { 0 } else { i + 1 };
        (self.idx(l, j), self.idx(r, j))
    }

    /// Periodic neighbour indices (down, up) in y.
    #[inline]
    pub fn y_neighbors(&self, k: usize) -> (usize, usize) {
        let (i, j) = self.ij(k);
        let d = if j == 0 { self.ny - 1 } else { j - 1 };
        let u = if j + 1 == self.ny { 0 } else { j + 1 };
        (self.idx(i, d), self.idx(i, u))
    }

    /// Cell-centre coordinates.
    pub fn center(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dx)
    }

    pub fn lengths(&self) -> (f64, f64) {
        (self.nx as f64 * self.dx, self.ny as f64 * self.dx)
    }

    /// Central-difference gradient of a periodic field.
    pub fn gradient(&self, f: &[f64]) -> Vec<[f64; 2]> {
        (0..self.cells())
            .map(|k| {
                let (l, r) = self.x_neighbors(k);
                let gx = (f[r] - f[l]) / (2.0 * self.dx);
                let gy = if self.dim() == 2 {
                    let (d, u) = self.y_neighbors(k);
                    (f[u] - f[d]) / (2.0 * self.dx)
                } else {
                    0.0
                };
                [gx, gy]
            })
            .collect()
    }

    /// Five-point (or three-point) Laplacian of a periodic field.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let h2 = self.dx * self.dx;
        (0..self.cells())
            .map(|k| {
                let (l, r) = self.x_neighbors(k);
                let mut v = f[l] + f[r] - 2.0 * f[k];
                if self.dim() == 2 {
                    let (d, u) = self.y_neighbors(k);
                    v += f[d] + f[u] - 2.0 * f[k];
                }
                v / h2
            })
            .collect()
    }
}
