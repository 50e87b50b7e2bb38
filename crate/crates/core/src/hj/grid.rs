use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{TorusPoint, MAX_DIM};

/// Uniform periodic grid on `T^n` with `N` points per axis.
///
/// Nodes are stored row-major with axis 0 slowest; node `i` sits at
/// `2π·i/N` on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InputDomain(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if n < 32 || !n.is_power_of_two() {
            return Err(Error::InputDomain(format!("points per axis must be a power of two >= 32, got {n}")));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// `2π / N`.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi_index(&self, k: usize) -> [usize; MAX_DIM] {
        if self.dim == 1 {
            [k, 0]
        } else {
            [k / self.n, k % self.n]
        }
    }

    pub fn flat_index(&self, idx: [usize; MAX_DIM]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.n + idx[1]
        }
    }

    pub fn node(&self, k: usize) -> TorusPoint {
        let idx = self.multi_index(k);
        let h = self.spacing();
        let c = [idx[0] as f64 * h, idx[1] as f64 * h];
        TorusPoint::wrapped(&c[..self.dim])
    }

    /// Periodic neighbour of node `k` shifted by `step` along `axis`.
    pub fn shift(&self, k: usize, axis: usize, step: isize) -> usize {
        let mut idx = self.multi_index(k);
        idx[axis] = (idx[axis] as isize + step).rem_euclid(self.n as isize) as usize;
        self.flat_index(idx)
    }
}
