use serde::Serialize;

use super::gridfn::GridFunction;
use crate::model::{ContactHamiltonian, PhasePoint, MAX_DIM};

/// Backward and forward difference quotients at every node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneSidedGradients {
    pub backward: Vec<[f64; MAX_DIM]>,
    pub forward: Vec<[f64; MAX_DIM]>,
    /// Largest norm over all choices of one-sided difference per axis.
    pub max_norm: Vec<f64>,
}

impl OneSidedGradients {
    pub fn max_gradient_norm(&self) -> f64 {
        self.max_norm.iter().copied().fold(0.0, f64::max)
    }
}

pub fn one_sided_gradients(gf: &GridFunction) -> OneSidedGradients {
    let grid = gf.grid();
    let n = grid.dim();
    let h = grid.spacing();
    let u = gf.values();
    let mut backward = vec![[0.0; MAX_DIM]; grid.len()];
    let mut forward = vec![[0.0; MAX_DIM]; grid.len()];
    let mut max_norm = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let mut sq = 0.0;
        for a in 0..n {
            let b = (u[k] - u[grid.shift(k, a, -1)]) / h;
            let f = (u[grid.shift(k, a, 1)] - u[k]) / h;
            backward[k][a] = b;
            forward[k][a] = f;
            sq += b.abs().max(f.abs()).powi(2);
        }
        max_norm[k] = sq.sqrt();
    }
    OneSidedGradients {
        backward,
        forward,
        max_norm,
    }
}

pub(crate) struct Residuals {
    pub differentiable: f64,
    pub every_node: f64,
}

/// A node counts as a differentiability node when forward and backward
/// differences agree within `2h·L` on every axis.
pub(crate) fn residuals<H: ContactHamiltonian + ?Sized>(model: &H, gf: &GridFunction, samples: usize) -> Residuals {
    let grid = gf.grid();
    let n = grid.dim();
    let h = grid.spacing();
    let u = gf.values();
    let gap = 2.0 * h * gf.lipschitz_bound();
    let stride = (grid.len() / samples.max(1)).max(1);
    let mut out = Residuals {
        differentiable: 0.0,
        every_node: 0.0,
    };
    for k in (0..grid.len()).step_by(stride) {
        let mut p = [0.0; MAX_DIM];
        let mut smooth = true;
        for a in 0..n {
            let b = (u[k] - u[grid.shift(k, a, -1)]) / h;
            let f = (u[grid.shift(k, a, 1)] - u[k]) / h;
            p[a] = 0.5 * (b + f);
            smooth &= (f - b).abs() <= gap;
        }
        let r = model.value(&PhasePoint::from_parts(grid.node(k), p, u[k])).abs();
        out.every_node = out.every_node.max(r);
        if smooth {
            out.differentiable = out.differentiable.max(r);
        }
    }
    out
}

/// `max |H(x, Du, u(x))|` over (up to `samples`, evenly strided)
/// differentiability nodes, with `Du` the centred difference.
pub fn hj_residual_on_characteristics<H: ContactHamiltonian + ?Sized>(model: &H, gf: &GridFunction, samples: usize) -> f64 {
    residuals(model, gf, samples).differentiable
}
