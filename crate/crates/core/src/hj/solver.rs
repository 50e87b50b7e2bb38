use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::gridfn::{GridFunction, SolutionKind, SolveStats};
use crate::error::{Error, Result};
use crate::model::{monotone_root, ContactHamiltonian, Mirrored, MonotoneSign, PhasePoint, TorusPoint, MAX_DIM};

/// Search limit for the constant-bound root find.
pub const ROOT_LIMIT: f64 = 1e6;
const MONOTONE_CHECK_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HjOptions {
    /// Stop when the largest nodal change per unit pseudo-time drops below
    /// `tol`; `None` means `1e-10·λ`.
    pub tol: Option<f64>,
    pub max_iters: usize,
}

impl Default for HjOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_iters: 2_000_000,
        }
    }
}

/// `(min, max)` over grid nodes of the root `U(x)` of `H(x, 0, U) = 0`.
///
/// Constants below (above) these are sub- (super-) solutions, so the
/// viscosity solution lies between them.
pub fn constant_bounds<H: ContactHamiltonian + ?Sized>(model: &H, grid: &Grid) -> Result<(f64, f64)> {
    check_grid(model, grid)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..grid.len() {
        let u = node_root(model, &grid.node(k))?;
        lo = lo.min(u);
        hi = hi.max(u);
    }
    Ok((lo, hi))
}

fn node_root<H: ContactHamiltonian + ?Sized>(model: &H, x: &TorusPoint) -> Result<f64> {
    let z = PhasePoint::from_parts(*x, [0.0; MAX_DIM], 0.0);
    monotone_root(|u| model.value(&z.with_u(u)), 0.0, ROOT_LIMIT).ok_or_else(|| Error::RootNotBracketed {
        x: x.coords().to_vec(),
        limit: ROOT_LIMIT,
    })
}

fn check_grid<H: ContactHamiltonian + ?Sized>(model: &H, grid: &Grid) -> Result<()> {
    if grid.dim() != model.dim() {
        return Err(Error::InputDomain(format!(
            "grid on T^{} for a model on T^{}",
            grid.dim(),
            model.dim()
        )));
    }
    Ok(())
}

/// Viscosity solution of `H(x, Du, u) = 0` (`u-`) for minus-sign models, or
/// `u+` for plus-sign models via the mirror `H(x, -p, -u)`.
pub fn solve_hj<H: ContactHamiltonian + ?Sized>(model: &H, grid: &Grid, opts: &HjOptions) -> Result<GridFunction> {
    check_grid(model, grid)?;
    match model.monotone_sign() {
        MonotoneSign::Minus => solve_minus(model, grid, opts),
        MonotoneSign::Plus => {
            let w = solve_minus(&Mirrored(model), grid, opts)?;
            Ok(GridFunction {
                values: w.values.iter().map(|v| -v).collect(),
                kind: SolutionKind::UPlus,
                bounds: (-w.bounds.1, -w.bounds.0),
                ..w
            })
        }
    }
}

struct Stencil {
    x: TorusPoint,
    /// (backward, forward) neighbour per axis
    nb: [(usize, usize); MAX_DIM],
}

fn solve_minus<H: ContactHamiltonian + ?Sized>(model: &H, grid: &Grid, opts: &HjOptions) -> Result<GridFunction> {
    let n = grid.dim();
    let h = grid.spacing();
    let lambda = model.lambda();
    let (u_lower, u_upper) = constant_bounds(model, grid)?;
    let radius = model.coercivity_radius(0.0, u_lower);
    let sigma = viscosity(model, grid, radius, (u_lower, u_upper));
    let dtau = 0.45 * h / (sigma[..n].iter().sum::<f64>() + lambda * h);
    let tol = opts.tol.unwrap_or(1e-10 * lambda);

    let stencils: Vec<Stencil> = (0..grid.len())
        .map(|k| {
            let mut nb = [(k, k); MAX_DIM];
            for (a, slot) in nb.iter_mut().enumerate().take(n) {
                *slot = (grid.shift(k, a, -1), grid.shift(k, a, 1));
            }
            Stencil { x: grid.node(k), nb }
        })
        .collect();

    let mut u = vec![u_upper; grid.len()];
    let mut next = vec![0.0; grid.len()];
    let mut checkpoint = u.clone();
    let mut max_increase: f64 = 0.0;
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let max_change = next
            .par_iter_mut()
            .zip(stencils.par_iter())
            .enumerate()
            .map(|(k, (out, st))| {
                let uk = u[k];
                let mut p = [0.0; MAX_DIM];
                let mut visc = 0.0;
                for a in 0..n {
                    let dm = (uk - u[st.nb[a].0]) / h;
                    let dp = (u[st.nb[a].1] - uk) / h;
                    p[a] = 0.5 * (dm + dp);
                    visc += sigma[a] * 0.5 * (dp - dm);
                }
                let ham = model.value(&PhasePoint::from_parts(st.x, p, uk)) - visc;
                *out = uk - dtau * ham;
                (dtau * ham).abs()
            })
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut u, &mut next);
        last_update = max_change / dtau;
        if !last_update.is_finite() {
            return Err(Error::SolverFailure(format!("hj iteration produced non-finite values at sweep {iterations}")));
        }
        if iterations % MONOTONE_CHECK_EVERY == 0 {
            for (a, b) in u.iter().zip(&checkpoint) {
                max_increase = max_increase.max(a - b);
            }
            checkpoint.copy_from_slice(&u);
        }
        if last_update < tol {
            break;
        }
    }
    if last_update >= tol {
        return Err(Error::NonConvergence {
            iterations,
            last_update,
        });
    }

    let mut gf = GridFunction {
        grid: *grid,
        values: u,
        kind: SolutionKind::UMinus,
        lipschitz_bound: radius,
        residual_norm: 0.0,
        bounds: (u_lower, u_upper),
        stats: None,
    };
    let all = super::gradients::residuals(model, &gf, usize::MAX);
    gf.residual_norm = all.differentiable;
    gf.stats = Some(SolveStats {
        iterations,
        last_update,
        dtau,
        viscosity: sigma,
        max_monotone_increase: max_increase,
        residual_all_nodes: all.every_node,
    });
    Ok(gf)
}

/// Per-axis `max |∂H/∂p_i|` over `x` on the grid, `‖p‖ <= radius`, `u` in
/// the bounds.
fn viscosity<H: ContactHamiltonian + ?Sized>(model: &H, grid: &Grid, radius: f64, bounds: (f64, f64)) -> [f64; MAX_DIM] {
    let n = grid.dim();
    let stride = (grid.points_per_axis() / 64).max(1);
    let radii: Vec<f64> = (0..=8).map(|i| radius * i as f64 / 8.0).collect();
    let dirs: Vec<[f64; MAX_DIM]> = if n == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        (0..32)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 32.0;
                [a.cos(), a.sin()]
            })
            .collect()
    };
    let mut sigma = [0.0; MAX_DIM];
    for k in 0..grid.len() {
        let idx = grid.multi_index(k);
        if idx[..n].iter().any(|i| i % stride != 0) {
            continue;
        }
        let x = grid.node(k);
        for u in [bounds.0, bounds.1] {
            for r in &radii {
                for d in &dirs {
                    let p = [r * d[0], r * d[1]];
                    let g = model.grad_p(&PhasePoint::from_parts(x, p, u));
                    for a in 0..n {
                        sigma[a] = f64::max(sigma[a], g[a].abs());
                    }
                }
            }
        }
    }
    sigma
}
