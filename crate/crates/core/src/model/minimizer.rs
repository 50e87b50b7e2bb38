use super::hamiltonian::ContactHamiltonian;
use super::torus::{PhasePoint, TorusPoint, Vector, MAX_DIM};
use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;
const MAX_ITERS: usize = 100;

/// Minimizer `P*(x, u)` of the strictly convex map `p ↦ H(x, p, u)`.
///
/// Damped Newton on `∂H/∂p = 0` started from `p = 0`, with backtracking on
/// `H` itself. Failure to reach `‖∂H/∂p‖ <= 1e-10` means the model is not
/// numerically convex/coercive in `p`.
pub fn p_star<H: ContactHamiltonian + ?Sized>(model: &H, x: &TorusPoint, u: f64) -> Result<Vector> {
    let n = model.dim();
    let mut z = PhasePoint::from_parts(*x, [0.0; MAX_DIM], u);
    let mut g = model.grad_p(&z);
    let mut value = model.value(&z);
    for _ in 0..MAX_ITERS {
        let gnorm = norm(&g, n);
        if gnorm <= RESIDUAL_TOL {
            return Ok(z.p_raw());
        }
        let hess = model.hess_pp(&z);
        let dir = match solve(&hess, &g, n) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => g,
        };
        let p = z.p_raw();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = [0.0; MAX_DIM];
            for i in 0..n {
                trial[i] = p[i] - t * dir[i];
            }
            let cand = PhasePoint::from_parts(*x, trial, u);
            let cv = model.value(&cand);
            let cg = model.grad_p(&cand);
            // accept on decrease of H, or of the gradient once H is flat to rounding
            if cv < value || (cv <= value + 1e-15 * value.abs().max(1.0) && norm(&cg, n) < gnorm) {
                z = cand;
                value = cv;
                g = cg;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = norm(&g, n);
    if residual <= RESIDUAL_TOL {
        Ok(z.p_raw())
    } else {
        Err(Error::SolverFailure(format!(
            "p_star: Newton stalled at x={:?} u={u} with residual {residual:e}",
            x.coords()
        )))
    }
}

fn norm(v: &Vector, n: usize) -> f64 {
    v[..n].iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn solve(m: &[[f64; MAX_DIM]; MAX_DIM], b: &Vector, n: usize) -> Option<Vector> {
    if n == 1 {
        (m[0][0] != 0.0).then(|| [b[0] / m[0][0], 0.0])
    } else {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        (det != 0.0).then(|| {
            [
                (m[1][1] * b[0] - m[0][1] * b[1]) / det,
                (m[0][0] * b[1] - m[1][0] * b[0]) / det,
            ]
        })
    }
}
