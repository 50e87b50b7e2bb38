use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::dopri::{self, StepAction, Tolerances};
use crate::model::{ContactHamiltonian, Family, HamiltonianModel, PhasePoint, TorusPoint, MAX_DIM};

/// The `(x, p)` part of a discounted system `H = λu + h(x, p)`:
/// `ẋ = ∂h/∂p`, `ṗ = -∂h/∂x - λp`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedSystem {
    model: HamiltonianModel,
}

pub fn reduce_discounted(model: &HamiltonianModel) -> Result<ReducedSystem> {
    if model.family() != Family::Discounted {
        return Err(Error::Contract(format!(
            "reduction needs the discounted family, got {:?}",
            model.family()
        )));
    }
    Ok(ReducedSystem { model: model.clone() })
}

/// Reduced orbit with its dense output.
#[derive(Debug, Clone)]
pub struct ReducedOrbit {
    pub dim: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    segments: Vec<dopri::DenseSegment>,
}

impl ReducedOrbit {
    pub fn sample(&self, t: f64) -> Option<Vec<f64>> {
        let seg = self.segments.iter().find(|s| s.contains(t))?;
        Some(seg.eval(t))
    }
}

/// Lifted full-phase-space orbit and its consistency checks.
#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// `max |λu + h(x, p)|`.
    pub identity_residual: f64,
    /// `max ‖finite-difference derivative - X_H‖` at interior grid times.
    pub field_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformalReport {
    pub times: Vec<f64>,
    pub determinants: Vec<f64>,
    pub max_relative_error: f64,
}

/// Finite-difference step for the lift residual.
const FD_STEP: f64 = 1e-4;

impl ReducedSystem {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.model.lambda()
    }

    pub fn model(&self) -> &HamiltonianModel {
        &self.model
    }

    fn point(&self, s: &[f64]) -> PhasePoint {
        let n = self.dim();
        let mut p = [0.0; MAX_DIM];
        p[..n].copy_from_slice(&s[n..2 * n]);
        PhasePoint::from_parts(TorusPoint::wrapped(&s[..n]), p, 0.0)
    }

    /// `h(x, p)`.
    pub fn energy(&self, s: &[f64]) -> f64 {
        self.model.base_energy(&self.point(s))
    }

    /// Reduced field at the state `[x.., p..]`.
    pub fn field(&self, s: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let z = self.point(s);
        let hx = self.model.grad_x(&z);
        let hp = self.model.grad_p(&z);
        let lambda = self.lambda();
        for i in 0..n {
            out[i] = hp[i];
            out[n + i] = -hx[i] - lambda * s[n + i];
        }
    }

    /// Jacobian of the reduced field.
    pub fn jacobian(&self, s: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let d = self.model.second(&self.point(s));
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for k in 0..n {
                j[(i, k)] = d.xp[k][i];
                j[(i, n + k)] = d.pp[i][k];
                j[(n + i, k)] = -d.xx[i][k];
                j[(n + i, n + k)] = -d.xp[i][k] - if i == k { self.lambda() } else { 0.0 };
            }
        }
        j
    }

    pub fn integrate(&self, x0: &[f64], p0: &[f64], t_final: f64, tol: Tolerances) -> Result<ReducedOrbit> {
        let n = self.dim();
        if x0.len() != n || p0.len() != n || x0.iter().chain(p0).any(|v| !v.is_finite()) {
            return Err(Error::InputDomain(format!("bad reduced initial state {x0:?}, {p0:?}")));
        }
        let y0: Vec<f64> = x0.iter().chain(p0).copied().collect();
        let mut orbit = ReducedOrbit {
            dim: n,
            times: vec![0.0],
            states: vec![y0.clone()],
            segments: Vec::new(),
        };
        let out = dopri::solve(|_, y, dy| self.field(y, dy), 0.0, &y0, t_final, tol, |step| {
            orbit.times.push(step.t);
            orbit.states.push(step.y.clone());
            orbit.segments.push(step.segment);
            StepAction::Continue
        });
        if out != dopri::Outcome::Reached {
            return Err(Error::SolverFailure(format!("reduced integration ended with {out:?}")));
        }
        Ok(orbit)
    }

    /// `(x, p, -h(x, p)/λ)`.
    pub fn lift_state(&self, s: &[f64]) -> PhasePoint {
        let mut z = self.point(s);
        z.u = -self.energy(s) / self.lambda();
        z
    }
}

pub(crate) fn tight() -> Tolerances {
    Tolerances {
        rel: 1e-12,
        abs: 1e-14,
        max_step: 0.1,
    }
}

/// Integrates the reduced system from `(x0, p0)` and lifts it with
/// `u = -h/λ` at each time of `t_grid`.
pub fn lift_discounted(reduced: &ReducedSystem, x0: &[f64], p0: &[f64], t_grid: &[f64]) -> Result<LiftReport> {
    let t_max = t_grid.iter().copied().fold(0.0, f64::max) + 2.0 * FD_STEP;
    if t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InputDomain("lift grid must be finite and non-negative".into()));
    }
    let orbit = reduced.integrate(x0, p0, t_max, tight())?;
    let lambda = reduced.lambda();
    let model = reduced.model();
    let mut points = Vec::with_capacity(t_grid.len());
    let mut identity_residual: f64 = 0.0;
    let mut field_residual: f64 = 0.0;
    for &t in t_grid {
        let s = orbit.sample(t).expect("grid inside the integrated span");
        let z = reduced.lift_state(&s);
        identity_residual = identity_residual.max((lambda * z.u + reduced.energy(&s)).abs());
        if t >= FD_STEP {
            let a = orbit.sample(t - FD_STEP).expect("inside span");
            let b = orbit.sample(t + FD_STEP).expect("inside span");
            let (za, zb) = (reduced.lift_state(&a), reduced.lift_state(&b));
            let mut fd: Vec<f64> = a.iter().zip(&b).map(|(l, r)| (r - l) / (2.0 * FD_STEP)).collect();
            fd.push((zb.u - za.u) / (2.0 * FD_STEP));
            let exact = model.vector_field(&z).to_vec();
            let r = fd.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            field_residual = field_residual.max(r);
        }
        points.push(z);
    }
    Ok(LiftReport {
        times: t_grid.to_vec(),
        points,
        identity_residual,
        field_residual,
    })
}

/// Integrates the variational equation along the reduced orbit and compares
/// `det Dφ^t` with `e^{-nλt}` at every accepted step.
pub fn conformal_decay_check(reduced: &ReducedSystem, x0: &[f64], p0: &[f64], t_final: f64) -> Result<ConformalReport> {
    let n = reduced.dim();
    let m = 2 * n;
    if x0.len() != n || p0.len() != n {
        return Err(Error::InputDomain("initial state dimension mismatch".into()));
    }
    let mut y0: Vec<f64> = x0.iter().chain(p0).copied().collect();
    for i in 0..m {
        for k in 0..m {
            y0.push(if i == k { 1.0 } else { 0.0 });
        }
    }
    let rate = n as f64 * reduced.lambda();
    let det_of = |y: &[f64]| DMatrix::from_row_slice(m, m, &y[m..]).determinant();
    let mut times = vec![0.0];
    let mut determinants = vec![det_of(&y0)];
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        reduced.field(&y[..m], &mut dy[..m]);
        let a = reduced.jacobian(&y[..m]);
        let phi = DMatrix::from_row_slice(m, m, &y[m..]);
        let d = a * phi;
        for i in 0..m {
            for k in 0..m {
                dy[m + i * m + k] = d[(i, k)];
            }
        }
    };
    let out = dopri::solve(rhs, 0.0, &y0, t_final, tight(), |step| {
        times.push(step.t);
        determinants.push(det_of(step.y));
        StepAction::Continue
    });
    if out != dopri::Outcome::Reached {
        return Err(Error::SolverFailure(format!("variational integration ended with {out:?}")));
    }
    let max_relative_error = times
        .iter()
        .zip(&determinants)
        .map(|(t, d)| {
            let exact = (-rate * t).exp();
            (d - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    Ok(ConformalReport {
        times,
        determinants,
        max_relative_error,
    })
}
