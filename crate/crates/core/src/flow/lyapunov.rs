use serde::Serialize;

use super::integrate::{integrate_until, Direction, IntegratorConfig, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::hj::GridFunction;
use crate::model::{ContactHamiltonian, MonotoneSign, PhasePoint};
use crate::structure::EquilibriumSet;

/// Outcome of the energy identity check along one orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `max_t |H(z(t)) - exp(-∫∂H/∂u)·H(z0)|` over stored steps.
    pub residual: f64,
    pub sign_preserved: bool,
    /// Time of the worst residual.
    pub witness_time: f64,
}

/// Pass/fail with the worst margin (positive means violated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovVerdict {
    pub holds: bool,
    pub max_violation: f64,
    pub witness_time: Option<f64>,
    pub checked: usize,
}

impl LyapunovVerdict {
    fn from_margins(margins: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut worst = f64::NEG_INFINITY;
        let mut witness = None;
        let mut checked = 0;
        for (t, m) in margins {
            checked += 1;
            if m > worst {
                worst = m;
                witness = Some(t);
            }
        }
        let holds = worst <= 0.0;
        Self {
            holds,
            max_violation: if checked == 0 { 0.0 } else { worst },
            witness_time: if holds { None } else { witness },
            checked,
        }
    }
}

/// Checks `H(z(t)) = exp(-∫₀ᵗ ∂H/∂u(z(s)) ds)·H(z(0))` along the orbit. The
/// integral is computed by Simpson's rule per step using the dense-output
/// midpoint.
pub fn energy_residual<H: ContactHamiltonian + ?Sized>(model: &H, traj: &Trajectory) -> EnergyReport {
    let h0 = traj.h_values[0];
    let mut integral = 0.0;
    let mut residual: f64 = 0.0;
    let mut witness_time = traj.times[0];
    let mut sign_preserved = true;
    for (k, seg) in traj.segments().iter().enumerate() {
        let (ta, tb) = (traj.times[k], traj.times[k + 1]);
        let mid = PhasePoint::from_state(&seg.eval(0.5 * (ta + tb)), traj.dim);
        let fa = model.d_u(&traj.points[k]);
        let fm = model.d_u(&mid);
        let fb = model.d_u(&traj.points[k + 1]);
        integral += (tb - ta) / 6.0 * (fa + 4.0 * fm + fb);
        let hk = traj.h_values[k + 1];
        let r = (hk - (-integral).exp() * h0).abs();
        if r > residual {
            residual = r;
            witness_time = tb;
        }
        if hk * h0 < 0.0 {
            sign_preserved = false;
        }
    }
    EnergyReport {
        residual,
        sign_preserved,
        witness_time,
    }
}

fn check_direction<H: ContactHamiltonian + ?Sized>(model: &H, traj: &Trajectory) -> Result<()> {
    if traj.len() < 2 {
        return Ok(());
    }
    let forward = traj.times[1] > traj.times[0];
    let expected = model.monotone_sign() == MonotoneSign::Minus;
    if forward != expected {
        return Err(Error::Contract(format!(
            "{:?} model needs a {} trajectory",
            model.monotone_sign(),
            if expected { "forward" } else { "backward" }
        )));
    }
    Ok(())
}

/// `|H(z(t))| <= e^{-λ|t|}·|H(z0)|·(1 + 1e-7)` at every stored step.
///
/// A rounding floor of `4ε` times the size of the terms summed into `H` is
/// added, since `H` cannot be evaluated more accurately than that.
pub fn check_first_lyapunov<H: ContactHamiltonian + ?Sized>(model: &H, traj: &Trajectory) -> Result<LyapunovVerdict> {
    check_direction(model, traj)?;
    let lambda = model.lambda();
    let h0 = traj.h_values[0].abs();
    let t0 = traj.times[0];
    Ok(LyapunovVerdict::from_margins(traj.times.iter().zip(&traj.h_values).zip(&traj.points).skip(1).map(
        |((t, h), z)| {
            let bound = (-lambda * (t - t0).abs()).exp() * h0 * (1.0 + 1e-7) + 4.0 * f64::EPSILON * model.magnitude(z);
            (*t, h.abs() - bound)
        },
    )))
}

/// `F(z(t+s)) <= e^{-λ|s|}·F(z(t)) + C·h` for every stored `t` with
/// `F(z(t)) >= 0` and every later stored `t+s`.
pub fn check_second_lyapunov<H: ContactHamiltonian + ?Sized>(
    model: &H,
    traj: &Trajectory,
    uref: &GridFunction,
) -> Result<LyapunovVerdict> {
    if uref.kind().sign() != model.monotone_sign() {
        return Err(Error::Contract(format!(
            "grid function {:?} does not match a {:?} model",
            uref.kind(),
            model.monotone_sign()
        )));
    }
    check_direction(model, traj)?;
    let lambda = model.lambda();
    let slack = uref.grid_slack();
    let f: Vec<f64> = match &traj.f_values {
        Some(f) => f.clone(),
        None => traj.points.iter().map(|z| uref.second_lyapunov(z)).collect(),
    };
    let mut margins = Vec::new();
    for i in 0..f.len() {
        if f[i] < 0.0 {
            continue;
        }
        for j in i + 1..f.len() {
            let s = (traj.times[j] - traj.times[i]).abs();
            margins.push((traj.times[j], f[j] - (-lambda * s).exp() * f[i] - slack));
        }
    }
    Ok(LyapunovVerdict::from_margins(margins.into_iter()))
}

/// On `H⁻¹(0)`, `u` is non-decreasing in forward time, up to `rate` per unit
/// time.
pub fn check_third_lyapunov(traj: &Trajectory, rate: f64) -> LyapunovVerdict {
    LyapunovVerdict::from_margins(traj.points.windows(2).zip(traj.times.windows(2)).map(|(z, t)| {
        let dt = t[1] - t[0];
        let du = (z[1].u - z[0].u) * dt.signum();
        (t[1], -du - rate * dt.abs())
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LimitClass {
    Equilibrium { id: usize },
    None { note: String },
    Undecided { t_max: f64 },
}

/// Distance to an equilibrium that counts as arrival.
pub const LIMIT_PROXIMITY: f64 = 1e-6;

/// Runs the orbit in the attracting time direction until it sits within
/// `1e-6` of a known equilibrium with `‖X_H‖ < equilibrium_tol`, or until
/// `cfg.t_final` (used as `T_max`).
///
/// Also returns the orbit itself.
pub fn classify_limit<H: ContactHamiltonian + ?Sized>(
    model: &H,
    z0: &PhasePoint,
    equilibria: &EquilibriumSet,
    cfg: &IntegratorConfig,
) -> Result<(LimitClass, Trajectory)> {
    let mut cfg = *cfg;
    cfg.direction = match model.monotone_sign() {
        MonotoneSign::Minus => Direction::Forward,
        MonotoneSign::Plus => Direction::Backward,
    };
    cfg.stop_at_equilibrium = false;
    let mut hit = None;
    let near = |z: &PhasePoint| {
        equilibria
            .equilibria
            .iter()
            .find(|e| e.point.distance(z) <= LIMIT_PROXIMITY)
            .map(|e| e.id)
    };
    let traj = integrate_until(model, z0, &cfg, |_, z| {
        if model.vector_field(z).norm() < cfg.equilibrium_tol {
            hit = near(z);
        }
        hit.is_some()
    })?;
    if hit.is_none() && traj.len() == 1 {
        hit = near(z0).filter(|_| model.vector_field(z0).norm() < cfg.equilibrium_tol);
    }
    let class = match (hit, &traj.termination) {
        (Some(id), _) => LimitClass::Equilibrium { id },
        (None, Termination::BlowUp { .. }) => LimitClass::None {
            note: format!("blow-up at t = {}", traj.t_end()),
        },
        (None, Termination::StepUnderflow { t }) => LimitClass::None {
            note: format!("step underflow at t = {t}"),
        },
        _ => {
            // an equilibrium start never leaves, so check it directly
            match near(z0).filter(|_| model.vector_field(z0).norm() < cfg.equilibrium_tol) {
                Some(id) => LimitClass::Equilibrium { id },
                None => LimitClass::Undecided { t_max: cfg.t_final },
            }
        }
    };
    Ok((class, traj))
}
