use serde::{Deserialize, Serialize};

use super::dopri::{self, DenseSegment, Outcome, StepAction, Tolerances};
use crate::error::{Error, Result};
use crate::hj::GridFunction;
use crate::model::{ContactHamiltonian, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Integration settings. `t_final` is a duration; backward runs end at
/// `-t_final`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_final: f64,
    pub direction: Direction,
    pub blow_up_radius: f64,
    pub equilibrium_tol: f64,
    /// Stop once `‖X_H‖ < equilibrium_tol` at both ends of a step.
    pub stop_at_equilibrium: bool,
    /// Re-solve `u` after every step so that `H` follows
    /// `H(z0)·exp(-∫∂H/∂u)` to rounding.
    pub energy_projection: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 1.0,
            t_final: 1.0,
            direction: Direction::Forward,
            blow_up_radius: 1e6,
            equilibrium_tol: 1e-9,
            stop_at_equilibrium: true,
            energy_projection: true,
        }
    }
}

impl IntegratorConfig {
    pub fn forward(t_final: f64) -> Self {
        Self {
            t_final,
            ..Self::default()
        }
    }

    pub fn backward(t_final: f64) -> Self {
        Self {
            t_final,
            direction: Direction::Backward,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("blow_up_radius", self.blow_up_radius),
            ("equilibrium_tol", self.equilibrium_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::InputDomain(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InputDomain(format!(
                "t_final must be a finite duration >= 0, got {}",
                self.t_final
            )));
        }
        Ok(())
    }

    pub(crate) fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.rel_tol,
            abs: self.abs_tol,
            max_step: self.max_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    ReachedTFinal,
    ConvergedToEquilibrium { witness: PhasePoint },
    BlowUp { last_finite: PhasePoint },
    StepUnderflow { t: f64 },
    /// Stopped by a caller-supplied predicate.
    Stopped { t: f64 },
}

/// A time-stamped orbit with per-step energy (and optionally `F`) values.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub h_values: Vec<f64>,
    pub f_values: Option<Vec<f64>>,
    pub termination: Termination,
    #[serde(skip)]
    segments: Vec<DenseSegment>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> &PhasePoint {
        &self.points[0]
    }

    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectory holds its initial point")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory holds its initial time")
    }

    /// Dense segments; segment `k` spans `times[k]..times[k+1]`.
    pub fn segments(&self) -> &[DenseSegment] {
        &self.segments
    }

    /// Dense-output state at time `t`, if `t` lies in the computed span.
    pub fn sample(&self, t: f64) -> Option<PhasePoint> {
        let seg = self.segment_at(t)?;
        Some(PhasePoint::from_state(&seg.eval(t), self.dim))
    }

    fn segment_at(&self, t: f64) -> Option<&DenseSegment> {
        if self.segments.is_empty() {
            return None;
        }
        let forward = self.segments[0].h > 0.0;
        let idx = self.segments.partition_point(|s| if forward { s.t1() < t } else { s.t1() > t });
        self.segments.get(idx).filter(|s| s.contains(t))
    }

    /// Fills `f_values` with the second Lyapunov function read from `gf`.
    pub fn attach_second_lyapunov(&mut self, gf: &GridFunction) {
        self.f_values = Some(self.points.iter().map(|z| gf.second_lyapunov(z)).collect());
    }
}

/// Integrates `X_H` from `z0`.
pub fn integrate<H: ContactHamiltonian + ?Sized>(
    model: &H,
    z0: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_until(model, z0, cfg, |_, _| false)
}

/// Like [`integrate`], additionally stopping (with `Termination::Stopped`)
/// once `stop(t, z)` returns true after an accepted step.
pub fn integrate_until<H, S>(model: &H, z0: &PhasePoint, cfg: &IntegratorConfig, mut stop: S) -> Result<Trajectory>
where
    H: ContactHamiltonian + ?Sized,
    S: FnMut(f64, &PhasePoint) -> bool,
{
    cfg.validate()?;
    if !z0.is_finite() || z0.dim() != model.dim() {
        return Err(Error::InputDomain(format!("bad initial point {z0:?} for a model on T^{}", model.dim())));
    }
    let n = model.dim();
    let h0 = model.value(z0);
    let mut traj = Trajectory {
        dim: n,
        times: vec![0.0],
        points: vec![*z0],
        h_values: vec![h0],
        f_values: None,
        termination: Termination::ReachedTFinal,
        segments: Vec::new(),
    };

    // state: [x, p, u, ∫∂H/∂u]
    let mut y0 = z0.to_state();
    y0.push(0.0);
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let z = PhasePoint::from_state(y, n);
        let v = model.vector_field(&z);
        dy[..n].copy_from_slice(&v.x_dot[..n]);
        dy[n..2 * n].copy_from_slice(&v.p_dot[..n]);
        dy[2 * n] = v.u_dot;
        dy[2 * n + 1] = model.d_u(&z);
    };

    let mut prev_small = model.vector_field(z0).norm() < cfg.equilibrium_tol;
    let mut termination = None;
    let t_end = cfg.direction.sign() * cfg.t_final;
    let outcome = dopri::solve(rhs, 0.0, &y0, t_end, cfg.tolerances(), |step| {
        let mut action = StepAction::Continue;
        if cfg.energy_projection {
            let z = PhasePoint::from_state(step.y, n);
            let target = h0 * (-step.y[2 * n + 1]).exp();
            if let Some(u) = model.solve_u(&z, target).filter(|u| u.is_finite()) {
                step.y[2 * n] = u;
                action = StepAction::Modified;
            }
        }
        let z = PhasePoint::from_state(step.y, n);
        traj.times.push(step.t);
        traj.points.push(z);
        traj.h_values.push(model.value(&z));
        traj.segments.push(step.segment);

        if z.u.abs() + z.p_norm() > cfg.blow_up_radius || !z.is_finite() {
            termination = Some(Termination::BlowUp { last_finite: z });
            return StepAction::Stop;
        }
        let small = model.vector_field(&z).norm() < cfg.equilibrium_tol;
        if cfg.stop_at_equilibrium && small && prev_small {
            termination = Some(Termination::ConvergedToEquilibrium { witness: z });
            return StepAction::Stop;
        }
        prev_small = small;
        if stop(step.t, &z) {
            termination = Some(Termination::Stopped { t: step.t });
            return StepAction::Stop;
        }
        action
    });
    traj.termination = match (outcome, termination) {
        (_, Some(t)) => t,
        (Outcome::Reached, None) => Termination::ReachedTFinal,
        (Outcome::StepUnderflow, None) => Termination::StepUnderflow { t: traj.t_end() },
        (Outcome::NonFinite, None) => Termination::BlowUp { last_finite: *traj.last() },
        (Outcome::Stopped, None) => unreachable!("solver stops only on request"),
    };
    Ok(traj)
}
