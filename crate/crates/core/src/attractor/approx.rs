use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::trapping::{Membership, TrappingSpec};
use crate::error::{Error, Result};
use crate::flow::{integrate, Direction, IntegratorConfig, Termination};
use crate::model::{ContactHamiltonian, MonotoneSign, PhasePoint, TorusPoint, MAX_DIM};

const MIN_ACCEPTANCE: f64 = 1e-4;
const MIN_ATTEMPTS_BEFORE_GIVING_UP: usize = 100_000;

/// Rejection-samples exactly `n` points of `Ȳ_δ`, restricted to its energy
/// band when `spec.energy_band` is set. Reproducible per seed.
pub fn sample_trapping_set<H: ContactHamiltonian + ?Sized>(
    spec: &TrappingSpec,
    model: &H,
    n: usize,
    seed: u64,
) -> Result<Vec<PhasePoint>> {
    let dim = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = spec.coercivity_radius;
    let (u_lo, u_hi) = spec.u_range;
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        let mut x = [0.0; MAX_DIM];
        let mut p = [0.0; MAX_DIM];
        for i in 0..dim {
            x[i] = rng.gen_range(0.0..std::f64::consts::TAU);
            p[i] = rng.gen_range(-r..=r);
        }
        let u = rng.gen_range(u_lo..=u_hi);
        let z = PhasePoint::from_parts(TorusPoint::wrapped(&x[..dim]), p, u);
        let inside = z.p_norm() <= r
            && spec.membership(model, &z) != Membership::Outside
            && (!spec.energy_band || model.value(&z) >= -spec.delta);
        if inside {
            out.push(z);
        }
        if attempts >= MIN_ATTEMPTS_BEFORE_GIVING_UP {
            let rate = out.len() as f64 / attempts as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(Error::SamplingFailure { rate, attempts });
            }
        }
    }
    Ok(out)
}

/// Finite-time image `Φ^T(S)` of a sampled trapping set.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorApprox {
    pub points: Vec<PhasePoint>,
    pub t: f64,
    pub delta: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub abs_h: Vec<f64>,
    pub f: Vec<f64>,
    pub max_abs_h: f64,
    pub max_f: f64,
    /// `e^{-λT}·δ·(1 + 1e-6)`.
    pub h_bound: f64,
    /// `e^{-λT}·δ + C·h`.
    pub f_bound: f64,
    pub invariants_hold: bool,
}

impl AttractorApprox {
    /// CSV with columns `x.., p.., u, H, F`.
    pub fn to_csv<H: ContactHamiltonian + ?Sized>(&self, model: &H) -> String {
        let n = model.dim();
        let mut out = String::new();
        for i in 1..=n {
            let _ = write!(out, "x{i},");
        }
        for i in 1..=n {
            let _ = write!(out, "p{i},");
        }
        out.push_str("u,H,F\n");
        for (k, z) in self.points.iter().enumerate() {
            for v in z.x.coords().iter().chain(z.p()) {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{},{},{}", z.u, model.value(z), self.f[k]);
        }
        out
    }
}

/// Samples `Ȳ_δ` and flows every sample for time `T` in the attracting
/// direction.
pub fn approximate_attractor<H: ContactHamiltonian + ?Sized>(
    model: &H,
    spec: &TrappingSpec,
    t: f64,
    n: usize,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<AttractorApprox> {
    let samples = sample_trapping_set(spec, model, n, seed)?;
    flow_cloud(model, spec, &samples, t, seed, cfg)
}

/// Flows a given cloud for time `T` and collects the diagnostics.
pub fn flow_cloud<H: ContactHamiltonian + ?Sized>(
    model: &H,
    spec: &TrappingSpec,
    samples: &[PhasePoint],
    t: f64,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<AttractorApprox> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InputDomain(format!("T must be finite and >= 0, got {t}")));
    }
    let mut cfg = *cfg;
    cfg.t_final = t;
    cfg.stop_at_equilibrium = false;
    cfg.direction = match model.monotone_sign() {
        MonotoneSign::Minus => Direction::Forward,
        MonotoneSign::Plus => Direction::Backward,
    };
    let ends: Vec<Result<PhasePoint>> = samples
        .par_iter()
        .map(|z| {
            let traj = integrate(model, z, &cfg)?;
            match traj.termination {
                Termination::ReachedTFinal => Ok(*traj.last()),
                other => Err(Error::InternalContradiction(format!(
                    "orbit from {z:?} inside the trapping set ended with {other:?}"
                ))),
            }
        })
        .collect();
    let points: Vec<PhasePoint> = ends.into_iter().collect::<Result<_>>()?;
    let abs_h: Vec<f64> = points.iter().map(|z| model.value(z).abs()).collect();
    let f: Vec<f64> = points.iter().map(|z| spec.second_lyapunov(z)).collect();
    let decay = (-model.lambda() * t).exp();
    let h_bound = decay * spec.delta * (1.0 + 1e-6);
    let f_bound = decay * spec.delta + spec.grid_slack();
    let max_abs_h = abs_h.iter().copied().fold(0.0, f64::max);
    let max_f = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AttractorApprox {
        invariants_hold: max_abs_h <= h_bound && (points.is_empty() || max_f <= f_bound),
        points,
        t,
        delta: spec.delta,
        n_samples: samples.len(),
        seed,
        abs_h,
        f,
        max_abs_h,
        max_f,
        h_bound,
        f_bound,
    })
}
