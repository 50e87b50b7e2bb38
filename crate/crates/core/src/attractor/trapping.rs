use serde::Serialize;

use crate::error::{Error, Result};
use crate::hj::{GridFunction, SolutionKind};
use crate::model::{monotone_root, ContactHamiltonian, MonotoneSign, PhasePoint, TorusPoint, MAX_DIM};

/// Tolerance on `|H|` for membership in `Y = H⁻¹(0) ∩ U`.
pub const Y_ENERGY_TOL: f64 = 1e-9;

/// The compact trapping sets built from `δ` and the solved `u±`.
///
/// `Ȳ_δ` is contained in the box `{‖p‖ <= coercivity_radius}` ×
/// `[u_range.0, u_range.1]`.
#[derive(Debug, Clone, Serialize)]
pub struct TrappingSpec {
    pub delta: f64,
    pub e_bound: f64,
    /// `U` in `Y(δ, U)`: `U_lower - δ` for the minus sign, `U_upper + δ`
    /// for the plus sign.
    pub u_bound: f64,
    pub u_range: (f64, f64),
    pub coercivity_radius: f64,
    /// Sample only `H >= -δ` (see [`TrappingSpec::energy_band`]).
    pub energy_band: bool,
    #[serde(skip)]
    gf: GridFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    InY,
    InYDelta,
    Outside,
}

impl TrappingSpec {
    pub fn new<H: ContactHamiltonian + ?Sized>(model: &H, gf: GridFunction, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InputDomain(format!("delta must be > 0, got {delta}")));
        }
        if gf.kind() != SolutionKind::for_sign(model.monotone_sign()) {
            return Err(Error::Contract(format!(
                "{:?} grid function attached to a {:?} model",
                gf.kind(),
                model.monotone_sign()
            )));
        }
        let (lo, hi) = gf.bounds();
        // u range of H(x, 0, u) <= δ over the torus, from a fine x grid
        let far = extreme_root(model, delta)?;
        let (u_bound, u_range) = match model.monotone_sign() {
            MonotoneSign::Minus => (lo - delta, (lo - delta, far + delta)),
            MonotoneSign::Plus => (hi + delta, (far - delta, hi + delta)),
        };
        Ok(Self {
            delta,
            e_bound: delta,
            u_bound,
            u_range,
            coercivity_radius: model.coercivity_radius(delta, u_bound),
            energy_band: true,
            gf,
        })
    }

    /// Restricts sampling to `Ȳ_δ ∩ {H >= -δ}`, itself compact, forward
    /// invariant and containing `Y`. Disable to sample all of `Ȳ_δ`.
    pub fn with_energy_band(mut self, on: bool) -> Self {
        self.energy_band = on;
        self
    }

    pub fn grid_function(&self) -> &GridFunction {
        &self.gf
    }

    pub fn grid_slack(&self) -> f64 {
        self.gf.grid_slack()
    }

    pub fn second_lyapunov(&self, z: &PhasePoint) -> f64 {
        self.gf.second_lyapunov(z)
    }

    pub fn membership<H: ContactHamiltonian + ?Sized>(&self, model: &H, z: &PhasePoint) -> Membership {
        let h = model.value(z);
        let f = self.second_lyapunov(z);
        if h.abs() <= Y_ENERGY_TOL && f <= self.grid_slack() {
            Membership::InY
        } else if h < self.delta && f < self.delta {
            Membership::InYDelta
        } else {
            Membership::Outside
        }
    }

    /// Membership in the closure `{H <= δ, F <= δ}`.
    pub fn in_closure<H: ContactHamiltonian + ?Sized>(&self, model: &H, z: &PhasePoint) -> bool {
        model.value(z) <= self.delta && self.second_lyapunov(z) <= self.delta
    }
}

/// Largest (minus sign) or smallest (plus sign) `u` with `H(x, 0, u) = δ`.
fn extreme_root<H: ContactHamiltonian + ?Sized>(model: &H, delta: f64) -> Result<f64> {
    let n = model.dim();
    let m: usize = if n == 1 { 2048 } else { 256 };
    let h = std::f64::consts::TAU / m as f64;
    let mut best = match model.monotone_sign() {
        MonotoneSign::Minus => f64::NEG_INFINITY,
        MonotoneSign::Plus => f64::INFINITY,
    };
    for k in 0..m.pow(n as u32) {
        let c = [(k % m) as f64 * h, (k / m) as f64 * h];
        let z = PhasePoint::from_parts(TorusPoint::wrapped(&c[..n]), [0.0; MAX_DIM], 0.0);
        let u = monotone_root(|u| model.value(&z.with_u(u)) - delta, 0.0, 1e6).ok_or_else(|| {
            Error::RootNotBracketed {
                x: c[..n].to_vec(),
                limit: 1e6,
            }
        })?;
        best = match model.monotone_sign() {
            MonotoneSign::Minus => best.max(u),
            MonotoneSign::Plus => best.min(u),
        };
    }
    Ok(best)
}
