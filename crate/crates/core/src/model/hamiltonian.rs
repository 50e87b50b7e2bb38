use serde::{Deserialize, Serialize};

use super::potential::TrigPotential;
use super::torus::{PhasePoint, Vector, MAX_DIM};
use crate::error::{Error, Result};

pub type Mat = [[f64; MAX_DIM]; MAX_DIM];

/// Which monotonicity assumption the model satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonotoneSign {
    /// `∂H/∂u >= λ`: |H| decays forward in time.
    Minus,
    /// `∂H/∂u <= -λ`: |H| decays backward in time.
    Plus,
}

impl MonotoneSign {
    /// Sign of `∂H/∂u`.
    pub fn factor(self) -> f64 {
        match self {
            MonotoneSign::Minus => 1.0,
            MonotoneSign::Plus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            MonotoneSign::Minus => MonotoneSign::Plus,
            MonotoneSign::Plus => MonotoneSign::Minus,
        }
    }

    /// Time direction in which the attractor attracts.
    pub fn time_sign(self) -> f64 {
        self.factor()
    }
}

/// All second partial derivatives of `H` at a point.
///
/// `xp[i][j] = ∂²H/∂x_i∂p_j`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SecondDerivatives {
    pub xx: Mat,
    pub xp: Mat,
    pub xu: Vector,
    pub pp: Mat,
    pub pu: Vector,
    pub uu: f64,
}

/// Tangent vector `(ẋ, ṗ, u̇)` at a phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub dim: usize,
    pub x_dot: Vector,
    pub p_dot: Vector,
    pub u_dot: f64,
}

impl Tangent {
    pub fn norm(&self) -> f64 {
        let s: f64 = (0..self.dim)
            .map(|i| self.x_dot[i].powi(2) + self.p_dot[i].powi(2))
            .sum();
        (s + self.u_dot.powi(2)).sqrt()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.dim + 1);
        v.extend_from_slice(&self.x_dot[..self.dim]);
        v.extend_from_slice(&self.p_dot[..self.dim]);
        v.push(self.u_dot);
        v
    }
}

/// A contact Hamiltonian `H(x, p, u)` on `T*T^n × R` with analytic derivatives.
///
/// Entries of returned vectors and matrices past `dim()` must be zero.
pub trait ContactHamiltonian: Sync {
    fn dim(&self) -> usize;
    /// Declared monotonicity constant.
    fn lambda(&self) -> f64;
    fn monotone_sign(&self) -> MonotoneSign;

    fn value(&self, z: &PhasePoint) -> f64;
    fn grad_x(&self, z: &PhasePoint) -> Vector;
    fn grad_p(&self, z: &PhasePoint) -> Vector;
    fn d_u(&self, z: &PhasePoint) -> f64;
    fn second(&self, z: &PhasePoint) -> SecondDerivatives;

    fn hess_pp(&self, z: &PhasePoint) -> Mat {
        self.second(z).pp
    }

    /// Coercivity radius `P(e, U)`: beyond it `H > e` whenever `u >= U`
    /// (`u <= U` for the plus sign).
    fn coercivity_radius(&self, e: f64, u_bound: f64) -> f64;

    /// Magnitude of the terms summed into `H(z)`, used to bound rounding.
    fn magnitude(&self, z: &PhasePoint) -> f64 {
        self.value(z).abs() + z.u.abs() * self.lambda() + 1.0
    }

    /// The `u` solving `H(x, p, u) = target`, if one is found.
    fn solve_u(&self, z: &PhasePoint, target: f64) -> Option<f64> {
        monotone_root(|u| self.value(&z.with_u(u)) - target, z.u, 1e6)
    }

    /// Contact vector field.
    fn vector_field(&self, z: &PhasePoint) -> Tangent {
        let n = self.dim();
        let hx = self.grad_x(z);
        let hp = self.grad_p(z);
        let hu = self.d_u(z);
        let h = self.value(z);
        let p = z.p_raw();
        let mut p_dot = [0.0; MAX_DIM];
        let mut pairing = 0.0;
        for i in 0..n {
            p_dot[i] = -hx[i] - hu * p[i];
            pairing += hp[i] * p[i];
        }
        Tangent {
            dim: n,
            x_dot: hp,
            p_dot,
            u_dot: pairing - h,
        }
    }
}

/// Root of a function monotone in `u`: expands a bracket around `guess`
/// (up to `|u| <= limit`), then bisects to machine precision.
pub(crate) fn monotone_root<F: Fn(f64) -> f64>(f: F, guess: f64, limit: f64) -> Option<f64> {
    let guess = if guess.is_finite() { guess.clamp(-limit, limit) } else { 0.0 };
    let f0 = f(guess);
    if f0 == 0.0 {
        return Some(guess);
    }
    let mut width = 1.0;
    let (mut a, mut b, mut fa) = loop {
        let lo = (guess - width).max(-limit);
        let hi = (guess + width).min(limit);
        let (flo, fhi) = (f(lo), f(hi));
        if flo.signum() != f0.signum() || flo == 0.0 {
            break (lo, guess, flo);
        }
        if fhi.signum() != f0.signum() || fhi == 0.0 {
            break (guess, hi, f0);
        }
        if lo <= -limit && hi >= limit {
            return None;
        }
        width *= 4.0;
    };
    if fa == 0.0 {
        return Some(a);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Registry of parametric families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `κ‖p‖²/2 + V(x) ± λu`.
    Mechanical,
    /// `λu + h(x, p)` with `h = κ‖p‖²/2 + V(x)`; always the minus sign.
    Discounted,
    /// Mechanical with constant potential.
    QuadraticTest,
}

/// A monotone contact Hamiltonian from the closed registry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianModel {
    family: Family,
    lambda: f64,
    monotone_sign: MonotoneSign,
    potential: TrigPotential,
    kinetic_scale: f64,
}

impl HamiltonianModel {
    pub fn new(
        family: Family,
        lambda: f64,
        monotone_sign: MonotoneSign,
        potential: TrigPotential,
        kinetic_scale: f64,
    ) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidModel(format!("lambda must be > 0, got {lambda}")));
        }
        if !(kinetic_scale.is_finite() && kinetic_scale > 0.0) {
            return Err(Error::InvalidModel(format!(
                "kinetic_scale must be > 0, got {kinetic_scale}"
            )));
        }
        if family == Family::Discounted && monotone_sign != MonotoneSign::Minus {
            return Err(Error::InvalidModel(
                "discounted family requires the minus monotone sign".into(),
            ));
        }
        if family == Family::QuadraticTest && !potential.is_constant() {
            return Err(Error::InvalidModel(
                "quadratic-test family requires a constant potential".into(),
            ));
        }
        Ok(Self {
            family,
            lambda,
            monotone_sign,
            potential,
            kinetic_scale,
        })
    }

    /// Discounted pendulum `λu + p²/2 + cos x`.
    pub fn pendulum(lambda: f64) -> Result<Self> {
        Self::new(
            Family::Discounted,
            lambda,
            MonotoneSign::Minus,
            TrigPotential::new(1, vec![super::TrigTerm::cos(&[1], 1.0)])?,
            1.0,
        )
    }

    /// Discounted model on `T²` with `V = cos x₁ + cos x₂`.
    pub fn two_torus(lambda: f64) -> Result<Self> {
        Self::new(
            Family::Discounted,
            lambda,
            MonotoneSign::Minus,
            TrigPotential::new(
                2,
                vec![
                    super::TrigTerm::cos(&[1, 0], 1.0),
                    super::TrigTerm::cos(&[0, 1], 1.0),
                ],
            )?,
            1.0,
        )
    }

    /// `λu + ‖p‖²/2 + c` on `T^dim`.
    pub fn quadratic_test(dim: usize, lambda: f64, c: f64) -> Result<Self> {
        Self::new(
            Family::QuadraticTest,
            lambda,
            MonotoneSign::Minus,
            TrigPotential::constant(dim, c)?,
            1.0,
        )
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn potential(&self) -> &TrigPotential {
        &self.potential
    }

    pub fn kinetic_scale(&self) -> f64 {
        self.kinetic_scale
    }

    /// The model `H̆(x, p, u) = H(x, -p, -u)`, which has the opposite sign.
    pub fn mirrored(&self) -> Self {
        let family = match self.family {
            Family::Discounted => Family::Mechanical,
            f => f,
        };
        Self {
            family,
            monotone_sign: self.monotone_sign.flipped(),
            ..self.clone()
        }
    }

    /// `h(x, p) = H(x, p, 0)`.
    pub fn base_energy(&self, z: &PhasePoint) -> f64 {
        self.kinetic(z) + self.potential.value(&z.x.raw())
    }

    fn kinetic(&self, z: &PhasePoint) -> f64 {
        0.5 * self.kinetic_scale * z.p().iter().map(|v| v * v).sum::<f64>()
    }
}

impl ContactHamiltonian for HamiltonianModel {
    fn dim(&self) -> usize {
        self.potential.dim()
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn monotone_sign(&self) -> MonotoneSign {
        self.monotone_sign
    }

    fn value(&self, z: &PhasePoint) -> f64 {
        self.kinetic(z) + self.potential.value(&z.x.raw()) + self.monotone_sign.factor() * self.lambda * z.u
    }

    fn grad_x(&self, z: &PhasePoint) -> Vector {
        self.potential.gradient(&z.x.raw())
    }

    fn grad_p(&self, z: &PhasePoint) -> Vector {
        let mut g = z.p_raw();
        for v in g.iter_mut() {
            *v *= self.kinetic_scale;
        }
        g
    }

    fn d_u(&self, _z: &PhasePoint) -> f64 {
        self.monotone_sign.factor() * self.lambda
    }

    fn second(&self, z: &PhasePoint) -> SecondDerivatives {
        let mut pp = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in pp.iter_mut().enumerate().take(self.dim()) {
            row[i] = self.kinetic_scale;
        }
        SecondDerivatives {
            xx: self.potential.hessian(&z.x.raw()),
            pp,
            ..Default::default()
        }
    }

    fn coercivity_radius(&self, e: f64, u_bound: f64) -> f64 {
        let (vmin, _) = self.potential.range();
        let arg = 2.0 * (e - vmin - self.monotone_sign.factor() * self.lambda * u_bound) / self.kinetic_scale;
        if arg > 0.0 {
            arg.sqrt()
        } else {
            0.0
        }
    }

    fn magnitude(&self, z: &PhasePoint) -> f64 {
        let (lo, hi) = self.potential.range();
        self.kinetic(z) + lo.abs().max(hi.abs()) + self.lambda * z.u.abs()
    }

    fn solve_u(&self, z: &PhasePoint, target: f64) -> Option<f64> {
        let rest = self.base_energy(z);
        Some((target - rest) / (self.monotone_sign.factor() * self.lambda))
    }
}

/// `H̆(x, p, u) = H(x, -p, -u)` for any model.
#[derive(Debug, Clone, Copy)]
pub struct Mirrored<'a, H: ?Sized>(pub &'a H);

impl<H: ContactHamiltonian + ?Sized> ContactHamiltonian for Mirrored<'_, H> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn lambda(&self) -> f64 {
        self.0.lambda()
    }
    fn monotone_sign(&self) -> MonotoneSign {
        self.0.monotone_sign().flipped()
    }
    fn value(&self, z: &PhasePoint) -> f64 {
        self.0.value(&z.mirrored())
    }
    fn grad_x(&self, z: &PhasePoint) -> Vector {
        self.0.grad_x(&z.mirrored())
    }
    fn grad_p(&self, z: &PhasePoint) -> Vector {
        let mut g = self.0.grad_p(&z.mirrored());
        for v in g.iter_mut() {
            *v = -*v;
        }
        g
    }
    fn d_u(&self, z: &PhasePoint) -> f64 {
        -self.0.d_u(&z.mirrored())
    }
    fn second(&self, z: &PhasePoint) -> SecondDerivatives {
        let s = self.0.second(&z.mirrored());
        let neg = |m: Mat| m.map(|r| r.map(|v| -v));
        SecondDerivatives {
            xx: s.xx,
            xp: neg(s.xp),
            xu: s.xu.map(|v| -v),
            pp: s.pp,
            pu: s.pu,
            uu: s.uu,
        }
    }
    fn coercivity_radius(&self, e: f64, u_bound: f64) -> f64 {
        self.0.coercivity_radius(e, -u_bound)
    }
    fn magnitude(&self, z: &PhasePoint) -> f64 {
        self.0.magnitude(&z.mirrored())
    }
    fn solve_u(&self, z: &PhasePoint, target: f64) -> Option<f64> {
        self.0.solve_u(&z.mirrored(), target).map(|u| -u)
    }
}

/// `H(z)` with input validation.
pub fn eval_hamiltonian<H: ContactHamiltonian + ?Sized>(model: &H, z: &PhasePoint) -> Result<f64> {
    check_input(model, z)?;
    Ok(model.value(z))
}

/// `X_H(z)` with input validation.
pub fn eval_vector_field<H: ContactHamiltonian + ?Sized>(
    model: &H,
    z: &PhasePoint,
) -> Result<Tangent> {
    check_input(model, z)?;
    Ok(model.vector_field(z))
}

fn check_input<H: ContactHamiltonian + ?Sized>(model: &H, z: &PhasePoint) -> Result<()> {
    if !z.is_finite() {
        return Err(Error::InputDomain(format!("non-finite phase point {z:?}")));
    }
    if z.dim() != model.dim() {
        return Err(Error::InputDomain(format!(
            "phase point of dimension {} for a model on T^{}",
            z.dim(),
            model.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn pt(x: f64, p: f64, u: f64) -> PhasePoint {
        PhasePoint::new(&[x], &[p], u).unwrap()
    }

    #[test]
    fn pendulum_values() {
        let m = HamiltonianModel::pendulum(1.0).unwrap();
        assert_eq!(eval_hamiltonian(&m, &pt(0.0, 0.0, -1.0)).unwrap(), 0.0);
        assert!(eval_hamiltonian(&m, &pt(PI, 0.0, 1.0)).unwrap().abs() < 1e-15);
        let q = HamiltonianModel::quadratic_test(1, 2.0, 0.0).unwrap();
        assert_eq!(eval_hamiltonian(&q, &pt(1.3, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn vector_field_examples() {
        let m = HamiltonianModel::pendulum(1.0).unwrap();
        let t = eval_vector_field(&m, &pt(0.0, 0.0, -1.0)).unwrap();
        assert_eq!(t.norm(), 0.0);
        let t = eval_vector_field(&m, &pt(FRAC_PI_2, 1.0, 0.0)).unwrap();
        assert!((t.x_dot[0] - 1.0).abs() < 1e-15);
        assert!(t.p_dot[0].abs() < 1e-15);
        assert!((t.u_dot - 0.5).abs() < 1e-15);
        let q = HamiltonianModel::quadratic_test(1, 2.0, 0.0).unwrap();
        let t = eval_vector_field(&q, &pt(0.7, 2.0, 3.0)).unwrap();
        assert_eq!(t.to_vec(), vec![2.0, -4.0, -4.0]);
    }

    #[test]
    fn non_finite_rejected() {
        let m = HamiltonianModel::pendulum(1.0).unwrap();
        let mut z = pt(0.0, 0.0, 0.0);
        z.u = f64::NAN;
        assert!(matches!(eval_hamiltonian(&m, &z), Err(Error::InputDomain(_))));
        assert!(matches!(eval_vector_field(&m, &z), Err(Error::InputDomain(_))));
    }

    #[test]
    fn construction_invariants() {
        assert!(HamiltonianModel::pendulum(0.0).is_err());
        assert!(HamiltonianModel::pendulum(-1.0).is_err());
        let v = TrigPotential::new(1, vec![super::super::TrigTerm::cos(&[1], 1.0)]).unwrap();
        assert!(HamiltonianModel::new(Family::Discounted, 1.0, MonotoneSign::Plus, v.clone(), 1.0).is_err());
        assert!(HamiltonianModel::new(Family::QuadraticTest, 1.0, MonotoneSign::Minus, v, 1.0).is_err());
    }

    #[test]
    fn mirror_wrapper_matches_mirrored_model() {
        let m = HamiltonianModel::pendulum(1.5).unwrap();
        let closed = m.mirrored();
        let wrapped = Mirrored(&m);
        for &(x, p, u) in &[(0.3, 1.2, -0.4), (5.0, -0.7, 2.0)] {
            let z = pt(x, p, u);
            assert_eq!(closed.value(&z), wrapped.value(&z));
            assert_eq!(closed.d_u(&z), wrapped.d_u(&z));
            assert_eq!(closed.vector_field(&z), wrapped.vector_field(&z));
        }
        assert_eq!(closed.monotone_sign(), MonotoneSign::Plus);
    }

    #[test]
    fn coercivity_radius_closed_form() {
        let m = HamiltonianModel::pendulum(1.0).unwrap();
        let r = m.coercivity_radius(0.001, -2.0);
        assert!((r - (2.0f64 * 3.001).sqrt()).abs() < 1e-12);
        assert!((r - 2.4495).abs() < 1e-3);
    }

    #[test]
    fn monotone_root_finds_nonlinear_root() {
        let r = monotone_root(|u| u * u * u + u - 10.0, 0.0, 1e6).unwrap();
        assert!((r * r * r + r - 10.0).abs() < 1e-12);
        assert!(monotone_root(|_| 1.0, 0.0, 1e3).is_none());
    }
}
