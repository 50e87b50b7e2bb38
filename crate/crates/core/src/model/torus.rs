use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest torus dimension supported by the registry families.
pub const MAX_DIM: usize = 2;

/// Fixed-capacity small vector; entries past `dim` are kept at zero.
pub type Vector = [f64; MAX_DIM];

/// Canonical representative of an angle in `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid rounds tiny negatives up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed minimal-image difference `b - a` on the circle, in `[-π, π)`.
pub fn angle_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(TAU);
    if d >= PI {
        d - TAU
    } else {
        d
    }
}

/// A point of the flat torus `T^n`, `n ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vector,
    dim: usize,
}

impl TorusPoint {
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InputDomain(format!(
                "torus dimension must be 1 or 2, got {dim}"
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InputDomain(format!(
                "non-finite torus coordinate {coords:?}"
            )));
        }
        Ok(Self::wrapped(coords))
    }

    /// Wraps without validation. Callers guarantee `1 <= len <= 2`.
    pub(crate) fn wrapped(coords: &[f64]) -> Self {
        let mut c = [0.0; MAX_DIM];
        for (dst, src) in c.iter_mut().zip(coords) {
            *dst = wrap_angle(*src);
        }
        Self {
            coords: c,
            dim: coords.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub(crate) fn raw(&self) -> Vector {
        self.coords
    }

    /// Flat periodic distance, at most `π·sqrt(n)`.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| angle_delta(*a, *b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn translate(&self, v: &[f64]) -> TorusPoint {
        let mut c = [0.0; MAX_DIM];
        for i in 0..self.dim {
            c[i] = self.coords[i] + v.get(i).copied().unwrap_or(0.0);
        }
        TorusPoint::wrapped(&c[..self.dim])
    }
}

/// A point `z = (x, p, u)` of `T*T^n × R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: TorusPoint,
    p: Vector,
    pub u: f64,
}

impl PhasePoint {
    pub fn new(x: &[f64], p: &[f64], u: f64) -> Result<Self> {
        let x = TorusPoint::new(x)?;
        if p.len() != x.dim() {
            return Err(Error::InputDomain(format!(
                "covector has {} components on a {}-torus",
                p.len(),
                x.dim()
            )));
        }
        if p.iter().any(|c| !c.is_finite()) || !u.is_finite() {
            return Err(Error::InputDomain(format!(
                "non-finite phase point p={p:?} u={u}"
            )));
        }
        let mut pv = [0.0; MAX_DIM];
        pv[..p.len()].copy_from_slice(p);
        Ok(Self { x, p: pv, u })
    }

    /// Builds from a flat state `[x.., p.., u]` (x need not be wrapped).
    pub(crate) fn from_state(state: &[f64], dim: usize) -> Self {
        let mut p = [0.0; MAX_DIM];
        p[..dim].copy_from_slice(&state[dim..2 * dim]);
        Self {
            x: TorusPoint::wrapped(&state[..dim]),
            p,
            u: state[2 * dim],
        }
    }

    pub(crate) fn from_parts(x: TorusPoint, p: Vector, u: f64) -> Self {
        Self { x, p, u }
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn p(&self) -> &[f64] {
        &self.p[..self.dim()]
    }

    pub(crate) fn p_raw(&self) -> Vector {
        self.p
    }

    pub fn p_norm(&self) -> f64 {
        self.p().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.p().iter().all(|v| v.is_finite()) && self.u.is_finite()
    }

    pub fn with_u(&self, u: f64) -> Self {
        Self { u, ..*self }
    }

    pub fn with_p(&self, p: &[f64]) -> Self {
        let mut pv = [0.0; MAX_DIM];
        pv[..self.dim()].copy_from_slice(&p[..self.dim()]);
        Self { p: pv, ..*self }
    }

    /// `(x, -p, -u)`: the involution relating a model to its mirror.
    pub fn mirrored(&self) -> Self {
        let mut p = self.p;
        for v in p.iter_mut() {
            *v = -*v;
        }
        Self {
            x: self.x,
            p,
            u: -self.u,
        }
    }

    /// Flat state `[x.., p.., u]`.
    pub fn to_state(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(2 * self.dim() + 1);
        s.extend_from_slice(self.x.coords());
        s.extend_from_slice(self.p());
        s.push(self.u);
        s
    }

    /// Product metric: torus distance on x, Euclidean on (p, u).
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let dx = self.x.distance(&other.x);
        let dp: f64 = self
            .p()
            .iter()
            .zip(other.p())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        (dx * dx + dp + (self.u - other.u).powi(2)).sqrt()
    }
}
