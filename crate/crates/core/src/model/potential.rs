use serde::{Deserialize, Serialize};

use super::torus::{Vector, MAX_DIM};
use crate::error::{Error, Result};

/// One term `amplitude · cos(k·x + phase)` of a trigonometric potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub freq: [i32; MAX_DIM],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl TrigTerm {
    pub fn cos(freq: &[i32], amplitude: f64) -> Self {
        let mut k = [0; MAX_DIM];
        k[..freq.len()].copy_from_slice(freq);
        Self {
            freq: k,
            amplitude,
            phase: 0.0,
        }
    }

    fn angle(&self, x: &Vector) -> f64 {
        self.freq[0] as f64 * x[0] + self.freq[1] as f64 * x[1] + self.phase
    }
}

/// Finite trigonometric polynomial on `T^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPotential {
    dim: usize,
    terms: Vec<TrigTerm>,
    #[serde(skip)]
    range: (f64, f64),
}

impl TrigPotential {
    pub fn new(dim: usize, terms: Vec<TrigTerm>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidModel(format!("dimension {dim} not in {{1, 2}}")));
        }
        for t in &terms {
            if t.freq[dim..].iter().any(|k| *k != 0) {
                return Err(Error::InvalidModel(format!(
                    "term {t:?} uses a frequency outside the {dim}-torus"
                )));
            }
            if !t.amplitude.is_finite() || !t.phase.is_finite() {
                return Err(Error::InvalidModel(format!("non-finite term {t:?}")));
            }
        }
        let mut v = Self {
            dim,
            terms,
            range: (0.0, 0.0),
        };
        v.range = v.compute_range();
        Ok(v)
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Self::new(dim, vec![TrigTerm::cos(&[0; MAX_DIM][..dim], c)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.freq.iter().all(|k| *k == 0) || t.amplitude == 0.0)
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amplitude * t.angle(x).cos())
            .sum()
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        let mut g = [0.0; MAX_DIM];
        for t in &self.terms {
            let s = -t.amplitude * t.angle(x).sin();
            for (gi, k) in g.iter_mut().zip(t.freq) {
                *gi += s * k as f64;
            }
        }
        g
    }

    pub fn hessian(&self, x: &Vector) -> [[f64; MAX_DIM]; MAX_DIM] {
        let mut h = [[0.0; MAX_DIM]; MAX_DIM];
        for t in &self.terms {
            let c = -t.amplitude * t.angle(x).cos();
            for i in 0..MAX_DIM {
                for j in 0..MAX_DIM {
                    h[i][j] += c * (t.freq[i] * t.freq[j]) as f64;
                }
            }
        }
        h
    }

    /// `(min V, max V)` over the torus.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    fn compute_range(&self) -> (f64, f64) {
        if self.is_constant() {
            let c = self.value(&[0.0; MAX_DIM]);
            return (c, c);
        }
        let n = if self.dim == 1 { 1024 } else { 192 };
        let h = std::f64::consts::TAU / n as f64;
        let (mut lo, mut hi) = ((f64::INFINITY, [0.0; 2]), (f64::NEG_INFINITY, [0.0; 2]));
        let ny = if self.dim == 1 { 1 } else { n };
        for i in 0..n {
            for j in 0..ny {
                let x = [i as f64 * h, j as f64 * h];
                let v = self.value(&x);
                if v < lo.0 {
                    lo = (v, x);
                }
                if v > hi.0 {
                    hi = (v, x);
                }
            }
        }
        (self.polish(lo.1, lo.0, 1.0), self.polish(hi.1, hi.0, -1.0))
    }

    /// Newton polish of a grid extremum; `sign = 1` for a minimum.
    fn polish(&self, mut x: Vector, fallback: f64, sign: f64) -> f64 {
        let mut best = fallback;
        for _ in 0..30 {
            let g = self.gradient(&x);
            let h = self.hessian(&x);
            let step = if self.dim == 1 {
                if h[0][0].abs() < 1e-14 {
                    break;
                }
                [g[0] / h[0][0], 0.0]
            } else {
                let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                if det.abs() < 1e-14 {
                    break;
                }
                [
                    (h[1][1] * g[0] - h[0][1] * g[1]) / det,
                    (h[0][0] * g[1] - h[1][0] * g[0]) / det,
                ]
            };
            if step.iter().any(|s| s.abs() > 0.5) {
                break;
            }
            x[0] -= step[0];
            x[1] -= step[1];
            let v = self.value(&x);
            if sign * v < sign * best {
                best = v;
            }
            if step[0].abs() + step[1].abs() < 1e-15 {
                break;
            }
        }
        best
    }
}
