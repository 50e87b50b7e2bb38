use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::linear::{contact_jacobian, spectrum};
use crate::error::{Error, Result};
use crate::model::{monotone_root, ContactHamiltonian, Mat, PhasePoint, TorusPoint, MAX_DIM};

/// Floor on `|det ∂²H/∂x²|` below which an equilibrium is degenerate.
pub const NONDEGENERACY_FLOOR: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-10;
const DEDUP_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub id: usize,
    /// `(x0, 0, u0)`.
    pub point: PhasePoint,
    /// `∂²/∂x²` of `x ↦ H(x, 0, u0)`.
    pub hessian: Mat,
    pub morse_index: usize,
    #[serde(serialize_with = "serialize_complex")]
    pub spectrum: Vec<Complex64>,
    pub degenerate: bool,
}

impl Equilibrium {
    pub fn x(&self) -> &TorusPoint {
        &self.point.x
    }

    pub fn u(&self) -> f64 {
        self.point.u
    }
}

fn serialize_complex<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub dim: usize,
    /// Sorted by `u0`, then `x0` lexicographically; ids follow this order.
    pub equilibria: Vec<Equilibrium>,
    pub seeds: usize,
    pub skipped_seeds: usize,
    /// Set when no equilibrium was found, or when the set is degenerate.
    pub anomaly: Option<String>,
}

impl EquilibriumSet {
    /// Non-empty and every equilibrium non-degenerate.
    pub fn nondegenerate(&self) -> bool {
        !self.equilibria.is_empty() && self.equilibria.iter().all(|e| !e.degenerate)
    }

    pub fn get(&self, id: usize) -> Option<&Equilibrium> {
        self.equilibria.get(id)
    }
}

/// Equilibria `(x0, 0, u0)` with `∂_x H = 0` and `H = 0`, found by Newton
/// from `density` seeds per axis.
pub fn find_equilibria<H: ContactHamiltonian + ?Sized>(model: &H, density: usize) -> Result<EquilibriumSet> {
    if density < 2 {
        return Err(Error::InputDomain(format!("seed density must be >= 2, got {density}")));
    }
    let n = model.dim();
    let h = std::f64::consts::TAU / density as f64;
    let seeds: Vec<TorusPoint> = (0..density.pow(n as u32))
        .map(|k| {
            let c = [(k % density) as f64 * h, (k / density) as f64 * h];
            TorusPoint::wrapped(&c[..n])
        })
        .collect();
    let found: Vec<Option<PhasePoint>> = seeds.par_iter().map(|x| newton(model, *x)).collect();
    let skipped = found.iter().filter(|f| f.is_none()).count();

    let mut unique: Vec<PhasePoint> = Vec::new();
    for z in found.into_iter().flatten() {
        if unique.iter().all(|w| w.x.distance(&z.x) > DEDUP_DISTANCE) {
            unique.push(z);
        }
    }
    unique.sort_by(|a, b| {
        a.u.total_cmp(&b.u)
            .then_with(|| a.x.coords().partial_cmp(b.x.coords()).unwrap_or(std::cmp::Ordering::Equal))
    });

    let equilibria: Vec<Equilibrium> = unique
        .into_iter()
        .enumerate()
        .map(|(id, point)| {
            let hessian = model.second(&point).xx;
            let (det, neg) = det_and_index(&hessian, n);
            Equilibrium {
                id,
                point,
                hessian,
                morse_index: neg,
                spectrum: spectrum(&contact_jacobian(model, &point)),
                degenerate: det.abs() < NONDEGENERACY_FLOOR,
            }
        })
        .collect();

    let anomaly = if equilibria.is_empty() {
        Some("no equilibrium found although (H3) and (H2) force one".into())
    } else if equilibria.iter().any(|e| e.degenerate) {
        let count = equilibria.iter().filter(|e| e.degenerate).count();
        Some(format!("(H4) fails: {count} degenerate equilibria (possibly a continuum)"))
    } else {
        None
    };
    Ok(EquilibriumSet {
        dim: n,
        equilibria,
        seeds: seeds.len(),
        skipped_seeds: skipped,
        anomaly,
    })
}

fn u_root<H: ContactHamiltonian + ?Sized>(model: &H, x: TorusPoint, guess: f64) -> Option<f64> {
    let z = PhasePoint::from_parts(x, [0.0; MAX_DIM], 0.0);
    monotone_root(|u| model.value(&z.with_u(u)), guess, 1e6)
}

/// Newton on `x ↦ ∂_x H(x, 0, u(x))` with `u(x)` the root of `H(x, 0, ·)`.
fn newton<H: ContactHamiltonian + ?Sized>(model: &H, seed: TorusPoint) -> Option<PhasePoint> {
    let n = model.dim();
    let mut x = seed;
    let mut u = u_root(model, x, 0.0)?;
    for _ in 0..60 {
        let z = PhasePoint::from_parts(x, [0.0; MAX_DIM], u);
        let g = model.grad_x(&z);
        let gn = g[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn <= 1e-14 {
            break;
        }
        let s = model.second(&z);
        let hu = model.d_u(&z);
        // d/dx of ∂_x H(x, 0, u(x)), with du/dx = -∂_x H / ∂_u H
        let mut j = s.xx;
        for a in 0..n {
            for b in 0..n {
                j[a][b] -= s.xu[a] * g[b] / hu;
            }
        }
        let step = solve(&j, &g, n)?;
        let len = step[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = if len > 0.5 { 0.5 / len } else { 1.0 };
        let c: Vec<f64> = (0..n).map(|a| x.coords()[a] - scale * step[a]).collect();
        x = TorusPoint::wrapped(&c);
        u = u_root(model, x, u)?;
    }
    let z = PhasePoint::from_parts(x, [0.0; MAX_DIM], u);
    let g = model.grad_x(&z);
    let ok = g[..n].iter().all(|v| v.abs() <= RESIDUAL_TOL) && model.value(&z).abs() <= RESIDUAL_TOL;
    ok.then_some(z)
}

fn solve(m: &Mat, b: &[f64; MAX_DIM], n: usize) -> Option<[f64; MAX_DIM]> {
    let a = DMatrix::from_fn(n, n, |r, c| m[r][c]);
    let rhs = nalgebra::DVector::from_column_slice(&b[..n]);
    let x = a.lu().solve(&rhs)?;
    let mut out = [0.0; MAX_DIM];
    out[..n].copy_from_slice(x.as_slice());
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn det_and_index(m: &Mat, n: usize) -> (f64, usize) {
    let a = DMatrix::from_fn(n, n, |r, c| m[r][c]);
    let det = a.determinant();
    let eig = a.symmetric_eigenvalues();
    (det, eig.iter().filter(|v| **v < 0.0).count())
}
