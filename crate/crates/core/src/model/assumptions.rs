use std::f64::consts::TAU;

use serde::Serialize;

use super::hamiltonian::{ContactHamiltonian, MonotoneSign};
use super::torus::{PhasePoint, TorusPoint, MAX_DIM};
use crate::error::{Error, Result};

/// Verdict for a single structural assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    VerifiedOnSample,
    Violated { witness: PhasePoint, value: f64 },
    NotApplicable { reason: String },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::VerifiedOnSample)
    }
}

/// Region of phase space sampled by [`check_assumptions`]; x ranges over the
/// whole torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleBox {
    pub p_radius: f64,
    pub u_min: f64,
    pub u_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityEntry {
    pub e: f64,
    pub u_bound: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub h1: Verdict,
    pub h2: Verdict,
    pub h3: Verdict,
    pub h4: Verdict,
    pub monotone: Verdict,
    pub monotone_sign: MonotoneSign,
    pub sample_box: SampleBox,
    pub density: usize,
    pub coercivity: Vec<CoercivityEntry>,
}

impl AssumptionReport {
    /// True when (H1)-(H3) and the monotonicity assumption hold on the sample.
    pub fn all_verified(&self) -> bool {
        self.h1.is_verified() && self.h2.is_verified() && self.h3.is_verified() && self.monotone.is_verified()
    }
}

const H3_TOL: f64 = 1e-10;
const RADIAL_STEPS: usize = 64;

/// Samples a grid of `density` points per axis over `T^n × box` and checks
/// (H1), (H2), (H3) and (M±). (H4) needs the equilibria and is reported as
/// not applicable here.
///
/// `requests` lists `(e, U)` pairs for which the coercivity radius is
/// recorded and (H2) is scanned radially on `[P, 4P]`. When empty, `(0, U)`
/// is used with `U` the box end that makes the sublevel set largest.
pub fn check_assumptions<H: ContactHamiltonian + ?Sized>(
    model: &H,
    sample_box: SampleBox,
    density: usize,
    requests: &[(f64, f64)],
) -> Result<AssumptionReport> {
    if density < 8 {
        return Err(Error::InputDomain(format!("density must be >= 8, got {density}")));
    }
    let finite = [sample_box.p_radius, sample_box.u_min, sample_box.u_max];
    if finite.iter().any(|v| !v.is_finite()) || sample_box.p_radius < 0.0 || sample_box.u_min > sample_box.u_max {
        return Err(Error::InputDomain(format!("unbounded or empty sample box {sample_box:?}")));
    }
    let n = model.dim();
    let sign = model.monotone_sign();
    let xs = torus_grid(n, density);
    let ps = cube_grid(n, density, sample_box.p_radius);
    let us: Vec<f64> = linspace(sample_box.u_min, sample_box.u_max, density);

    let mut h1 = Verdict::VerifiedOnSample;
    let mut h3 = Verdict::VerifiedOnSample;
    let mut monotone = Verdict::VerifiedOnSample;
    let lambda = model.lambda();
    let mut worst_mono = f64::INFINITY;

    for x in &xs {
        for &u in &us {
            let z0 = PhasePoint::from_parts(*x, [0.0; MAX_DIM], u);
            let g = model.grad_p(&z0);
            let gn = g[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn >= H3_TOL && h3.is_verified() {
                h3 = Verdict::Violated { witness: z0, value: gn };
            }
            for p in &ps {
                let z = PhasePoint::from_parts(*x, *p, u);
                let ev = min_eigenvalue(&model.hess_pp(&z), n);
                if ev <= 0.0 && h1.is_verified() {
                    h1 = Verdict::Violated { witness: z, value: ev };
                }
                // oriented slope must be positive and at least λ
                let slope = sign.factor() * model.d_u(&z);
                let bad = !(lambda > 0.0) || slope <= 0.0 || slope < lambda * (1.0 - 1e-12);
                if bad && slope < worst_mono {
                    worst_mono = slope;
                    monotone = Verdict::Violated { witness: z, value: model.d_u(&z) };
                }
            }
        }
    }

    let default_u = match sign {
        MonotoneSign::Minus => sample_box.u_min,
        MonotoneSign::Plus => sample_box.u_max,
    };
    let requests: Vec<(f64, f64)> = if requests.is_empty() {
        vec![(0.0, default_u)]
    } else {
        requests.to_vec()
    };
    let coercivity: Vec<CoercivityEntry> = requests
        .iter()
        .map(|&(e, u_bound)| CoercivityEntry {
            e,
            u_bound,
            radius: model.coercivity_radius(e, u_bound),
        })
        .collect();

    let dirs = directions(n, density);
    let mut h2 = Verdict::VerifiedOnSample;
    'outer: for entry in &coercivity {
        let r0 = entry.radius;
        let r1 = 4.0 * r0.max(1.0);
        // u on the far side of the bound is where H is smallest
        let u_samples = [entry.u_bound, entry.u_bound + sign.factor() * 1.0];
        for x in &xs {
            for &u in &u_samples {
                for d in &dirs {
                    let mut prev = f64::NEG_INFINITY;
                    for k in 0..=RADIAL_STEPS {
                        let r = r0 + (r1 - r0) * k as f64 / RADIAL_STEPS as f64;
                        let mut p = [0.0; MAX_DIM];
                        for i in 0..n {
                            p[i] = r * d[i];
                        }
                        let z = PhasePoint::from_parts(*x, p, u);
                        let v = model.value(&z);
                        let beyond = k > 0 || r0 == 0.0;
                        if (beyond && v <= entry.e) || v < prev {
                            h2 = Verdict::Violated { witness: z, value: v };
                            break 'outer;
                        }
                        prev = v;
                    }
                }
            }
        }
    }

    Ok(AssumptionReport {
        h1,
        h2,
        h3,
        h4: Verdict::NotApplicable {
            reason: "requires the equilibrium set; checked by the structure stage".into(),
        },
        monotone,
        monotone_sign: sign,
        sample_box,
        density,
        coercivity,
    })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn torus_grid(n: usize, density: usize) -> Vec<TorusPoint> {
    let h = TAU / density as f64;
    let mut out = Vec::new();
    if n == 1 {
        for i in 0..density {
            out.push(TorusPoint::wrapped(&[i as f64 * h]));
        }
    } else {
        for i in 0..density {
            for j in 0..density {
                out.push(TorusPoint::wrapped(&[i as f64 * h, j as f64 * h]));
            }
        }
    }
    out
}

fn cube_grid(n: usize, density: usize, r: f64) -> Vec<[f64; MAX_DIM]> {
    let axis = linspace(-r, r, density);
    let mut out = Vec::new();
    if n == 1 {
        for a in &axis {
            out.push([*a, 0.0]);
        }
    } else {
        for a in &axis {
            for b in &axis {
                out.push([*a, *b]);
            }
        }
    }
    out
}

fn directions(n: usize, density: usize) -> Vec<[f64; MAX_DIM]> {
    if n == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        (0..density)
            .map(|k| {
                let a = TAU * k as f64 / density as f64;
                [a.cos(), a.sin()]
            })
            .collect()
    }
}

fn min_eigenvalue(m: &[[f64; MAX_DIM]; MAX_DIM], n: usize) -> f64 {
    if n == 1 {
        m[0][0]
    } else {
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = ((tr * tr) / 4.0 - det).max(0.0).sqrt();
        tr / 2.0 - disc
    }
}
