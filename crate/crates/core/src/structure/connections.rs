use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::equilibria::EquilibriumSet;
use super::linear::{contact_jacobian, eigen_directions};
use crate::error::Result;
use crate::flow::{check_third_lyapunov, classify_limit, IntegratorConfig, LimitClass, Trajectory};
use crate::model::{angle_delta, ContactHamiltonian, PhasePoint};

/// Orbit polyline sampling step (time units) used for proximity tests.
const POLYLINE_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionOrbit {
    /// `+1` or `-1`: side of the eigen-direction the seed was placed on.
    pub seed_sign: i8,
    pub direction_index: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub u_monotone: bool,
    pub polyline: Vec<PhasePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionEdge {
    pub source: usize,
    pub target: usize,
    pub orbits: Vec<ConnectionOrbit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UndecidedSeed {
    pub source: usize,
    pub seed_sign: i8,
    pub direction_index: usize,
    pub outcome: LimitClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionGraph {
    pub nodes: EquilibriumSet,
    pub edges: Vec<ConnectionEdge>,
    pub undecided: Vec<UndecidedSeed>,
    pub eps: f64,
}

impl ConnectionGraph {
    /// `source target` per line, for graph tools.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(out, "{} {}", e.source, e.target);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Weak connectivity over all nodes.
    pub fn weakly_connected(&self) -> bool {
        let n = self.nodes.equilibria.len();
        if n == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.source), find(&mut parent, e.target));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (0..n).all(|i| find(&mut parent, i) == root)
    }
}

/// Shoots from every equilibrium along the linear directions that leave it
/// in the attracting time direction (unstable ones under the minus sign),
/// and records which equilibrium each orbit lands on. Edges and polylines
/// are oriented in forward time whatever the sign.
pub fn detect_connections<H: ContactHamiltonian + ?Sized>(
    model: &H,
    equilibria: &EquilibriumSet,
    eps: f64,
    cfg: &IntegratorConfig,
) -> Result<ConnectionGraph> {
    let time_sign = model.monotone_sign().time_sign();
    let n = model.dim();
    let mut seeds = Vec::new();
    for eq in &equilibria.equilibria {
        if eq.degenerate {
            continue;
        }
        let j = contact_jacobian(model, &eq.point);
        let mut dirs = Vec::new();
        let mut seen: Vec<num_complex::Complex64> = Vec::new();
        for mu in &eq.spectrum {
            if mu.re * time_sign <= 1e-12 {
                continue;
            }
            // one pass per distinct eigenvalue, and per complex-conjugate pair
            if seen.iter().any(|m| (m - mu).norm() < 1e-9 || (m - mu.conj()).norm() < 1e-9) {
                continue;
            }
            seen.push(*mu);
            dirs.extend(eigen_directions(&j, *mu));
        }
        for (di, d) in dirs.into_iter().enumerate() {
            for sign in [1i8, -1] {
                let mut state = eq.point.to_state();
                for (s, v) in state.iter_mut().zip(&d) {
                    *s += sign as f64 * eps * v;
                }
                let mut z = PhasePoint::from_state(&state, n);
                // land on H = 0, where the connecting orbits live
                if let Some(u) = model.solve_u(&z, 0.0) {
                    z = z.with_u(u);
                }
                seeds.push((eq.id, sign, di, z));
            }
        }
    }

    let runs: Vec<Result<(LimitClass, Trajectory)>> = seeds
        .par_iter()
        .map(|(_, _, _, z)| classify_limit(model, z, equilibria, cfg))
        .collect();

    let mut edges: BTreeMap<(usize, usize), Vec<ConnectionOrbit>> = BTreeMap::new();
    let mut undecided = Vec::new();
    for ((source, sign, di, _), run) in seeds.into_iter().zip(runs) {
        let (class, traj) = run?;
        match class {
            LimitClass::Equilibrium { id } if id != source => {
                let u_min = traj.points.iter().map(|z| z.u).fold(f64::INFINITY, f64::min);
                let u_max = traj.points.iter().map(|z| z.u).fold(f64::NEG_INFINITY, f64::max);
                let mut line = polyline(&traj, &equilibria.equilibria[source].point, &equilibria.equilibria[id].point);
                // edges run from the α-limit to the ω-limit in forward time
                let key = if time_sign > 0.0 {
                    (source, id)
                } else {
                    line.reverse();
                    (id, source)
                };
                edges.entry(key).or_default().push(ConnectionOrbit {
                    seed_sign: sign,
                    direction_index: di,
                    u_min,
                    u_max,
                    u_monotone: check_third_lyapunov(&traj, 1e-9).holds,
                    polyline: line,
                });
            }
            outcome => undecided.push(UndecidedSeed {
                source,
                seed_sign: sign,
                direction_index: di,
                outcome,
            }),
        }
    }
    Ok(ConnectionGraph {
        nodes: equilibria.clone(),
        edges: edges
            .into_iter()
            .map(|((source, target), orbits)| ConnectionEdge {
                source,
                target,
                orbits,
            })
            .collect(),
        undecided,
        eps,
    })
}

/// Orbit resampled on a fine time grid, closed off at both equilibria.
fn polyline(traj: &Trajectory, source: &PhasePoint, target: &PhasePoint) -> Vec<PhasePoint> {
    let mut out = vec![*source];
    let t_end = traj.t_end();
    let steps = (t_end.abs() / POLYLINE_DT).ceil() as usize;
    for k in 0..=steps {
        let t = t_end * k as f64 / steps.max(1) as f64;
        if let Some(z) = traj.sample(t) {
            out.push(z);
        }
    }
    out.push(*traj.last());
    out.push(*target);
    out
}

/// Product-metric distance from `q` to the segment `a→b`, with the x
/// displacement taken as the minimal image.
pub fn segment_distance(q: &PhasePoint, a: &PhasePoint, b: &PhasePoint) -> f64 {
    let n = q.dim();
    let mut d = Vec::with_capacity(2 * n + 1);
    let mut w = Vec::with_capacity(2 * n + 1);
    for i in 0..n {
        d.push(angle_delta(a.x.coords()[i], b.x.coords()[i]));
        w.push(angle_delta(a.x.coords()[i], q.x.coords()[i]));
    }
    for i in 0..n {
        d.push(b.p()[i] - a.p()[i]);
        w.push(q.p()[i] - a.p()[i]);
    }
    d.push(b.u - a.u);
    w.push(q.u - a.u);
    let dd: f64 = d.iter().map(|v| v * v).sum();
    let s = if dd > 0.0 {
        (d.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() / dd).clamp(0.0, 1.0)
    } else {
        0.0
    };
    d.iter().zip(&w).map(|(x, y)| (y - s * x).powi(2)).sum::<f64>().sqrt()
}
