use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::approx::sample_trapping_set;
use super::trapping::TrappingSpec;
use crate::error::Result;
use crate::hj::SolutionKind;
use crate::model::{p_star, ContactHamiltonian, PhasePoint};

/// Directed distances between two clouds under the product metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HausdorffReport {
    /// `sup_{a∈A} inf_{b∈B} d(a, b)`.
    pub a_to_b: f64,
    pub b_to_a: f64,
    pub distance: f64,
}

pub fn hausdorff(a: &[PhasePoint], b: &[PhasePoint]) -> HausdorffReport {
    let directed = |from: &[PhasePoint], to: &[PhasePoint]| {
        from.par_iter()
            .map(|p| to.iter().map(|q| p.distance(q)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    let (a_to_b, b_to_a) = if a.is_empty() && b.is_empty() {
        (0.0, 0.0)
    } else if a.is_empty() || b.is_empty() {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (directed(a, b), directed(b, a))
    };
    HausdorffReport {
        a_to_b,
        b_to_a,
        distance: a_to_b.max(b_to_a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphPropertyVerdict {
    pub injective: bool,
    pub witness: Option<(PhasePoint, PhasePoint)>,
}

/// Forgetting `u` must be injective on the cloud: no two points within
/// `1e-6` in `(x, p)` whose `u` differ by more than `1e-4`.
pub fn graph_property_check(points: &[PhasePoint]) -> GraphPropertyVerdict {
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let dxp = a.with_u(0.0).distance(&b.with_u(0.0));
            if dxp <= 1e-6 && (a.u - b.u).abs() > 1e-4 {
                return GraphPropertyVerdict {
                    injective: false,
                    witness: Some((*a, *b)),
                };
            }
        }
    }
    GraphPropertyVerdict {
        injective: true,
        witness: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterReport {
    pub clusters: usize,
    pub mean_nearest_neighbour: f64,
    pub linkage_scale: f64,
}

/// Single-linkage cluster count at `factor × mean nearest-neighbour
/// distance`.
pub fn cluster_count(points: &[PhasePoint], factor: f64) -> ClusterReport {
    let m = points.len();
    if m < 2 {
        return ClusterReport {
            clusters: m,
            mean_nearest_neighbour: 0.0,
            linkage_scale: 0.0,
        };
    }
    let nn: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .filter(|j| *j != i)
                .map(|j| points[i].distance(&points[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nn.iter().sum::<f64>() / m as f64;
    let scale = factor * mean;
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..m {
        for j in i + 1..m {
            if points[i].distance(&points[j]) <= scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let clusters = (0..m).filter(|&i| find(&mut parent, i) == i).count();
    ClusterReport {
        clusters,
        mean_nearest_neighbour: mean,
        linkage_scale: scale,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetractionVerdict {
    pub contained: bool,
    pub checked: usize,
    pub max_h: f64,
    pub max_f: f64,
    pub witness: Option<(PhasePoint, f64)>,
}

/// Point of the deformation retracting `Ȳ_δ` onto the graph of `u±`:
/// for `t <= 1/2` `p` moves straight to `P*(x, u)`; for `t >= 1/2` `u`
/// slides to `u±(x)` while `p` follows `P*(x, u)`.
pub fn deformation<H: ContactHamiltonian + ?Sized>(
    model: &H,
    spec: &TrappingSpec,
    z: &PhasePoint,
    t: f64,
) -> Result<PhasePoint> {
    let n = model.dim();
    if t <= 0.5 {
        let s = 2.0 * t;
        let target = p_star(model, &z.x, z.u)?;
        let p: Vec<f64> = (0..n).map(|i| (1.0 - s) * z.p()[i] + s * target[i]).collect();
        Ok(z.with_p(&p))
    } else {
        let s = 2.0 * t - 1.0;
        let graph_u = spec.grid_function().interpolate(&z.x);
        let u = (1.0 - s) * z.u + s * graph_u;
        let p = p_star(model, &z.x, u)?;
        Ok(z.with_p(&p[..n]).with_u(u))
    }
}

/// Samples `Y_δ` (without the energy band) and checks that the deformation
/// stays in its closure at `steps` evenly spaced times in `[0, 1]`.
pub fn retraction_probe<H: ContactHamiltonian + ?Sized>(
    model: &H,
    spec: &TrappingSpec,
    samples: usize,
    steps: usize,
    seed: u64,
) -> Result<RetractionVerdict> {
    let full = spec.clone().with_energy_band(false);
    // decorrelate from the attractor samples drawn with the same seed
    let seed = ChaCha8Rng::seed_from_u64(seed).gen::<u64>();
    let points = sample_trapping_set(&full, model, samples, seed)?;
    debug_assert_eq!(spec.grid_function().kind(), SolutionKind::for_sign(model.monotone_sign()));
    let steps = steps.max(2);
    let mut verdict = RetractionVerdict {
        contained: true,
        checked: 0,
        max_h: f64::NEG_INFINITY,
        max_f: f64::NEG_INFINITY,
        witness: None,
    };
    for z in &points {
        for k in 0..steps {
            let t = k as f64 / (steps - 1) as f64;
            let g = deformation(model, spec, z, t)?;
            verdict.checked += 1;
            verdict.max_h = verdict.max_h.max(model.value(&g));
            verdict.max_f = verdict.max_f.max(spec.second_lyapunov(&g));
            if !full.in_closure(model, &g) && verdict.witness.is_none() {
                verdict.contained = false;
                verdict.witness = Some((*z, t));
            }
        }
    }
    Ok(verdict)
}
