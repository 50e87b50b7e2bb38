use serde::Serialize;

use super::connections::{segment_distance, ConnectionGraph};
use crate::model::PhasePoint;

/// Default proximity tolerance between the attractor cloud and the graph.
pub const TOL_STRUCT: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TheoremBVerdict {
    NotApplicable {
        reason: String,
    },
    Checked {
        /// (i) every cloud point near equilibria ∪ orbits.
        proximity_ok: bool,
        max_distance: f64,
        proximity_witness: Option<PhasePoint>,
        /// (ii) `u(source) < u(target)` on every edge.
        ordering_ok: bool,
        ordering_witness: Option<(usize, usize)>,
        /// (iii) weakly connected graph; only asserted for a one-cluster cloud.
        connected_ok: bool,
    },
}

impl TheoremBVerdict {
    pub fn passed(&self) -> bool {
        match self {
            TheoremBVerdict::NotApplicable { .. } => false,
            TheoremBVerdict::Checked {
                proximity_ok,
                ordering_ok,
                connected_ok,
                ..
            } => *proximity_ok && *ordering_ok && *connected_ok,
        }
    }
}

/// Checks the attractor decomposition into equilibria and connecting orbits
/// against a sampled cloud.
pub fn verify_theorem_b(
    graph: &ConnectionGraph,
    cloud: &[PhasePoint],
    tol_struct: f64,
    cluster_count: Option<usize>,
) -> TheoremBVerdict {
    if !graph.nodes.nondegenerate() {
        return TheoremBVerdict::NotApplicable {
            reason: graph
                .nodes
                .anomaly
                .clone()
                .unwrap_or_else(|| "degenerate equilibria".into()),
        };
    }
    let eqs = &graph.nodes.equilibria;
    let distance = |q: &PhasePoint| {
        let mut best = eqs.iter().map(|e| e.point.distance(q)).fold(f64::INFINITY, f64::min);
        for edge in &graph.edges {
            for orbit in &edge.orbits {
                for w in orbit.polyline.windows(2) {
                    best = best.min(segment_distance(q, &w[0], &w[1]));
                }
            }
        }
        best
    };
    let mut max_distance: f64 = 0.0;
    let mut proximity_witness = None;
    for q in cloud {
        let d = distance(q);
        if d > max_distance {
            max_distance = d;
            if d > tol_struct {
                proximity_witness = Some(*q);
            }
        }
    }
    let ordering_witness = graph
        .edges
        .iter()
        .find(|e| eqs[e.source].u() >= eqs[e.target].u())
        .map(|e| (e.source, e.target));
    TheoremBVerdict::Checked {
        proximity_ok: max_distance <= tol_struct,
        max_distance,
        proximity_witness,
        ordering_ok: ordering_witness.is_none(),
        ordering_witness,
        connected_ok: cluster_count != Some(1) || graph.weakly_connected(),
    }
}
