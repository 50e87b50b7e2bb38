use std::f64::consts::PI;

use monotone_contact::flow::{check_third_lyapunov, integrate, IntegratorConfig};
use monotone_contact::model::{
    angle_delta, ContactHamiltonian, Family, HamiltonianModel, MonotoneSign, PhasePoint, TrigPotential, TrigTerm,
};
use monotone_contact::structure::{
    conformal_decay_check, detect_connections, find_equilibria, lift_discounted, reduce_discounted, verify_theorem_b,
    ConnectionGraph, TheoremBVerdict, TOL_STRUCT,
};
use proptest::prelude::*;

fn pt(x: &[f64], p: &[f64], u: f64) -> PhasePoint {
    PhasePoint::new(x, p, u).unwrap()
}

fn shooting() -> IntegratorConfig {
    let mut cfg = IntegratorConfig::forward(200.0);
    cfg.stop_at_equilibrium = false;
    cfg
}

fn graph_of<H: ContactHamiltonian>(model: &H) -> ConnectionGraph {
    let eqs = find_equilibria(model, 16).unwrap();
    detect_connections(model, &eqs, 1e-5, &shooting()).unwrap()
}

fn edges(g: &ConnectionGraph) -> Vec<(usize, usize)> {
    g.edges.iter().map(|e| (e.source, e.target)).collect()
}

fn weak_pendulum() -> HamiltonianModel {
    HamiltonianModel::new(
        Family::Discounted,
        1.0,
        MonotoneSign::Minus,
        TrigPotential::new(1, vec![TrigTerm::cos(&[1], 0.3)]).unwrap(),
        1.0,
    )
    .unwrap()
}

#[test]
fn pendulum_equilibria_and_indices() {
    let m = HamiltonianModel::pendulum(1.0).unwrap();
    let eqs = find_equilibria(&m, 16).unwrap();
    assert!(eqs.nondegenerate() && eqs.anomaly.is_none());
    assert_eq!(eqs.equilibria.len(), 2);
    let (a, b) = (&eqs.equilibria[0], &eqs.equilibria[1]);
    assert!(a.point.distance(&pt(&[0.0], &[0.0], -1.0)) <= 1e-8);
    assert!(b.point.distance(&pt(&[PI], &[0.0], 1.0)) <= 1e-8);
    assert_eq!((a.morse_index, b.morse_index), (1, 0));
    for e in &eqs.equilibria {
        assert!(m.vector_field(&e.point).norm() <= 1e-9);
        assert!(m.value(&e.point).abs() <= 1e-9);
    }
}

#[test]
fn two_torus_equilibria() {
    let m = HamiltonianModel::two_torus(1.0).unwrap();
    let eqs = find_equilibria(&m, 16).unwrap();
    assert_eq!(eqs.equilibria.len(), 4);
    let us: Vec<f64> = eqs.equilibria.iter().map(|e| e.u()).collect();
    let idx: Vec<usize> = eqs.equilibria.iter().map(|e| e.morse_index).collect();
    for (u, want) in us.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
        assert!((u - want).abs() <= 1e-9, "{us:?}");
    }
    assert_eq!(idx, [2, 1, 1, 0]);
    for e in &eqs.equilibria {
        assert!(m.vector_field(&e.point).norm() <= 1e-9);
    }
}

#[test]
fn weak_pendulum_edge() {
    let m = weak_pendulum();
    let g = graph_of(&m);
    assert_eq!(edges(&g), [(0, 1)]);
    assert!((g.nodes.equilibria[0].u() + 0.3).abs() <= 1e-9);
    assert!((g.nodes.equilibria[1].u() - 0.3).abs() <= 1e-9);
    for orbit in &g.edges[0].orbits {
        assert!(orbit.u_monotone);
        let first = orbit.polyline.first().unwrap();
        let last = orbit.polyline.last().unwrap();
        assert!(first.distance(&g.nodes.equilibria[0].point) < 1e-3);
        assert!(last.distance(&g.nodes.equilibria[1].point) < 1e-3);
    }
    assert!(g.weakly_connected());
    assert_eq!(g.to_edge_list(), "0 1\n");
}

#[test]
fn sink_emits_no_edges_and_graph_serializes() {
    let g = graph_of(&HamiltonianModel::pendulum(1.0).unwrap());
    assert!(g.edges.iter().all(|e| e.source != 1));
    assert!(g.undecided.is_empty());
    let json: serde_json::Value = serde_json::from_str(&g.to_json().unwrap()).unwrap();
    assert_eq!(json["edges"].as_array().unwrap().len(), 1);
}

#[test]
fn two_torus_graph_runs_downhill() {
    let g = graph_of(&HamiltonianModel::two_torus(1.0).unwrap());
    let e = edges(&g);
    // the source has a two-dimensional unstable eigenspace, so which of its
    // edges get hit depends on the basis; the saddles each have one
    assert!(e.contains(&(1, 3)) && e.contains(&(2, 3)), "{e:?}");
    assert!(e.iter().any(|&(s, _)| s == 0), "{e:?}");
    let from_source: usize = g.edges.iter().filter(|e| e.source == 0).map(|e| e.orbits.len()).sum();
    assert_eq!(from_source + g.undecided.iter().filter(|u| u.source == 0).count(), 4);
    for (s, t) in e {
        assert!(g.nodes.equilibria[s].u() < g.nodes.equilibria[t].u());
    }
    assert!(g.weakly_connected());
}

#[test]
fn reversed_edge_is_an_ordering_violation() {
    let mut g = graph_of(&HamiltonianModel::pendulum(1.0).unwrap());
    let cloud: Vec<PhasePoint> = g.nodes.equilibria.iter().map(|e| e.point).collect();
    assert!(verify_theorem_b(&g, &cloud, TOL_STRUCT, Some(1)).passed());
    let edge = &mut g.edges[0];
    std::mem::swap(&mut edge.source, &mut edge.target);
    match verify_theorem_b(&g, &cloud, TOL_STRUCT, Some(1)) {
        TheoremBVerdict::Checked {
            ordering_ok,
            ordering_witness,
            proximity_ok,
            ..
        } => {
            assert!(!ordering_ok && proximity_ok);
            assert_eq!(ordering_witness, Some((1, 0)));
        }
        v => panic!("{v:?}"),
    }
    let far = [pt(&[1.0], &[2.0], 0.0)];
    match verify_theorem_b(&graph_of(&HamiltonianModel::pendulum(1.0).unwrap()), &far, TOL_STRUCT, None) {
        TheoremBVerdict::Checked { proximity_ok, proximity_witness, .. } => {
            assert!(!proximity_ok);
            assert_eq!(proximity_witness, Some(far[0]));
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn flat_potential_is_not_applicable() {
    let m = HamiltonianModel::quadratic_test(1, 1.0, 0.0).unwrap();
    let eqs = find_equilibria(&m, 16).unwrap();
    assert!(!eqs.nondegenerate());
    let g = detect_connections(&m, &eqs, 1e-5, &shooting()).unwrap();
    let v = verify_theorem_b(&g, &[], TOL_STRUCT, None);
    assert!(matches!(v, TheoremBVerdict::NotApplicable { .. }));
    assert!(!v.passed());
}

#[test]
fn mirrored_pendulum_edges_follow_forward_time() {
    let m = HamiltonianModel::pendulum(1.0).unwrap().mirrored();
    let g = graph_of(&m);
    let eqs = &g.nodes.equilibria;
    assert!(eqs[0].point.distance(&pt(&[PI], &[0.0], -1.0)) <= 1e-8);
    assert!(eqs[1].point.distance(&pt(&[0.0], &[0.0], 1.0)) <= 1e-8);
    assert_eq!(edges(&g), [(0, 1)]);
    for orbit in &g.edges[0].orbits {
        assert!(orbit.polyline.first().unwrap().distance(&eqs[0].point) < 1e-3);
        assert!(orbit.polyline.last().unwrap().distance(&eqs[1].point) < 1e-3);
    }
    let cloud: Vec<PhasePoint> = eqs.iter().map(|e| e.point).collect();
    assert!(verify_theorem_b(&g, &cloud, TOL_STRUCT, Some(1)).passed());
}

#[test]
fn connecting_orbits_satisfy_third_lyapunov() {
    // on the zero level u grows like κ‖p‖², never faster than rate zero allows
    let g = graph_of(&HamiltonianModel::pendulum(1.0).unwrap());
    let m = HamiltonianModel::pendulum(1.0).unwrap();
    for orbit in &g.edges[0].orbits {
        let z0 = orbit.polyline[1];
        let traj = integrate(&m, &z0, &IntegratorConfig::forward(10.0)).unwrap();
        let v = check_third_lyapunov(&traj, 0.0);
        assert!(v.holds, "{v:?}");
    }
}

#[test]
fn reduced_pendulum_field() {
    let r = reduce_discounted(&HamiltonianModel::pendulum(0.5).unwrap()).unwrap();
    let mut out = [0.0; 2];
    r.field(&[PI / 2.0, 2.0], &mut out);
    assert!((out[0] - 2.0).abs() < 1e-15);
    assert!((out[1] - (1.0 - 0.5 * 2.0)).abs() < 1e-15);
    assert!((r.energy(&[0.0, 1.0]) - 1.5).abs() < 1e-15);
    let z = r.lift_state(&[0.0, 1.0]);
    assert!((z.u + 3.0).abs() < 1e-15);
    assert!(reduce_discounted(&HamiltonianModel::pendulum(1.0).unwrap().mirrored()).is_err());
    assert!(reduce_discounted(&HamiltonianModel::quadratic_test(1, 1.0, 0.0).unwrap()).is_err());
}

#[test]
fn lift_fixed_point_and_convergence() {
    let r = reduce_discounted(&HamiltonianModel::pendulum(2.0).unwrap()).unwrap();
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
    let fixed = lift_discounted(&r, &[PI], &[0.0], &grid).unwrap();
    for z in &fixed.points {
        assert!(z.distance(&pt(&[PI], &[0.0], 0.5)) <= 1e-12);
    }

    let r = reduce_discounted(&HamiltonianModel::pendulum(1.0).unwrap()).unwrap();
    let grid: Vec<f64> = (0..=40).map(|k| k as f64).collect();
    let moving = lift_discounted(&r, &[0.1], &[0.0], &grid).unwrap();
    assert!(moving.identity_residual <= 1e-9 && moving.field_residual <= 1e-6);
    assert!(moving.points.last().unwrap().distance(&pt(&[PI], &[0.0], 1.0)) <= 1e-4);
    assert!(lift_discounted(&r, &[0.1], &[0.0], &[-1.0]).is_err());
}

#[test]
fn phase_volume_contracts_conformally() {
    let r = reduce_discounted(&HamiltonianModel::pendulum(2.0).unwrap()).unwrap();
    let rep = conformal_decay_check(&r, &[0.4], &[0.9], 3.0).unwrap();
    assert_eq!(rep.times[0], 0.0);
    assert_eq!(rep.determinants[0], 1.0);
    let last = *rep.determinants.last().unwrap();
    assert!((last - (-6.0f64).exp()).abs() <= 1e-5 * (-6.0f64).exp());
    assert!(rep.max_relative_error <= 1e-5);
    assert!(conformal_decay_check(&r, &[0.4, 0.1], &[0.9], 3.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn full_flow_projects_onto_reduced_flow(x in 0.0..std::f64::consts::TAU, p in -2.0..2.0f64, u in -2.0..2.0f64) {
        let m = HamiltonianModel::pendulum(1.0).unwrap();
        let r = reduce_discounted(&m).unwrap();
        let mut cfg = IntegratorConfig::forward(5.0);
        cfg.rel_tol = 1e-12;
        cfg.abs_tol = 1e-14;
        cfg.stop_at_equilibrium = false;
        let full = integrate(&m, &pt(&[x], &[p], u), &cfg).unwrap();
        let reduced = r.integrate(&[x], &[p], 5.0, monotone_contact::flow::dopri::Tolerances {
            rel: 1e-12,
            abs: 1e-14,
            max_step: 0.1,
        }).unwrap();
        for k in 0..=50 {
            let t = k as f64 * 0.1;
            let a = full.sample(t).unwrap();
            let b = reduced.sample(t).unwrap();
            prop_assert!(angle_delta(a.x.coords()[0], b[0]).abs() <= 1e-8, "x at {t}");
            prop_assert!((a.p()[0] - b[1]).abs() <= 1e-8, "p at {t}");
        }
    }
}
