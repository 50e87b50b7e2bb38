use std::f64::consts::TAU;

use monotone_contact::hj::{
    constant_bounds, hj_residual_on_characteristics, one_sided_gradients, solve_hj, Grid, GridFunction, HjOptions,
    SolutionKind,
};
use monotone_contact::model::{ContactHamiltonian, Family, HamiltonianModel, MonotoneSign, TrigPotential, TrigTerm};
use proptest::prelude::*;

fn solve(m: &HamiltonianModel, n: usize) -> GridFunction {
    solve_hj(m, &Grid::new(m.dim(), n).unwrap(), &HjOptions::default()).unwrap()
}

fn pendulum() -> HamiltonianModel {
    HamiltonianModel::pendulum(1.0).unwrap()
}

fn tilted() -> HamiltonianModel {
    let mut t = TrigTerm::cos(&[2], 0.4);
    t.phase = 0.5;
    HamiltonianModel::new(
        Family::Mechanical,
        0.7,
        MonotoneSign::Minus,
        TrigPotential::new(1, vec![TrigTerm::cos(&[1], 1.0), t]).unwrap(),
        1.2,
    )
    .unwrap()
}

#[test]
fn grid_validation() {
    assert!(Grid::new(1, 16).is_err());
    assert!(Grid::new(1, 48).is_err());
    assert!(Grid::new(3, 64).is_err());
    let g = Grid::new(2, 32).unwrap();
    assert_eq!(g.len(), 1024);
    assert_eq!(g.flat_index(g.multi_index(77)), 77);
    assert_eq!(g.shift(g.flat_index([31, 0]), 0, 1), g.flat_index([0, 0]));
}

#[test]
fn constant_bound_examples() {
    let g = Grid::new(1, 64).unwrap();
    let (lo, hi) = constant_bounds(&pendulum(), &g).unwrap();
    assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    let (lo, hi) = constant_bounds(&HamiltonianModel::quadratic_test(1, 0.5, 0.2).unwrap(), &g).unwrap();
    assert!((lo + 0.4).abs() < 1e-12 && (hi + 0.4).abs() < 1e-12);
    let (lo, hi) = constant_bounds(&HamiltonianModel::pendulum(2.0).unwrap(), &g).unwrap();
    assert!((lo + 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
}

#[test]
fn pendulum_solution_properties() {
    let m = pendulum();
    let g256 = solve(&m, 256);
    assert_eq!(g256.kind(), SolutionKind::UMinus);
    assert!(g256.values().iter().all(|v| (-1.0..=1.0).contains(v)));
    assert!(g256.residual_norm() <= 0.1, "{}", g256.residual_norm());

    let g512 = solve(&m, 512);
    assert!(g512.residual_norm() <= 0.5 * 0.1 + 1e-6);
    assert!(g256.residual_norm() / g512.residual_norm() >= 1.7);
    assert!(hj_residual_on_characteristics(&m, &g512, 64) <= hj_residual_on_characteristics(&m, &g256, 64));

    // P(0, -1) = 2 for the pendulum, plus ten grid spacings
    let bound = m.coercivity_radius(0.0, -1.0) + 10.0 * g256.grid().spacing();
    assert!((m.coercivity_radius(0.0, -1.0) - 2.0).abs() < 1e-12);
    assert!(one_sided_gradients(&g256).max_gradient_norm() <= bound);

    let stats = g256.stats().unwrap();
    assert!(stats.max_monotone_increase <= 0.0);
    assert!(stats.dtau > 0.0 && stats.iterations > 0);
}

#[test]
fn refinement_is_first_order() {
    let m = pendulum();
    let grids: Vec<GridFunction> = [128, 256, 512].iter().map(|n| solve(&m, *n)).collect();
    // shared nodes: every other node of the finer grid
    let diff = |c: &GridFunction, f: &GridFunction| {
        c.values()
            .iter()
            .enumerate()
            .map(|(k, v)| (v - f.values()[2 * k]).abs())
            .fold(0.0, f64::max)
    };
    let c1 = diff(&grids[0], &grids[1]) / grids[0].grid().spacing();
    let c2 = diff(&grids[1], &grids[2]) / grids[1].grid().spacing();
    assert!(c1.is_finite() && c1 < 1.0, "C = {c1}");
    assert!(c2 <= 1.5 * c1, "C drifts: {c1} then {c2}");
}

#[test]
fn constant_potential_is_exact() {
    for (lambda, c) in [(1.0, 0.0), (0.3, -1.2), (2.0, 0.7)] {
        let m = HamiltonianModel::quadratic_test(1, lambda, c).unwrap();
        let gf = solve(&m, 64);
        assert!(gf.values().iter().all(|v| (v + c / lambda).abs() <= 1e-9));
        assert!(hj_residual_on_characteristics(&m, &gf, 64) <= 1e-9);
        assert_eq!(one_sided_gradients(&gf).max_gradient_norm(), 0.0);
    }
    let m = HamiltonianModel::quadratic_test(2, 1.0, 0.5).unwrap();
    let gf = solve(&m, 32);
    assert!(gf.values().iter().all(|v| (v + 0.5).abs() <= 1e-9));
}

#[test]
fn mirror_duality_is_exact() {
    for m in [pendulum(), tilted(), HamiltonianModel::two_torus(1.0).unwrap()] {
        let plus = m.mirrored();
        let n = if m.dim() == 1 { 128 } else { 32 };
        let up = solve(&plus, n);
        let um = solve(&plus.mirrored(), n);
        assert_eq!(up.kind(), SolutionKind::UPlus);
        for (a, b) in up.values().iter().zip(um.values()) {
            assert_eq!(*a, -*b);
        }
        let (lo, hi) = constant_bounds(&plus, up.grid()).unwrap();
        assert!(up.values().iter().all(|v| *v >= lo - 1e-6 && *v <= hi + 1e-6));
    }
}

#[test]
fn sandwich_and_gradient_bound_across_models() {
    for m in [pendulum(), tilted(), HamiltonianModel::pendulum(3.0).unwrap(), HamiltonianModel::two_torus(0.5).unwrap()] {
        let n = if m.dim() == 1 { 256 } else { 64 };
        let gf = solve(&m, n);
        let (lo, hi) = constant_bounds(&m, gf.grid()).unwrap();
        assert!(gf.values().iter().all(|v| *v >= lo - 1e-6 && *v <= hi + 1e-6), "{m:?}");
        let bound = m.coercivity_radius(0.0, lo) + 10.0 * gf.grid().spacing();
        assert!(one_sided_gradients(&gf).max_gradient_norm() <= bound, "{m:?}");
        assert!(gf.stats().unwrap().max_monotone_increase <= 0.0);
    }
}

#[test]
fn one_sided_differences_bracket_the_derivative() {
    let grid = Grid::new(1, 128).unwrap();
    let h = grid.spacing();
    let values: Vec<f64> = (0..grid.len()).map(|k| grid.node(k).coords()[0].sin()).collect();
    let gf = GridFunction::from_values(grid, values, SolutionKind::UMinus, 1.0, (-1.0, 1.0)).unwrap();
    let grads = one_sided_gradients(&gf);
    for k in 0..grid.len() {
        let c = grid.node(k).coords()[0].cos();
        assert!((grads.forward[k][0] - c).abs() <= h);
        assert!((grads.backward[k][0] - c).abs() <= h);
    }
    let flat = GridFunction::from_values(grid, vec![0.3; 128], SolutionKind::UMinus, 0.0, (0.3, 0.3)).unwrap();
    assert_eq!(one_sided_gradients(&flat).max_gradient_norm(), 0.0);
}

#[test]
fn bytes_round_trip_and_corruption() {
    let gf = solve(&tilted(), 64);
    let bytes = gf.to_bytes().unwrap();
    let back = GridFunction::from_bytes(&bytes).unwrap();
    assert_eq!(back.values(), gf.values());
    assert_eq!(back.kind(), gf.kind());
    assert_eq!(back.residual_norm().to_bits(), gf.residual_norm().to_bits());
    assert!(GridFunction::from_bytes(&bytes[..bytes.len() - 3]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.bin");
    gf.save(&path).unwrap();
    assert_eq!(GridFunction::load(&path).unwrap().values(), gf.values());
    assert_eq!(gf.to_csv().lines().count(), 65);
}

#[test]
fn wrong_dimension_is_rejected() {
    let g = Grid::new(2, 32).unwrap();
    assert!(solve_hj(&pendulum(), &g, &HjOptions::default()).is_err());
    let bad = GridFunction::from_values(Grid::new(1, 32).unwrap(), vec![f64::NAN; 32], SolutionKind::UMinus, 1.0, (0.0, 0.0));
    assert!(bad.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpolation_is_periodic_and_exact_at_nodes(x in 0.0..TAU, k in 0usize..64, turns in -2i32..=2) {
        let gf = solve(&pendulum(), 64);
        let node = gf.grid().node(k);
        prop_assert!((gf.interpolate(&node) - gf.values()[k]).abs() <= 1e-12);
        let a = monotone_contact::model::TorusPoint::new(&[x]).unwrap();
        let b = monotone_contact::model::TorusPoint::new(&[x + turns as f64 * TAU]).unwrap();
        prop_assert!((gf.interpolate(&a) - gf.interpolate(&b)).abs() <= 1e-12);
        let (lo, hi) = gf.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        let v = gf.interpolate(&a);
        prop_assert!(v >= lo && v <= hi);
    }

    #[test]
    fn constant_solution_for_any_level(lambda in 0.2..3.0f64, c in -2.0..2.0f64) {
        let m = HamiltonianModel::quadratic_test(1, lambda, c).unwrap();
        let gf = solve(&m, 32);
        prop_assert!(gf.values().iter().all(|v| (v + c / lambda).abs() <= 1e-9));
    }
}
