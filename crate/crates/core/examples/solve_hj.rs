//! Solves `u + u'²/2 + cos x = 0` on successively finer grids.
use monotone_contact::hj::{constant_bounds, solve_hj, Grid, HjOptions};
use monotone_contact::model::HamiltonianModel;

fn main() -> monotone_contact::Result<()> {
    let model = HamiltonianModel::pendulum(1.0)?;
    for n in [64, 128, 256, 512] {
        let grid = Grid::new(1, n)?;
        let (lo, hi) = constant_bounds(&model, &grid)?;
        let gf = solve_hj(&model, &grid, &HjOptions::default())?;
        let (min, max) = gf
            .values()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        println!(
            "N = {n:4}: u in [{min:.4}, {max:.4}] within [{lo}, {hi}], residual {:.3e}",
            gf.residual_norm()
        );
    }
    Ok(())
}
