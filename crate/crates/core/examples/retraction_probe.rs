//! Deforms the pendulum trapping set onto the graph of `u-` and checks that
//! it never leaves the set.
use monotone_contact::attractor::{retraction_probe, TrappingSpec};
use monotone_contact::hj::{solve_hj, Grid, HjOptions};
use monotone_contact::model::HamiltonianModel;

fn main() -> monotone_contact::Result<()> {
    let model = HamiltonianModel::pendulum(1.0)?;
    let gf = solve_hj(&model, &Grid::new(1, 256)?, &HjOptions::default())?;
    for delta in [0.1, 0.5, 1.0] {
        let spec = TrappingSpec::new(&model, gf.clone(), delta)?;
        let v = retraction_probe(&model, &spec, 500, 21, 13)?;
        println!(
            "δ = {delta}: contained {} over {} points, max H {:.3}, max F {:.3}",
            v.contained, v.checked, v.max_h, v.max_f
        );
    }
    Ok(())
}
