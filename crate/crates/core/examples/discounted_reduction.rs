//! The discounted pendulum through its `(x, p)` reduction: lift back to the
//! zero level and watch phase volume shrink like `e^{-λt}`.
use monotone_contact::model::HamiltonianModel;
use monotone_contact::structure::{conformal_decay_check, lift_discounted, reduce_discounted};

fn main() -> monotone_contact::Result<()> {
    let reduced = reduce_discounted(&HamiltonianModel::pendulum(0.5)?)?;
    let grid: Vec<f64> = (0..=20).map(|k| k as f64).collect();
    let lift = lift_discounted(&reduced, &[0.1], &[0.0], &grid)?;
    for (t, z) in lift.times.iter().zip(&lift.points).step_by(4) {
        println!("t = {t:4}: x = {:.5}, p = {:+.5}, u = {:+.5}", z.x.coords()[0], z.p()[0], z.u);
    }
    println!("identity residual {:.1e}, field residual {:.1e}", lift.identity_residual, lift.field_residual);

    let rep = conformal_decay_check(&reduced, &[0.4], &[0.9], 6.0)?;
    println!(
        "det Dφ at t = 6: {:.6e} (expected {:.6e}), worst relative error {:.1e}",
        rep.determinants.last().unwrap(),
        (-3.0f64).exp(),
        rep.max_relative_error
    );
    Ok(())
}
