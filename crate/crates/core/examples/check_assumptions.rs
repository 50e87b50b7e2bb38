//! Samples the structural assumptions for a few models.
use monotone_contact::model::{check_assumptions, HamiltonianModel, SampleBox};

fn main() -> monotone_contact::Result<()> {
    let models = [
        ("pendulum", HamiltonianModel::pendulum(1.0)?),
        ("mirrored pendulum", HamiltonianModel::pendulum(1.0)?.mirrored()),
        ("2-torus", HamiltonianModel::two_torus(0.5)?),
        ("flat", HamiltonianModel::quadratic_test(1, 1.0, 0.0)?),
    ];
    let sample_box = SampleBox { p_radius: 3.0, u_min: -3.0, u_max: 3.0 };
    for (name, model) in &models {
        let report = check_assumptions(model, sample_box, 8, &[])?;
        println!("{name}: all verified = {}", report.all_verified());
        println!("  {report:?}");
    }
    Ok(())
}
