//! Flows a sampled trapping set of the pendulum and watches it settle.
use monotone_contact::attractor::{cluster_count, flow_cloud, hausdorff, sample_trapping_set, TrappingSpec};
use monotone_contact::flow::IntegratorConfig;
use monotone_contact::hj::{solve_hj, Grid, HjOptions};
use monotone_contact::model::HamiltonianModel;

fn main() -> monotone_contact::Result<()> {
    let model = HamiltonianModel::pendulum(1.0)?;
    let gf = solve_hj(&model, &Grid::new(1, 256)?, &HjOptions::default())?;
    let spec = TrappingSpec::new(&model, gf, 0.5)?;
    let samples = sample_trapping_set(&spec, &model, 400, 5)?;
    let cfg = IntegratorConfig::default();
    let mut previous = None;
    for t in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let cloud = flow_cloud(&model, &spec, &samples, t, 5, &cfg)?;
        let gap = previous.as_ref().map(|p: &Vec<_>| hausdorff(p, &cloud.points).distance);
        println!(
            "T = {t:4}: max|H| {:.2e}, max F {:+.2e}, clusters {}, step gap {}",
            cloud.max_abs_h,
            cloud.max_f,
            cluster_count(&cloud.points, 5.0).clusters,
            gap.map_or("-".into(), |g| format!("{g:.2e}"))
        );
        previous = Some(cloud.points);
    }
    Ok(())
}
