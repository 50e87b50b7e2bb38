//! One orbit of the discounted pendulum: the energy decays like `e^{-t}`.
use monotone_contact::flow::{integrate, IntegratorConfig};
use monotone_contact::model::{ContactHamiltonian, HamiltonianModel, PhasePoint};

fn main() -> monotone_contact::Result<()> {
    let model = HamiltonianModel::pendulum(1.0)?;
    let z0 = PhasePoint::new(&[1.0], &[0.5], 0.8)?;
    let mut cfg = IntegratorConfig::forward(5.0);
    cfg.stop_at_equilibrium = false;
    let traj = integrate(&model, &z0, &cfg)?;
    let h0 = model.value(&z0);
    println!("{:>6} {:>10} {:>10} {:>10} {:>14}", "t", "x", "p", "u", "H·e^t - H0");
    for k in 0..=10 {
        let t = 0.5 * k as f64;
        let z = traj.sample(t).unwrap_or(*traj.last());
        println!(
            "{t:6.2} {:10.5} {:10.5} {:10.5} {:14.3e}",
            z.x.coords()[0],
            z.p()[0],
            z.u,
            model.value(&z) * t.exp() - h0
        );
    }
    println!("{} accepted steps, {:?}", traj.len() - 1, traj.termination);
    Ok(())
}
