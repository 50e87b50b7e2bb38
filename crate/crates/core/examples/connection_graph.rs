//! Equilibria and connecting orbits on the 2-torus.
use monotone_contact::flow::IntegratorConfig;
use monotone_contact::model::HamiltonianModel;
use monotone_contact::structure::{detect_connections, find_equilibria};

fn main() -> monotone_contact::Result<()> {
    let model = HamiltonianModel::two_torus(1.0)?;
    let eqs = find_equilibria(&model, 12)?;
    for e in &eqs.equilibria {
        println!("#{} x = {:?}, u = {:+.3}, Morse index {}", e.id, e.x().coords(), e.u(), e.morse_index);
    }
    let mut cfg = IntegratorConfig::forward(200.0);
    cfg.stop_at_equilibrium = false;
    let graph = detect_connections(&model, &eqs, 1e-5, &cfg)?;
    for edge in &graph.edges {
        println!("{} -> {}: {} orbit(s)", edge.source, edge.target, edge.orbits.len());
    }
    println!("weakly connected: {}, undecided seeds: {}", graph.weakly_connected(), graph.undecided.len());
    Ok(())
}
