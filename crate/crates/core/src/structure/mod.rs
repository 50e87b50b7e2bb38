//! Equilibria, heteroclinic connections and the discounted reduction.

mod connections;
mod discounted;
mod equilibria;
mod linear;
mod theorem_b;

pub use connections::{
    detect_connections, segment_distance, ConnectionEdge, ConnectionGraph, ConnectionOrbit, UndecidedSeed,
};
pub use discounted::{
    conformal_decay_check, lift_discounted, reduce_discounted, ConformalReport, LiftReport, ReducedOrbit,
    ReducedSystem,
};
pub use equilibria::{find_equilibria, Equilibrium, EquilibriumSet, NONDEGENERACY_FLOOR};
pub use linear::{contact_jacobian, eigen_directions, spectrum};
pub use theorem_b::{verify_theorem_b, TheoremBVerdict, TOL_STRUCT};
