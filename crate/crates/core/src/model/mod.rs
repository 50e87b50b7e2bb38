//! Phase space, Hamiltonian families and structural assumptions.

mod assumptions;
mod hamiltonian;
mod minimizer;
mod potential;
mod torus;

pub use assumptions::{check_assumptions, AssumptionReport, CoercivityEntry, SampleBox, Verdict};
pub use hamiltonian::{
    eval_hamiltonian, eval_vector_field, ContactHamiltonian, Family, HamiltonianModel, Mat,
    Mirrored, MonotoneSign, SecondDerivatives, Tangent,
};
pub(crate) use hamiltonian::monotone_root;
pub use minimizer::p_star;
pub use potential::{TrigPotential, TrigTerm};
pub use torus::{angle_delta, wrap_angle, PhasePoint, TorusPoint, Vector, MAX_DIM};
