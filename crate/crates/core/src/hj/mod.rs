//! Viscosity solutions of the stationary Hamilton–Jacobi equations on a
//! periodic grid.

mod gradients;
mod grid;
mod gridfn;
mod solver;

pub use gradients::{hj_residual_on_characteristics, one_sided_gradients, OneSidedGradients};
pub use grid::Grid;
pub use gridfn::{GridFunction, SolutionKind, SolveStats};
pub use solver::{constant_bounds, solve_hj, HjOptions, ROOT_LIMIT};
