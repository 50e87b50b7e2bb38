//! Integration of the contact flow and the Lyapunov diagnostics along orbits.

pub mod dopri;
mod export;
mod integrate;
mod lyapunov;

pub use integrate::{integrate, integrate_until, Direction, IntegratorConfig, Termination, Trajectory};
pub use lyapunov::{
    check_first_lyapunov, check_second_lyapunov, check_third_lyapunov, classify_limit, energy_residual,
    EnergyReport, LimitClass, LyapunovVerdict, LIMIT_PROXIMITY,
};
