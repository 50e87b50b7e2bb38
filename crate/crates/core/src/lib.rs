pub mod attractor;
pub mod config;
pub mod error;
pub mod flow;
pub mod hj;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod structure;

pub use error::{Error, Result};
