//! Trapping sets and finite-time approximations of the maximal attractor.

mod approx;
mod probes;
mod trapping;

pub use approx::{approximate_attractor, flow_cloud, sample_trapping_set, AttractorApprox};
pub use probes::{
    cluster_count, deformation, graph_property_check, hausdorff, retraction_probe, ClusterReport,
    GraphPropertyVerdict, HausdorffReport, RetractionVerdict,
};
pub use trapping::{Membership, TrappingSpec, Y_ENERGY_TOL};
