//! Eigenvalue-level experiments: labeling, rigidity, gap checks and edge statistics.

pub mod edge;
pub mod ks;
pub mod labeling;
pub mod rigidity;

pub use edge::{
    edge_rescaled_samples, reference_edge_samples, wigner_edge_samples, EdgeSampleSet, EdgeSide,
};
pub use ks::ks_distance;
pub use labeling::{component_eigenvalues, covariance_eigenvalues, draw_covariance_eigenvalues, LabeledEigenvalues};
pub use rigidity::{percentile, rigidity_profile, support_gap_check, GapReport, RigidityEntry, RigidityProfile};
