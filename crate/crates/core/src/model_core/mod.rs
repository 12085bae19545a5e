//! Deterministic spectral theory of the covariance model.

pub mod critical;
pub mod density;
pub mod inverse_map;
pub mod population;
pub mod quantiles;
pub mod regularity;
pub mod solver;

pub use critical::{locate_critical_points, CriticalPoint, CriticalSet};
pub use density::{atom_mass, DensityProfile};
pub use inverse_map::InverseMap;
pub use population::{Atom, Dims, PopulationModel};
pub use quantiles::{bulk_counts, classical_locations, BulkCounts, ClassicalLocations};
pub use regularity::{
    check_regularity, edge_curvature, stability_coefficients, RegularityReport, Thresholds,
};
pub use solver::{solve_m, SolverSettings, StieltjesValue};
