//! Deterministic equivalents of the resolvents, the error scale and the spectral domains.

pub mod covariance;
pub mod domain;
pub mod wigner;

pub use covariance::{build_equivalents, psi, DottedPi, EquivalentSet, Variant};
pub use domain::{bulk_edge_grid, log_spaced, make_domain, DomainKind, SpectralDomain};
pub use wigner::{wigner_edge_points, wigner_edges, wigner_equivalents, wigner_from_m, wigner_grid, wigner_m, WignerEdge, WignerEquation, WignerEquivalents, WignerValue};
