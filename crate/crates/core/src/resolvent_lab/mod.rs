//! The block resolvent `G(z)` through one singular value decomposition, exact identities and
//! local-law error scans.

pub mod factorization;
pub mod scans;
pub mod wigner;

pub use factorization::{dense_resolvent, factorize, Projection, ResolventFactorization};
pub use scans::{anisotropic_scan, averaged_scan, AveragedRecord, ErrorRecord, ErrorScan, VectorPanel};
pub use wigner::{wigner_scan, WignerFactorization};
