//! Reproducible random ensembles, Bernoulli interpolation and its moment coefficients.

pub mod distribution;
pub mod dump;
pub mod ensembles;
pub mod interpolation;
pub mod rng;

pub use distribution::{EntryDistribution, EntryLaw, Symmetry};
pub use ensembles::{
    build_covariance_model, gaussian_reference, random_orthogonal, sample_deformed_wigner, sample_x,
    sample_x_complex, CovarianceSample, EnsembleSample,
};
pub use interpolation::{bernoulli_interpolate, k_coefficients};
pub use rng::{row_rng, Tag};
