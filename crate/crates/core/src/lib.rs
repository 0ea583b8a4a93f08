//! Ideological polarization as the spectral radius of a survey-response
//! covariance matrix.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to double precision, which is what the pipeline and CLI use.

pub mod decompose;
pub mod encode;
mod error;
pub mod estimate;
pub mod latent;
pub mod pipeline;
pub mod rng;
mod scalar;
pub mod symmat;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use symmat::{make_sym, NormKind, Spectrum, SymMatrix};

pub type Matrix = SymMatrix<f64>;
pub type Matrix32 = SymMatrix<f32>;
pub type Eigenvalues = Spectrum<f64>;
pub type Dataset = estimate::SurveyDataset<f64>;
pub type Covariance = estimate::CovarianceEstimate<f64>;
pub type Index = estimate::PolarizationIndex<f64>;
pub type Bootstrap = estimate::BootstrapResult<f64>;
pub type Groups = decompose::GroupDecomposition<f64>;
pub type Model = latent::LatentModel<f64>;
