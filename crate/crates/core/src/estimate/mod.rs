//! Weighted pairwise-complete covariance, the polarization index, bootstrap
//! intervals and Monte Carlo checks of the estimator's large-sample behaviour.

mod asymptotics;
mod bootstrap;
mod covariance;
mod dataset;
mod index;

pub use asymptotics::{consistency_check, consistency_check_model, normality_check, ConsistencyRow, NormalityReport};
pub use bootstrap::{bootstrap_rho, bootstrap_with, estimate_rho, BootstrapResult};
pub use covariance::{pairwise_covariance, CovarianceEstimate};
pub(crate) use covariance::{pair_moments, PairMoments};
pub use dataset::SurveyDataset;
pub use index::{index_of_matrix, polarization_index, PolarizationIndex};
