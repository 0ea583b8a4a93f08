use super::bootstrap::estimate_rho;
use super::pairwise_covariance;
use crate::error::{Error, Result};
use crate::latent::LatentModel;
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::symmat::SymMatrix;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyRow<T> {
    pub n: usize,
    pub trials: usize,
    pub mean_abs_error: T,
    pub mean_estimate: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalityReport<T> {
    pub n: usize,
    pub trials: usize,
    pub eigenvalues: Vec<T>,
    /// Empirical variance of `sqrt(n) * (sample - population)` per eigenvalue.
    pub empirical_variance: Vec<T>,
    /// `2 * lambda^2`, the Gaussian limit.
    pub normal_theory_variance: Vec<T>,
}

/// Trial `t` at grid position `g` draws from stream `(g << 32) | t`.
fn trial_stream(grid_index: usize, trial: usize) -> u64 {
    ((grid_index as u64) << 32) | trial as u64
}

/// Mean `|lambda_1_hat - lambda_1|` under Gaussian draws from `pop_sigma`.
pub fn consistency_check<T: Scalar>(
    pop_sigma: &SymMatrix<T>,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConsistencyRow<T>>> {
    consistency_check_model(&LatentModel::gaussian(pop_sigma.clone())?, n_grid, trials, seed)
}

/// As [`consistency_check`], drawing from an arbitrary latent model.
pub fn consistency_check_model<T: Scalar>(
    model: &LatentModel<T>,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConsistencyRow<T>>> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    let truth = model.population_covariance().spectral_radius()?;
    let sampler = model.sampler()?;
    n_grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let estimates = (0..trials)
                .into_par_iter()
                .map(|t| estimate_rho(&sampler.draw(n, &mut stream_rng(seed, trial_stream(g, t)))?))
                .collect::<Result<Vec<T>>>()?;
            let k = T::of(trials as f64);
            Ok(ConsistencyRow {
                n,
                trials,
                mean_abs_error: estimates.iter().map(|&e| (e - truth).abs()).sum::<T>() / k,
                mean_estimate: estimates.iter().copied().sum::<T>() / k,
            })
        })
        .collect()
}

/// Empirical variance of `sqrt(n) (lambda_i_hat - lambda_i)` under Gaussian draws.
///
/// Requires a PSD `pop_sigma` with distinct eigenvalues.
pub fn normality_check<T: Scalar>(pop_sigma: &SymMatrix<T>, n: usize, trials: usize, seed: u64) -> Result<NormalityReport<T>> {
    let model = LatentModel::gaussian(pop_sigma.clone())?;
    let eigenvalues = pop_sigma.eigenvalues()?.values().to_vec();
    let scale = T::one().max(eigenvalues.first().copied().unwrap_or_else(T::zero).abs());
    if eigenvalues.windows(2).any(|w| w[0] - w[1] <= T::of(1e-8) * scale) {
        return Err(Error::InvalidArgument("population eigenvalues must be distinct".into()));
    }
    if n < 2 || trials < 2 {
        return Err(Error::InvalidArgument("normality check needs n >= 2 and at least two trials".into()));
    }
    let sampler = model.sampler()?;
    let root_n = T::of(n as f64).sqrt();
    let deviations = (0..trials)
        .into_par_iter()
        .map(|t| {
            let d = sampler.draw(n, &mut stream_rng(seed, trial_stream(0, t)))?;
            let sample = pairwise_covariance(&d)?.sigma.eigenvalues()?;
            Ok(sample.values().iter().zip(&eigenvalues).map(|(&s, &l)| root_n * (s - l)).collect::<Vec<T>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let k = T::of(trials as f64);
    let empirical_variance = (0..eigenvalues.len())
        .map(|i| {
            let mean = deviations.iter().map(|d| d[i]).sum::<T>() / k;
            deviations.iter().map(|d| (d[i] - mean) * (d[i] - mean)).sum::<T>() / (k - T::one())
        })
        .collect();
    Ok(NormalityReport {
        n,
        trials,
        normal_theory_variance: eigenvalues.iter().map(|&l| T::of(2.0) * l * l).collect(),
        eigenvalues,
        empirical_variance,
    })
}
