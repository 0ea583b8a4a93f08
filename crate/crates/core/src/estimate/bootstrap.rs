use super::{pairwise_covariance, SurveyDataset};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapResult<T> {
    pub point: T,
    /// Successful replicate estimates, in replicate order.
    pub replicates: Vec<T>,
    pub failed: usize,
    pub ci_low: T,
    pub ci_high: T,
    pub level: f64,
    pub seed: u64,
    pub b: usize,
}

impl<T: Scalar> BootstrapResult<T> {
    pub fn contains(&self, value: T) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    pub fn std_error(&self) -> T {
        let n = T::of(self.replicates.len() as f64);
        if self.replicates.len() < 2 {
            return T::zero();
        }
        let mean = self.replicates.iter().copied().sum::<T>() / n;
        let ss: T = self.replicates.iter().map(|&r| (r - mean) * (r - mean)).sum();
        (ss / (n - T::one())).sqrt()
    }
}

/// Largest eigenvalue of the pairwise covariance.
pub fn estimate_rho<T: Scalar>(data: &SurveyDataset<T>) -> Result<T> {
    pairwise_covariance(data)?.sigma.spectral_radius()
}

/// Percentile bootstrap of the spectral radius.
///
/// Each replicate resamples respondents with replacement (weights travel with
/// their rows) using its own `(seed, replicate)` stream, so the result is
/// bit-identical regardless of thread count.
pub fn bootstrap_rho<T: Scalar>(data: &SurveyDataset<T>, b: usize, level: f64, seed: u64) -> Result<BootstrapResult<T>> {
    bootstrap_with(data, b, level, seed, estimate_rho)
}

/// Percentile bootstrap of any respondent-level statistic.
pub fn bootstrap_with<T, F>(data: &SurveyDataset<T>, b: usize, level: f64, seed: u64, stat: F) -> Result<BootstrapResult<T>>
where
    T: Scalar,
    F: Fn(&SurveyDataset<T>) -> Result<T> + Sync,
{
    if b == 0 {
        return Err(Error::InvalidArgument("bootstrap needs at least one replicate".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {level} outside (0, 1)")));
    }
    let n = data.n();
    if n < 2 {
        return Err(Error::TooFewRespondents { needed: 2, got: n });
    }
    let point = stat(data)?;
    let outcomes: Vec<Option<T>> = (0..b)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            stat(&data.subset(&rows)).ok()
        })
        .collect();
    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    if failed * 100 > b {
        return Err(Error::FailureRate { failed, total: b });
    }
    let replicates: Vec<T> = outcomes.into_iter().flatten().collect();
    let (ci_low, ci_high) = percentile_interval(&replicates, level);
    Ok(BootstrapResult { point, replicates, failed, ci_low, ci_high, level, seed, b })
}

/// Order statistics bracketing the central `level` mass.
pub(crate) fn percentile_interval<T: Scalar>(values: &[T], level: f64) -> (T, T) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite replicate"));
    let m = sorted.len();
    let tail = (1.0 - level) / 2.0;
    let lo = ((tail * m as f64).floor() as usize).min(m - 1);
    let hi = (((1.0 - tail) * m as f64).ceil() as usize).clamp(1, m) - 1;
    (sorted[lo], sorted[hi.max(lo)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SurveyDataset<f64> {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let x = (i as f64 * 0.37).sin();
                vec![x, 0.3 * x + (i as f64 * 1.3).cos() * 0.2]
            })
            .collect();
        SurveyDataset::from_complete(&rows).unwrap()
    }

    #[test]
    fn deterministic_for_seed() {
        let d = toy();
        let a = bootstrap_rho(&d, 200, 0.95, 42).unwrap();
        let b = bootstrap_rho(&d, 200, 0.95, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.ci_low <= a.ci_high);
        assert!(a.replicates.contains(&a.ci_low) && a.replicates.contains(&a.ci_high));
        let c = bootstrap_rho(&d, 200, 0.95, 43).unwrap();
        assert_ne!(a.replicates, c.replicates);
    }

    #[test]
    fn rejects_bad_arguments() {
        let d = toy();
        assert!(bootstrap_rho(&d, 0, 0.95, 1).is_err());
        assert!(bootstrap_rho(&d, 10, 1.0, 1).is_err());
        let one = SurveyDataset::from_complete(&[vec![1.0]]).unwrap();
        assert!(bootstrap_rho(&one, 10, 0.9, 1).is_err());
    }

    #[test]
    fn failure_rate_guard() {
        let d = toy();
        let r = bootstrap_with(&d, 50, 0.9, 1, |_| Err(Error::ZeroVariance));
        // the point estimate itself fails first
        assert!(r.is_err());
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let r = bootstrap_with(&d, 50, 0.9, 1, |_| {
            if calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst) == 0 {
                Ok(1.0)
            } else {
                Err(Error::ZeroVariance)
            }
        });
        assert!(matches!(r, Err(Error::FailureRate { failed: 50, total: 50 })));
    }

    #[test]
    fn percentile_indices() {
        let v: Vec<f64> = (0..200).map(f64::from).collect();
        assert_eq!(percentile_interval(&v, 0.95), (5.0, 194.0));
        assert_eq!(percentile_interval(&[3.0], 0.95), (3.0, 3.0));
    }
}
