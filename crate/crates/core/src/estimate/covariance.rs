use super::SurveyDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symmat::SymMatrix;
use serde::Serialize;

/// Weighted first and second moments of one question pair over its
/// pairwise-complete rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PairMoments<T> {
    pub n: usize,
    pub wsum: T,
    pub mean_j: T,
    pub mean_k: T,
    /// Population-divisor covariance; zero when `n == 0`.
    pub cov: T,
}

/// Two-pass weighted moments of questions `j`, `k` over `rows` where both are present.
pub(crate) fn pair_moments<T: Scalar>(
    data: &SurveyDataset<T>,
    j: usize,
    k: usize,
    rows: impl Iterator<Item = usize> + Clone,
) -> PairMoments<T> {
    let both = |r: usize| match (data.value(r, j), data.value(r, k)) {
        (Some(x), Some(y)) => Some((data.weight(r), x, y)),
        _ => None,
    };
    let mut n = 0;
    let (mut w, mut sx, mut sy) = (T::zero(), T::zero(), T::zero());
    for (wi, x, y) in rows.clone().filter_map(both) {
        n += 1;
        w += wi;
        sx += wi * x;
        sy += wi * y;
    }
    if n == 0 || w == T::zero() {
        return PairMoments { n, wsum: w, mean_j: T::zero(), mean_k: T::zero(), cov: T::zero() };
    }
    let (mx, my) = (sx / w, sy / w);
    let mut sxy = T::zero();
    for (wi, x, y) in rows.filter_map(both) {
        sxy += wi * (x - mx) * (y - my);
    }
    PairMoments { n, wsum: w, mean_j: mx, mean_k: my, cov: sxy / w }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceEstimate<T> {
    pub sigma: SymMatrix<T>,
    /// Respondents with both questions present, row-major `p x p`.
    pub pair_n: Vec<usize>,
    /// Weight mass of the pairwise-complete set, row-major `p x p`.
    pub pair_wsum: Vec<T>,
    pub kish_n_eff: T,
    pub lambda_min: T,
    /// Upper-triangle entries `(j, k)` estimated from fewer than two respondents and zero-filled.
    pub insufficient: Vec<(usize, usize)>,
}

impl<T: Scalar> CovarianceEstimate<T> {
    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn pair_n(&self, j: usize, k: usize) -> usize {
        self.pair_n[j * self.dim() + k]
    }

    pub fn pair_wsum(&self, j: usize, k: usize) -> T {
        self.pair_wsum[j * self.dim() + k]
    }
}

/// Weighted pairwise-complete covariance with population divisor.
///
/// Entry `(j, k)` uses only respondents answering both questions, centered on
/// the weighted means of that same set.
pub fn pairwise_covariance<T: Scalar>(data: &SurveyDataset<T>) -> Result<CovarianceEstimate<T>> {
    let (n, p) = (data.n(), data.p());
    if n == 0 || p == 0 {
        return Err(Error::EmptyDataset { n, p });
    }
    if n < 2 {
        return Err(Error::TooFewRespondents { needed: 2, got: n });
    }
    let mut sigma = SymMatrix::zeros(p);
    let mut pair_n = vec![0; p * p];
    let mut pair_wsum = vec![T::zero(); p * p];
    let mut insufficient = Vec::new();
    for j in 0..p {
        for k in j..p {
            let m = pair_moments(data, j, k, 0..n);
            if m.n > 0 && m.wsum <= T::zero() {
                return Err(Error::DegenerateWeights(j, k));
            }
            pair_n[j * p + k] = m.n;
            pair_n[k * p + j] = m.n;
            pair_wsum[j * p + k] = m.wsum;
            pair_wsum[k * p + j] = m.wsum;
            if m.n < 2 {
                insufficient.push((j, k));
            } else {
                sigma.set_sym(j, k, m.cov);
            }
        }
    }
    let lambda_min = sigma.eigenvalues()?.smallest();
    Ok(CovarianceEstimate { sigma, pair_n, pair_wsum, kish_n_eff: data.kish_n_eff(), lambda_min, insufficient })
}
