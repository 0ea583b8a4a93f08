use super::check_baseline;
use crate::error::{Error, Result};
use crate::estimate::{pair_moments, pairwise_covariance, PairMoments, SurveyDataset};
use crate::scalar::Scalar;
use crate::symmat::SymMatrix;
use serde::Serialize;
use std::collections::BTreeMap;

/// Within/between-group split of a pooled covariance and of its spectral radius.
///
/// Every entry `(j, k)` is split on the same pairwise-complete respondent set
/// the pooled estimate uses, so `sigma_within + sigma_between` reproduces the
/// pooled matrix of the surviving respondents.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupDecomposition<T> {
    pub group_var: String,
    pub group_labels: Vec<String>,
    pub group_sizes: Vec<usize>,
    /// Weight shares of the surviving groups.
    pub shares: Vec<T>,
    /// Weighted per-question means of each group over its respondents answering that question.
    pub means: Vec<Vec<T>>,
    /// Effective group covariances entering `rho_within` (see [`group_decompose`]).
    pub sigmas: Vec<SymMatrix<T>>,
    pub sigma_within: SymMatrix<T>,
    pub sigma_between: SymMatrix<T>,
    /// Pooled covariance over surviving respondents.
    pub sigma_pooled: SymMatrix<T>,
    pub rho_pooled: T,
    /// Pooled covariance over every respondent, including dropped groups and absent labels.
    pub sigma_pooled_all: SymMatrix<T>,
    pub rho_pooled_all: T,
    pub rho_within: T,
    pub rho_between: T,
    pub slack_b: T,
    pub slack_w: T,
    pub dropped_groups: Vec<String>,
    pub unlabeled_rows: usize,
    pub dropped_weight_share: T,
}

/// One bin's inputs to [`within_between_counterfactuals`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WithinBetweenPoint<T> {
    pub bin: String,
    pub rho: T,
    pub rho_within: T,
    pub rho_between: T,
}

/// Observed spectral radius next to the series obtained by freezing the
/// between-group (`within_only`) or within-group (`between_only`) part at the
/// baseline. Changes of the two add up to the observed change.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupCounterfactuals<T> {
    pub bins: Vec<String>,
    pub baseline: usize,
    pub observed: Vec<T>,
    pub within_only: Vec<T>,
    pub between_only: Vec<T>,
}

impl<T: Scalar> GroupDecomposition<T> {
    pub fn point(&self, bin: &str) -> WithinBetweenPoint<T> {
        WithinBetweenPoint {
            bin: bin.to_string(),
            rho: self.rho_pooled,
            rho_within: self.rho_within,
            rho_between: self.rho_between,
        }
    }

    pub fn share_of(&self, label: &str) -> Option<T> {
        self.group_labels.iter().position(|l| l == label).map(|i| self.shares[i])
    }
}

/// Splits the pooled covariance by the categorical variable `group_var`.
///
/// Respondents with an absent label, and groups with fewer than `min_cell`
/// respondents, are dropped; their weight share is reported.
///
/// For each entry the within part is `sum_g w_g^{jk} cov_g^{jk}` and the
/// between part `sum_g w_g^{jk} (m_gj - m_j)(m_gk - m_k)`, with `w_g^{jk}` the
/// group's weight share on that entry's pairwise-complete set. The matrices
/// whose norms enter `rho_within` are scaled entrywise by `w_g^{jk} / p_g` so
/// that `sigma_within = sum_g p_g * sigmas[g]` holds exactly; on complete data
/// that factor is one and `sigmas[g]` is plainly the group covariance.
pub fn group_decompose<T: Scalar>(data: &SurveyDataset<T>, group_var: &str, min_cell: usize) -> Result<GroupDecomposition<T>> {
    let labels = data.group_labels(group_var).ok_or_else(|| Error::UnknownGroupVariable(group_var.to_string()))?;
    let sigma_pooled_all = pairwise_covariance(data)?.sigma;

    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut unlabeled_rows = 0;
    for (r, l) in labels.iter().enumerate() {
        match l {
            Some(l) => members.entry(l.as_str()).or_default().push(r),
            None => unlabeled_rows += 1,
        }
    }
    let mut dropped_groups = Vec::new();
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (label, rows) in members {
        if rows.len() < min_cell.max(1) {
            dropped_groups.push(label.to_string());
        } else {
            groups.push((label.to_string(), rows));
        }
    }
    if groups.is_empty() {
        return Err(Error::AllGroupsDropped { min_cell });
    }

    let survivors: Vec<usize> = {
        let mut s: Vec<usize> = groups.iter().flat_map(|(_, r)| r.iter().copied()).collect();
        s.sort_unstable();
        s
    };
    let total_weight: T = data.weights().iter().copied().sum();
    let group_weights: Vec<T> = groups.iter().map(|(_, rows)| rows.iter().map(|&r| data.weight(r)).sum()).collect();
    let surviving_weight: T = group_weights.iter().copied().sum();
    let shares: Vec<T> = group_weights.iter().map(|&w| w / surviving_weight).collect();

    let p = data.p();
    let g_count = groups.len();
    let mut sigma_pooled = SymMatrix::zeros(p);
    let mut sigma_within = SymMatrix::zeros(p);
    let mut sigma_between = SymMatrix::zeros(p);
    let mut sigmas = vec![SymMatrix::zeros(p); g_count];
    for j in 0..p {
        for k in j..p {
            let pooled = pair_moments(data, j, k, survivors.iter().copied());
            if pooled.n < 2 {
                continue;
            }
            let parts: Vec<PairMoments<T>> =
                groups.iter().map(|(_, rows)| pair_moments(data, j, k, rows.iter().copied())).collect();
            let mut within = T::zero();
            let mut between = T::zero();
            for (g, m) in parts.iter().enumerate() {
                if m.n == 0 {
                    continue;
                }
                let share = m.wsum / pooled.wsum;
                within += share * m.cov;
                between += share * (m.mean_j - pooled.mean_j) * (m.mean_k - pooled.mean_k);
                sigmas[g].set_sym(j, k, share / shares[g] * m.cov);
            }
            sigma_pooled.set_sym(j, k, pooled.cov);
            sigma_within.set_sym(j, k, within);
            sigma_between.set_sym(j, k, between);
        }
    }

    let means = groups
        .iter()
        .map(|(_, rows)| {
            (0..p)
                .map(|j| {
                    let (mut w, mut s) = (T::zero(), T::zero());
                    for &r in rows {
                        if let Some(x) = data.value(r, j) {
                            w += data.weight(r);
                            s += data.weight(r) * x;
                        }
                    }
                    if w > T::zero() {
                        s / w
                    } else {
                        T::zero()
                    }
                })
                .collect()
        })
        .collect();

    let rho_pooled = sigma_pooled.spectral_radius()?;
    let rho_w_matrix = sigma_within.spectral_radius()?;
    let rho_b_matrix = sigma_between.spectral_radius()?;
    let rho_within = sigmas
        .iter()
        .zip(&shares)
        .map(|(s, &share)| Ok(share * s.spectral_radius()?))
        .sum::<Result<T>>()?;

    Ok(GroupDecomposition {
        group_var: group_var.to_string(),
        group_labels: groups.iter().map(|(l, _)| l.clone()).collect(),
        group_sizes: groups.iter().map(|(_, r)| r.len()).collect(),
        shares,
        means,
        sigmas,
        rho_pooled_all: sigma_pooled_all.spectral_radius()?,
        sigma_pooled_all,
        sigma_pooled,
        rho_within,
        rho_between: rho_pooled - rho_within,
        slack_b: rho_w_matrix + rho_b_matrix - rho_pooled,
        slack_w: rho_within - rho_w_matrix,
        sigma_within,
        sigma_between,
        rho_pooled,
        dropped_groups,
        unlabeled_rows,
        dropped_weight_share: (total_weight - surviving_weight) / total_weight,
    })
}

pub fn within_between_counterfactuals<T: Scalar>(series: &[WithinBetweenPoint<T>]) -> Result<GroupCounterfactuals<T>> {
    within_between_counterfactuals_from(series, 0)
}

pub fn within_between_counterfactuals_from<T: Scalar>(
    series: &[WithinBetweenPoint<T>],
    baseline: usize,
) -> Result<GroupCounterfactuals<T>> {
    check_baseline(series.len(), baseline)?;
    let base = &series[baseline];
    Ok(GroupCounterfactuals {
        bins: series.iter().map(|s| s.bin.clone()).collect(),
        baseline,
        observed: series.iter().map(|s| s.rho).collect(),
        within_only: series.iter().map(|s| s.rho_within + base.rho_between).collect(),
        between_only: series.iter().map(|s| base.rho_within + s.rho_between).collect(),
    })
}

impl<T: Scalar> GroupCounterfactuals<T> {
    /// Largest deviation from `(within_only - obs0) + (between_only - obs0) == observed - obs0`.
    pub fn identity_error(&self) -> T {
        let o0 = self.observed[self.baseline];
        (0..self.observed.len()).fold(T::zero(), |acc, t| {
            let lhs = (self.within_only[t] - o0) + (self.between_only[t] - o0);
            acc.max((lhs - (self.observed[t] - o0)).abs())
        })
    }
}
