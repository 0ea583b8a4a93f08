//! One-factor latent ideology model `x = beta * y + e` with `Var(y) = a`,
//! `Var(e) = gamma`, whose population covariance is `a * beta beta' + gamma`.
//!
//! Besides sampling, this module checks numerically that the spectral radius
//! never decreases under positive rank-one updates and that it increases
//! strictly in the regimes where that is guaranteed.

use crate::error::{Error, Result};
use crate::estimate::SurveyDataset;
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::symmat::{jacobi, SymMatrix};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

const PSD_TOL: f64 = 1e-9;
const DECREASE_TOL: f64 = 1e-9;
const STRICT_TOL: f64 = 1e-12;
const PROJECTION_TOL: f64 = 1e-8;
const CLUSTER_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LatentDist {
    #[default]
    Normal,
    Rademacher,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDist {
    #[default]
    Normal,
    Uniform,
}

impl FromStr for LatentDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(LatentDist::Normal),
            "rademacher" => Ok(LatentDist::Rademacher),
            "uniform" => Ok(LatentDist::Uniform),
            other => Err(Error::InvalidArgument(format!("unknown latent distribution '{other}'"))),
        }
    }
}

impl FromStr for NoiseDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(NoiseDist::Normal),
            "uniform" => Ok(NoiseDist::Uniform),
            other => Err(Error::InvalidArgument(format!("unknown noise distribution '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct LatentModel<T> {
    /// Variance of the latent position.
    pub a: T,
    /// Issue sensitivities.
    pub beta: Vec<T>,
    /// Idiosyncratic noise covariance.
    pub gamma: SymMatrix<T>,
    #[serde(default)]
    pub y_dist: LatentDist,
    #[serde(default)]
    pub e_dist: NoiseDist,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport<T> {
    /// Grid of update coefficients (`c` or `a`).
    pub grid: Vec<T>,
    pub rho_values: Vec<T>,
    /// Steps where the spectral radius fell by more than the tolerance.
    pub violations: usize,
    /// Steps that had to be strictly increasing.
    pub strict_steps: usize,
    /// Required-strict steps that were flat or decreasing.
    pub strict_violations: usize,
    pub strict_region_verified: bool,
}

impl<T: Scalar> LatentModel<T> {
    pub fn new(a: T, beta: Vec<T>, gamma: SymMatrix<T>) -> Result<Self> {
        let m = LatentModel { a, beta, gamma, y_dist: LatentDist::Normal, e_dist: NoiseDist::Normal };
        m.validate()?;
        Ok(m)
    }

    pub fn with_dists(mut self, y_dist: LatentDist, e_dist: NoiseDist) -> Self {
        self.y_dist = y_dist;
        self.e_dist = e_dist;
        self
    }

    /// Plain multivariate draws with covariance `sigma` (zero loadings).
    pub fn gaussian(sigma: SymMatrix<T>) -> Result<Self> {
        let p = sigma.dim();
        Self::new(T::one(), vec![T::zero(); p], sigma)
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > T::zero()) {
            return Err(Error::InvalidArgument(format!("latent variance a = {} must be positive", self.a)));
        }
        if self.beta.len() != self.gamma.dim() {
            return Err(Error::DimensionMismatch { expected: self.gamma.dim(), got: self.beta.len() });
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("beta has non-finite entries".into()));
        }
        check_psd(&self.gamma)
    }

    pub fn population_covariance(&self) -> SymMatrix<T> {
        self.gamma.rank_one_update(self.a, &self.beta).expect("validated dimensions")
    }

    pub fn sampler(&self) -> Result<LatentSampler<T>> {
        self.validate()?;
        let p = self.dim();
        let (vals, vecs) = jacobi(&self.gamma, true)?;
        let v = vecs.expect("vectors requested");
        let mut root = vec![0.0; p * p];
        for j in 0..p {
            for i in 0..p {
                root[j * p + i] = v[j * p + i].as_f64() * vals[i].as_f64().max(0.0).sqrt();
            }
        }
        Ok(LatentSampler {
            p,
            root,
            beta: self.beta.iter().map(|b| b.as_f64()).collect(),
            sd_y: self.a.as_f64().sqrt(),
            y_dist: self.y_dist,
            e_dist: self.e_dist,
            questions: (0..p).map(|j| format!("x{j}")).collect(),
            _t: std::marker::PhantomData,
        })
    }

    /// `n` i.i.d. complete draws with unit weights, year 0.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SurveyDataset<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        self.sampler()?.draw(n, &mut stream_rng(seed, 0))
    }
}

/// Precomputed noise square root for repeated sampling.
#[derive(Clone, Debug)]
pub struct LatentSampler<T> {
    p: usize,
    root: Vec<f64>,
    beta: Vec<f64>,
    sd_y: f64,
    y_dist: LatentDist,
    e_dist: NoiseDist,
    questions: Vec<String>,
    _t: std::marker::PhantomData<T>,
}

impl<T: Scalar> LatentSampler<T> {
    /// Fills `x` with one response vector and returns the latent draw behind it.
    pub fn draw_one<R: Rng>(&self, rng: &mut R, x: &mut [f64]) -> f64 {
        let s3 = 3f64.sqrt();
        let y = match self.y_dist {
            LatentDist::Normal => self.sd_y * Distribution::<f64>::sample(&StandardNormal, rng),
            LatentDist::Rademacher => {
                if rng.random::<bool>() {
                    self.sd_y
                } else {
                    -self.sd_y
                }
            }
            LatentDist::Uniform => self.sd_y * rng.random_range(-s3..s3),
        };
        let p = self.p;
        let z: Vec<f64> = (0..p)
            .map(|_| match self.e_dist {
                NoiseDist::Normal => Distribution::<f64>::sample(&StandardNormal, rng),
                NoiseDist::Uniform => rng.random_range(-s3..s3),
            })
            .collect();
        for j in 0..p {
            let e: f64 = (0..p).map(|i| self.root[j * p + i] * z[i]).sum();
            x[j] = self.beta[j] * y + e;
        }
        y
    }

    pub fn draw<R: Rng>(&self, n: usize, rng: &mut R) -> Result<SurveyDataset<T>> {
        let mut d = SurveyDataset::new(self.questions.clone());
        let mut x = vec![0.0; self.p];
        let mut row = vec![None; self.p];
        for _ in 0..n {
            self.draw_one(rng, &mut x);
            for (slot, &v) in row.iter_mut().zip(&x) {
                *slot = Some(T::of(v));
            }
            d.push_row(&row, T::one(), 0, &[])?;
        }
        Ok(d)
    }
}

pub(crate) fn check_psd<T: Scalar>(m: &SymMatrix<T>) -> Result<()> {
    let lambda_min = m.eigenvalues()?.smallest();
    if lambda_min < -T::of(PSD_TOL) {
        return Err(Error::NotPsd { lambda_min: lambda_min.as_f64() });
    }
    Ok(())
}

fn check_grid<T: Scalar>(grid: &[T], strictly_positive: bool) -> Result<()> {
    if grid.iter().any(|c| !c.is_finite() || *c < T::zero() || (strictly_positive && *c == T::zero())) {
        return Err(Error::InvalidArgument("grid values must be finite and nonnegative (positive for a)".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("grid must be ascending".into()));
    }
    Ok(())
}

/// Spectral radius of `c v v' + d` along an ascending grid of `c`.
pub fn rank_one_monotonicity<T: Scalar>(d: &SymMatrix<T>, v: &[T], c_grid: &[T]) -> Result<MonotonicityReport<T>> {
    check_psd(d)?;
    check_grid(c_grid, false)?;
    let rho_values = c_grid
        .iter()
        .map(|&c| d.rank_one_update(c, v)?.spectral_radius())
        .collect::<Result<Vec<_>>>()?;
    Ok(report(c_grid.to_vec(), rho_values, |_| false))
}

/// Norm of the projection of `beta` onto the eigenspace of `gamma`'s largest eigenvalue.
///
/// Eigenvalues within `1e-8 * rho(gamma)` of the largest are treated as one cluster.
pub fn principal_projection_norm<T: Scalar>(gamma: &SymMatrix<T>, beta: &[T]) -> Result<T> {
    let p = gamma.dim();
    if beta.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: beta.len() });
    }
    let (vals, vecs) = jacobi(gamma, true)?;
    let v = vecs.expect("vectors requested");
    let top = vals.iter().copied().fold(T::neg_infinity(), T::max);
    let cutoff = top - T::of(CLUSTER_TOL) * top.abs();
    let mut sq = T::zero();
    for (i, &lam) in vals.iter().enumerate() {
        if lam >= cutoff {
            let dot: T = (0..p).map(|j| v[j * p + i] * beta[j]).sum();
            sq += dot * dot;
        }
    }
    Ok(sq.sqrt())
}

/// `r(a) = rho(a beta beta' + gamma)` along an ascending, positive grid of `a`.
///
/// A step `a_i -> a_{i+1}` must be strictly increasing when `beta` projects onto
/// the principal eigenspace of `gamma`, or when `a_i * |beta|^2 > |gamma|_2`
/// (which is `a_i > |gamma|_2` for unit-norm loadings). Every step must be
/// non-decreasing.
pub fn strict_increase_check<T: Scalar>(model: &LatentModel<T>, a_grid: &[T]) -> Result<MonotonicityReport<T>> {
    model.validate()?;
    check_grid(a_grid, true)?;
    let gamma_norm = model.gamma.spectral_radius()?;
    let beta_sq: T = model.beta.iter().map(|&b| b * b).sum();
    let projects = principal_projection_norm(&model.gamma, &model.beta)? > T::of(PROJECTION_TOL);
    let rho_values = a_grid
        .iter()
        .map(|&a| model.gamma.rank_one_update(a, &model.beta)?.spectral_radius())
        .collect::<Result<Vec<_>>>()?;
    let dominates = |a: T| beta_sq > T::zero() && a * beta_sq > gamma_norm;
    Ok(report(a_grid.to_vec(), rho_values, |i| {
        a_grid[i + 1] > a_grid[i] && (projects || dominates(a_grid[i]))
    }))
}

fn report<T: Scalar>(grid: Vec<T>, rho: Vec<T>, strict_at: impl Fn(usize) -> bool) -> MonotonicityReport<T> {
    let mut violations = 0;
    let mut strict_steps = 0;
    let mut strict_violations = 0;
    for i in 0..rho.len().saturating_sub(1) {
        let scale = T::one().max(rho[i].abs());
        let diff = rho[i + 1] - rho[i];
        if diff < -T::of(DECREASE_TOL) * scale {
            violations += 1;
        }
        if strict_at(i) {
            strict_steps += 1;
            if diff <= T::of(STRICT_TOL) * scale {
                strict_violations += 1;
            }
        }
    }
    MonotonicityReport {
        grid,
        rho_values: rho,
        violations,
        strict_steps,
        strict_violations,
        strict_region_verified: strict_violations == 0,
    }
}
