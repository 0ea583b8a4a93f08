//! Dense symmetric matrices, their spectra, and the eigenvalue-based norms.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

const MAX_SWEEPS: usize = 100;

/// Dense symmetric `p x p` matrix, stored row-major.
///
/// Entries are finite and exactly symmetric.
#[derive(Clone, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

/// Eigenvalues of a [`SymMatrix`], largest first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum<T> {
    values: Vec<T>,
}

/// Matrix norms expressed through the eigenvalue vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    /// Largest absolute eigenvalue.
    #[default]
    Spectral,
    /// Euclidean norm of the eigenvalues.
    Frobenius,
    /// Sum of absolute eigenvalues.
    Nuclear,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::Spectral, NormKind::Frobenius, NormKind::Nuclear];

    pub fn name(self) -> &'static str {
        match self {
            NormKind::Spectral => "spectral",
            NormKind::Frobenius => "frobenius",
            NormKind::Nuclear => "nuclear",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spectral" => Ok(NormKind::Spectral),
            "frobenius" => Ok(NormKind::Frobenius),
            "nuclear" | "trace" => Ok(NormKind::Nuclear),
            other => Err(Error::InvalidArgument(format!("unknown norm '{other}'"))),
        }
    }
}

/// Builds a symmetric matrix from a raw square grid, averaging `raw` with its transpose.
///
/// Fails when the grid is not square, contains NaN/inf, or when
/// `max|raw[j][k] - raw[k][j]|` exceeds `tol * max(1, max|raw|)`.
pub fn make_sym<T: Scalar>(raw: &[Vec<T>], tol: T) -> Result<SymMatrix<T>> {
    let p = raw.len();
    for (row, r) in raw.iter().enumerate() {
        if r.len() != p {
            return Err(Error::NotSquare { rows: p, row, cols: r.len() });
        }
    }
    let mut max_abs = T::zero();
    for (j, r) in raw.iter().enumerate() {
        for (k, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: j, col: k });
            }
            max_abs = max_abs.max(v.abs());
        }
    }
    let allowed = tol * T::one().max(max_abs);
    let mut max_diff = T::zero();
    for j in 0..p {
        for k in (j + 1)..p {
            max_diff = max_diff.max((raw[j][k] - raw[k][j]).abs());
        }
    }
    if max_diff > allowed {
        return Err(Error::Asymmetry { max_diff: max_diff.as_f64(), allowed: allowed.as_f64() });
    }
    let half = T::of(0.5);
    Ok(SymMatrix::from_fn(p, |j, k| {
        if j == k {
            raw[j][j]
        } else {
            (raw[j][k] + raw[k][j]) * half
        }
    }))
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![T::one(); dim])
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * m.dim + i] = v;
        }
        m
    }

    /// Builds a matrix by evaluating `f(j, k)` for `j <= k` and mirroring.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for k in j..dim {
                let v = f(j, k);
                m.data[j * dim + k] = v;
                m.data[k * dim + j] = v;
            }
        }
        m
    }

    /// `v vᵀ`.
    pub fn outer(v: &[T]) -> Self {
        Self::from_fn(v.len(), |j, k| v[j] * v[k])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, k: usize) -> T {
        self.data[j * self.dim + k]
    }

    pub(crate) fn set_sym(&mut self, j: usize, k: usize, v: T) {
        self.data[j * self.dim + k] = v;
        self.data[k * self.dim + j] = v;
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.dim).map(|j| self.row(j).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, alpha: T) -> Self {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|&v| v * alpha).collect() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// `c v vᵀ + self`.
    pub fn rank_one_update(&self, c: T, v: &[T]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        Ok(Self::from_fn(self.dim, |j, k| self.get(j, k) + c * v[j] * v[k]))
    }

    /// Simultaneous row/column permutation: `out[j][k] = self[perm[j]][perm[k]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: perm.len() });
        }
        Ok(Self::from_fn(self.dim, |j, k| self.get(perm[j], perm[k])))
    }

    /// Largest absolute entry difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm computed from the entries.
    pub fn frobenius_entries(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn eigenvalues(&self) -> Result<Spectrum<T>> {
        let (values, _) = jacobi(self, false)?;
        Ok(Spectrum::from_unsorted(values))
    }

    /// Largest eigenvalue (not the largest absolute value).
    pub fn spectral_radius(&self) -> Result<T> {
        Ok(self.eigenvalues()?.largest())
    }

    pub fn norm(&self, kind: NormKind) -> Result<T> {
        Ok(self.eigenvalues()?.norm(kind))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }
}

impl<T> SymMatrix<T> {
    fn rows_iter(&self) -> std::slice::Chunks<'_, T> {
        self.data.chunks(self.dim.max(1))
    }
}

impl<T: fmt::Debug> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows_iter()).finish()
    }
}

impl<T: Serialize> Serialize for SymMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.rows_iter())
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for SymMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<T>>::deserialize(deserializer)?;
        make_sym(&rows, T::of(1e-9)).map_err(serde::de::Error::custom)
    }
}

impl<T: Scalar> Spectrum<T> {
    /// Sorts descending; ties keep their input order.
    pub fn from_unsorted(mut values: Vec<T>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        Spectrum { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn largest(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn smallest(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn norm(&self, kind: NormKind) -> T {
        match kind {
            NormKind::Spectral => self.values.iter().fold(T::zero(), |m, v| m.max(v.abs())),
            NormKind::Frobenius => self.values.iter().map(|&v| v * v).sum::<T>().sqrt(),
            NormKind::Nuclear => self.values.iter().map(|v| v.abs()).sum(),
        }
    }
}

/// Cyclic Jacobi rotations on a copy of `m`.
///
/// Returns unsorted eigenvalues and, when requested, the row-major matrix whose
/// column `i` is the unit eigenvector for eigenvalue `i`.
pub(crate) fn jacobi<T: Scalar>(m: &SymMatrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<Vec<T>>)> {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = if want_vectors { Some(SymMatrix::<T>::identity(n).data) } else { None };
    let scale = m.frobenius_entries();
    let tol = T::jacobi_tol() * scale;
    let two = T::of(2.0);

    let off_norm = |a: &[T]| -> T {
        let mut s = T::zero();
        for j in 0..n {
            for k in (j + 1)..n {
                s += a[j * n + k] * a[j * n + k];
            }
        }
        (two * s).sqrt()
    };

    let mut converged = scale == T::zero();
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        if off_norm(&a) <= tol {
            converged = true;
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (two * apq);
                let t = if theta.abs() > T::of(1e150) {
                    T::one() / (two * theta)
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > tol {
            return Err(Error::Convergence { sweeps, off_norm: off.as_f64() });
        }
    }
    Ok(((0..n).map(|i| a[i * n + i]).collect(), v))
}
