use super::CovarianceEstimate;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symmat::{NormKind, Spectrum, SymMatrix};
use serde::Serialize;

/// Spectral-radius polarization index with its trace/concentration split and
/// the other two eigenvalue norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarizationIndex<T> {
    pub rho: T,
    pub trace: T,
    pub concentration: T,
    pub spectrum: Spectrum<T>,
    pub norm_spectral: T,
    pub norm_frobenius: T,
    pub norm_nuclear: T,
}

impl<T: Scalar> PolarizationIndex<T> {
    pub fn norm(&self, kind: NormKind) -> T {
        match kind {
            NormKind::Spectral => self.norm_spectral,
            NormKind::Frobenius => self.norm_frobenius,
            NormKind::Nuclear => self.norm_nuclear,
        }
    }

    pub fn lambda_min(&self) -> T {
        self.spectrum.smallest()
    }
}

pub fn polarization_index<T: Scalar>(cov: &CovarianceEstimate<T>) -> Result<PolarizationIndex<T>> {
    index_of_matrix(&cov.sigma)
}

/// Index of an arbitrary covariance matrix. Fails with `ZeroVariance` when the trace is not positive.
pub fn index_of_matrix<T: Scalar>(sigma: &SymMatrix<T>) -> Result<PolarizationIndex<T>> {
    let trace = sigma.trace();
    if !(trace > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    let spectrum = sigma.eigenvalues()?;
    let rho = spectrum.largest();
    Ok(PolarizationIndex {
        rho,
        trace,
        concentration: rho / trace,
        norm_spectral: spectrum.norm(NormKind::Spectral),
        norm_frobenius: spectrum.norm(NormKind::Frobenius),
        norm_nuclear: spectrum.norm(NormKind::Nuclear),
        spectrum,
    })
}
