use super::check_baseline;
use crate::error::Result;
use crate::estimate::index_of_matrix;
use crate::scalar::Scalar;
use crate::symmat::SymMatrix;
use serde::Serialize;

/// `rho = trace * concentration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceConcentration<T> {
    pub trace: T,
    pub concentration: T,
    pub rho: T,
}

/// Ratios of period `t` to the baseline; `variance_only * concentration_only == observed`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceConcentrationChange<T> {
    pub ratio_observed: T,
    pub ratio_variance_only: T,
    pub ratio_concentration_only: T,
}

/// Observed spectral radius next to the series obtained by freezing either
/// spectral concentration (`variance_only`) or total variance
/// (`concentration_only`) at the baseline. The two multiply back to the
/// observed change.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceCounterfactuals<T> {
    pub bins: Vec<String>,
    pub baseline: usize,
    pub observed: Vec<T>,
    pub variance_only: Vec<T>,
    pub concentration_only: Vec<T>,
}

pub fn trace_concentration<T: Scalar>(sigma: &SymMatrix<T>) -> Result<TraceConcentration<T>> {
    let ix = index_of_matrix(sigma)?;
    Ok(TraceConcentration { trace: ix.trace, concentration: ix.concentration, rho: ix.rho })
}

impl<T: Scalar> TraceConcentration<T> {
    pub fn change_to(&self, later: &Self) -> TraceConcentrationChange<T> {
        TraceConcentrationChange {
            ratio_observed: later.rho / self.rho,
            ratio_variance_only: later.trace / self.trace,
            ratio_concentration_only: later.concentration / self.concentration,
        }
    }
}

pub fn trace_concentration_change<T: Scalar>(
    sigma0: &SymMatrix<T>,
    sigmat: &SymMatrix<T>,
) -> Result<TraceConcentrationChange<T>> {
    Ok(trace_concentration(sigma0)?.change_to(&trace_concentration(sigmat)?))
}

pub fn trace_concentration_counterfactuals<T: Scalar>(series: &[(String, SymMatrix<T>)]) -> Result<TraceCounterfactuals<T>> {
    trace_concentration_counterfactuals_from(series, 0)
}

pub fn trace_concentration_counterfactuals_from<T: Scalar>(
    series: &[(String, SymMatrix<T>)],
    baseline: usize,
) -> Result<TraceCounterfactuals<T>> {
    let parts = series
        .iter()
        .map(|(bin, s)| Ok((bin.clone(), trace_concentration(s)?)))
        .collect::<Result<Vec<_>>>()?;
    TraceCounterfactuals::from_parts(&parts, baseline)
}

impl<T: Scalar> TraceCounterfactuals<T> {
    pub fn from_parts(parts: &[(String, TraceConcentration<T>)], baseline: usize) -> Result<Self> {
        check_baseline(parts.len(), baseline)?;
        let base = parts[baseline].1;
        Ok(TraceCounterfactuals {
            bins: parts.iter().map(|(b, _)| b.clone()).collect(),
            baseline,
            observed: parts.iter().map(|(_, tc)| tc.rho).collect(),
            variance_only: parts.iter().map(|(_, tc)| tc.trace * base.concentration).collect(),
            concentration_only: parts.iter().map(|(_, tc)| base.trace * tc.concentration).collect(),
        })
    }

    /// Largest deviation from `(variance_only/obs0) * (concentration_only/obs0) == observed/obs0`.
    pub fn identity_error(&self) -> T {
        let o0 = self.observed[self.baseline];
        (0..self.observed.len()).fold(T::zero(), |acc, t| {
            let lhs = (self.variance_only[t] / o0) * (self.concentration_only[t] / o0);
            acc.max((lhs - self.observed[t] / o0).abs())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    /// tr 4, concentration 3/4, rho 3
    fn later() -> SymMatrix<f64> {
        SymMatrix::diag(&[3.0, 1.0])
    }

    #[test]
    fn trace_concentration_examples() {
        let tc = trace_concentration(&SymMatrix::diag(&[2.0, 1.0])).unwrap();
        assert_eq!((tc.trace, tc.rho), (3.0, 2.0));
        assert!(close(tc.concentration, 2.0 / 3.0));

        let tc = trace_concentration(&SymMatrix::from_fn(2, |_, _| 2.0 / 3.0)).unwrap();
        assert!(close(tc.trace, 4.0 / 3.0) && close(tc.concentration, 1.0) && close(tc.rho, 4.0 / 3.0));

        let tc = trace_concentration(&SymMatrix::<f64>::identity(3)).unwrap();
        assert!(close(tc.trace, 3.0) && close(tc.concentration, 1.0 / 3.0) && close(tc.rho, 1.0));
        assert!(close(tc.rho, tc.trace * tc.concentration));

        assert!(matches!(trace_concentration(&SymMatrix::<f64>::zeros(2)), Err(Error::ZeroVariance)));
    }

    #[test]
    fn change_examples() {
        let s0 = SymMatrix::diag(&[2.0, 1.0]);
        let c = trace_concentration_change(&s0, &later()).unwrap();
        assert!(close(c.ratio_observed, 1.5));
        assert!(close(c.ratio_variance_only, 4.0 / 3.0));
        assert!(close(c.ratio_concentration_only, 9.0 / 8.0));
        assert!(close(c.ratio_variance_only * c.ratio_concentration_only, c.ratio_observed));

        let c = trace_concentration_change(&s0, &s0).unwrap();
        assert_eq!((c.ratio_observed, c.ratio_variance_only, c.ratio_concentration_only), (1.0, 1.0, 1.0));

        let c = trace_concentration_change(&s0, &s0.scaled(2.0)).unwrap();
        assert!(close(c.ratio_observed, 2.0) && close(c.ratio_variance_only, 2.0) && close(c.ratio_concentration_only, 1.0));
    }

    #[test]
    fn counterfactual_examples() {
        let s0 = SymMatrix::diag(&[2.0, 1.0]);
        let cf = trace_concentration_counterfactuals(&[("a".into(), s0.clone()), ("b".into(), later())]).unwrap();
        assert!(close(cf.variance_only[1], 8.0 / 3.0));
        assert!(close(cf.concentration_only[1], 9.0 / 4.0));
        assert!(cf.identity_error() < 1e-12);

        let constant: Vec<_> = (0..3).map(|i| (i.to_string(), s0.clone())).collect();
        let cf = trace_concentration_counterfactuals(&constant).unwrap();
        for series in [&cf.observed, &cf.variance_only, &cf.concentration_only] {
            assert!(series.iter().all(|&v| close(v, 2.0)));
        }

        let scaled = vec![("0".into(), s0.clone()), ("1".into(), s0.scaled(3.0))];
        let cf = trace_concentration_counterfactuals(&scaled).unwrap();
        assert!(close(cf.concentration_only[1], 2.0));
        assert!(close(cf.variance_only[1], 6.0));
    }

    #[test]
    fn empty_and_baseline_errors() {
        assert!(matches!(trace_concentration_counterfactuals::<f64>(&[]), Err(Error::EmptySeries)));
        let s = vec![("a".into(), SymMatrix::diag(&[1.0]))];
        assert!(trace_concentration_counterfactuals_from(&s, 1).is_err());
    }
}
