//! Trace x spectral-concentration and within/between-group decompositions of
//! the spectral radius, and the counterfactual series built from them.

mod groups;
mod trace;

pub use groups::{
    group_decompose, within_between_counterfactuals, within_between_counterfactuals_from, GroupCounterfactuals,
    GroupDecomposition, WithinBetweenPoint,
};
pub use trace::{
    trace_concentration, trace_concentration_change, trace_concentration_counterfactuals,
    trace_concentration_counterfactuals_from, TraceConcentration, TraceConcentrationChange, TraceCounterfactuals,
};

use crate::error::{Error, Result};

pub(crate) fn check_baseline(len: usize, baseline: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::EmptySeries);
    }
    if baseline >= len {
        return Err(Error::InvalidArgument(format!("baseline index {baseline} outside series of length {len}")));
    }
    Ok(())
}
