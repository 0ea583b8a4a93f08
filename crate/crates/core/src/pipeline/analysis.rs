use super::config::{AnalysisConfig, Baseline};
use super::ingest::{ingest, Bin, IngestDiagnostics};
use crate::decompose::{
    group_decompose, within_between_counterfactuals_from, GroupCounterfactuals, GroupDecomposition,
    TraceConcentration, TraceCounterfactuals,
};
use crate::error::{Error, Result};
use crate::estimate::{bootstrap_rho, pairwise_covariance, polarization_index, BootstrapResult, CovarianceEstimate, PolarizationIndex};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinResult {
    pub bin_label: String,
    pub start_year: i32,
    pub end_year: i32,
    pub n_respondents: usize,
    pub kish_n_eff: f64,
    pub questions: Vec<String>,
    /// Value of the configured norm.
    pub polarization: f64,
    pub index: PolarizationIndex<f64>,
    pub covariance: CovarianceEstimate<f64>,
    pub lambda_min: f64,
    pub insufficient_pairs: Vec<(String, String)>,
    pub dropped_questions: Vec<String>,
    pub decomposition: Option<GroupDecomposition<f64>>,
    pub bootstrap: Option<BootstrapResult<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub bins: Vec<BinResult>,
    pub trace_counterfactuals: Option<TraceCounterfactuals<f64>>,
    pub group_counterfactuals: Option<GroupCounterfactuals<f64>>,
    pub diagnostics: Option<IngestDiagnostics>,
}

/// Bootstrap stream seed for the `i`-th bin.
fn bin_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn analyze_bin(i: usize, bin: &Bin, config: &AnalysisConfig) -> Result<BinResult> {
    let covariance = pairwise_covariance(&bin.data)?;
    let index = polarization_index(&covariance)?;
    let decomposition = match &config.group_var {
        Some(var) => Some(group_decompose(&bin.data, var, config.min_cell)?),
        None => None,
    };
    let bootstrap = match config.bootstrap {
        Some(b) => Some(bootstrap_rho(&bin.data, b.b, b.level, bin_seed(b.seed, i))?),
        None => None,
    };
    let q = bin.data.questions();
    Ok(BinResult {
        bin_label: bin.label.clone(),
        start_year: bin.start,
        end_year: bin.end,
        n_respondents: bin.data.n(),
        kish_n_eff: covariance.kish_n_eff,
        questions: q.to_vec(),
        polarization: index.norm(config.norm),
        lambda_min: covariance.lambda_min,
        insufficient_pairs: covariance.insufficient.iter().map(|&(j, k)| (q[j].clone(), q[k].clone())).collect(),
        dropped_questions: bin.dropped_questions.clone(),
        index,
        covariance,
        decomposition,
        bootstrap,
    })
}

/// Per-bin estimates, optional group decompositions and bootstrap intervals,
/// and the counterfactual series once there are at least two bins.
pub fn run_analysis(bins: &[Bin], config: &AnalysisConfig) -> Result<AnalysisReport> {
    config.validate()?;
    if bins.windows(2).any(|w| w[1].start < w[0].end) {
        return Err(Error::InvalidArgument("bins must be disjoint and in ascending order".into()));
    }
    let results = bins
        .par_iter()
        .enumerate()
        .map(|(i, bin)| analyze_bin(i, bin, config).map_err(|e| e.in_bin(&bin.label)))
        .collect::<Result<Vec<_>>>()?;

    let (mut trace_counterfactuals, mut group_counterfactuals) = (None, None);
    if results.len() >= 2 {
        let baseline = match &config.baseline_bin {
            Baseline::First => 0,
            Baseline::Label(l) => results
                .iter()
                .position(|r| &r.bin_label == l)
                .ok_or_else(|| Error::InvalidArgument(format!("baseline bin '{l}' not in results")))?,
        };
        let parts: Vec<(String, TraceConcentration<f64>)> = results
            .iter()
            .map(|r| {
                let tc = TraceConcentration { trace: r.index.trace, concentration: r.index.concentration, rho: r.index.rho };
                (r.bin_label.clone(), tc)
            })
            .collect();
        trace_counterfactuals = Some(TraceCounterfactuals::from_parts(&parts, baseline)?);
        if config.group_var.is_some() {
            let points: Vec<_> = results
                .iter()
                .map(|r| r.decomposition.as_ref().expect("decomposed").point(&r.bin_label))
                .collect();
            group_counterfactuals = Some(within_between_counterfactuals_from(&points, baseline)?);
        }
    }
    Ok(AnalysisReport { config: config.clone(), bins: results, trace_counterfactuals, group_counterfactuals, diagnostics: None })
}

pub fn analyze_files(data_path: &Path, schema_path: &Path, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let ingested = ingest(data_path, schema_path, config)?;
    let mut report = run_analysis(&ingested.bins, config)?;
    report.diagnostics = Some(ingested.diagnostics);
    Ok(report)
}
