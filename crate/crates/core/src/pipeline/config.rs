use crate::error::{Error, Result};
use crate::symmat::NormKind;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Which questions enter the covariance matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Topic {
    /// Every question in the schema file.
    #[default]
    All,
    /// Questions carrying this topic tag.
    Tag(String),
    /// An explicit list of question ids.
    Questions(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuestionPolicy {
    /// Keep only questions answered (by two or more respondents) in every bin.
    #[default]
    Intersection,
    /// Choose the question set separately in each bin.
    PerBin,
}

impl FromStr for QuestionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(QuestionPolicy::Intersection),
            "per_bin" | "per-bin" => Ok(QuestionPolicy::PerBin),
            other => Err(Error::InvalidArgument(format!("unknown question policy '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    #[default]
    First,
    Label(String),
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(if s == "first" { Baseline::First } else { Baseline::Label(s.to_string()) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub b: usize,
    pub level: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub topic: Topic,
    pub bin_width_years: u32,
    pub norm: NormKind,
    pub question_policy: QuestionPolicy,
    pub group_var: Option<String>,
    pub min_cell: usize,
    pub baseline_bin: Baseline,
    pub weight_column: String,
    pub year_column: String,
    /// Cell values read as missing in addition to empty fields.
    pub missing_values: Vec<String>,
    pub bootstrap: Option<BootstrapConfig>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            topic: Topic::All,
            bin_width_years: 5,
            norm: NormKind::Spectral,
            question_policy: QuestionPolicy::Intersection,
            group_var: None,
            min_cell: 2,
            baseline_bin: Baseline::First,
            weight_column: "weight".into(),
            year_column: "year".into(),
            missing_values: vec!["NA".into()],
            bootstrap: None,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bin_width_years == 0 {
            return Err(Error::InvalidArgument("bin width must be at least one year".into()));
        }
        if let Some(b) = &self.bootstrap {
            if b.b == 0 || !(b.level > 0.0 && b.level < 1.0) {
                return Err(Error::InvalidArgument("bootstrap needs B >= 1 and a level in (0, 1)".into()));
            }
        }
        Ok(())
    }
}
