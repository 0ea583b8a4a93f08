//! Synthetic survey files shaped like a repeated cross-section, and
//! in-memory group-drift bins for attribution experiments.

use super::ingest::Bin;
use crate::encode::{Code, QuestionSchema};
use crate::error::{Error, Result};
use crate::estimate::SurveyDataset;
use crate::latent::LatentModel;
use crate::rng::stream_rng;
use crate::symmat::SymMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureSpec {
    pub questions: usize,
    /// Scale points per question, cycled when shorter than `questions`.
    pub scales: Vec<usize>,
    pub n_per_bin: usize,
    pub bins: usize,
    pub start_year: i32,
    pub bin_width: u32,
    pub missingness: f64,
    /// Number of groups; zero writes no group column.
    pub groups: usize,
    pub group_var: String,
    /// Latent variance in the first and last bin, linearly interpolated.
    pub a_start: f64,
    pub a_end: f64,
    /// Latent group offsets spread from `-shift` to `shift`.
    pub group_shift_start: f64,
    pub group_shift_end: f64,
    pub loading: f64,
    pub noise: f64,
    /// Weights are uniform on `[1 - spread, 1 + spread]`.
    pub weight_spread: f64,
    pub topic: String,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            questions: 6,
            scales: vec![2],
            n_per_bin: 2000,
            bins: 4,
            start_year: 1990,
            bin_width: 5,
            missingness: 0.2,
            groups: 0,
            group_var: "party".into(),
            a_start: 0.15,
            a_end: 0.15,
            group_shift_start: 0.0,
            group_shift_end: 0.0,
            loading: 0.8,
            noise: 0.15,
            weight_spread: 0.5,
            topic: "fixture".into(),
        }
    }
}

impl FixtureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("fixture: {m}")));
        if self.questions == 0 || self.bins == 0 || self.bin_width == 0 {
            return bad("questions, bins and bin_width must be positive");
        }
        if self.scales.is_empty() || self.scales.iter().any(|&k| k < 2) {
            return bad("every scale needs at least two points");
        }
        if !(0.0..=1.0).contains(&self.missingness) {
            return bad("missingness must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.weight_spread) {
            return bad("weight_spread must lie in [0, 1)");
        }
        if !(self.a_start > 0.0 && self.a_end > 0.0) || self.noise < 0.0 {
            return bad("latent variances must be positive and noise nonnegative");
        }
        Ok(())
    }

    fn scale(&self, j: usize) -> usize {
        self.scales[j % self.scales.len()]
    }

    fn question_id(j: usize) -> String {
        format!("q{}", j + 1)
    }

    fn lerp(&self, start: f64, end: f64, bin: usize) -> f64 {
        if self.bins == 1 {
            start
        } else {
            start + (end - start) * bin as f64 / (self.bins - 1) as f64
        }
    }

    /// Latent variance of bin `b`.
    pub fn a_at(&self, b: usize) -> f64 {
        self.lerp(self.a_start, self.a_end, b)
    }

    pub fn schemas(&self) -> Vec<QuestionSchema> {
        (0..self.questions)
            .map(|j| {
                let k = self.scale(j);
                QuestionSchema {
                    question_id: Self::question_id(j),
                    ordered_codes: (1..=k as i64).map(Code::from).collect(),
                    excluded_codes: vec![Code::from(9)],
                    topics: vec![self.topic.clone()],
                }
            })
            .collect()
    }
}

/// Snaps a continuous response onto the nearest of `k` scale points, returning the 1-based code.
fn discretize(x: f64, k: usize) -> usize {
    let t = (x.clamp(-1.0, 1.0) + 1.0) / 2.0 * (k - 1) as f64;
    t.round() as usize + 1
}

/// Renders `(data_csv, schema_json)` for a fixture.
pub fn render_fixture(spec: &FixtureSpec, seed: u64) -> Result<(String, String)> {
    spec.validate()?;
    let p = spec.questions;
    let beta: Vec<f64> = (0..p).map(|j| if j % 2 == 0 { spec.loading } else { -spec.loading }).collect();
    let mut header = vec!["id".to_string(), "year".into(), "weight".into()];
    if spec.groups > 0 {
        header.push(spec.group_var.clone());
    }
    header.extend((0..p).map(FixtureSpec::question_id));

    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(&header).map_err(io)?;
    let mut id = 0usize;
    let mut x = vec![0.0; p];
    for b in 0..spec.bins {
        let mut rng = stream_rng(seed, b as u64);
        let model = LatentModel::new(spec.a_at(b), beta.clone(), SymMatrix::identity(p).scaled(spec.noise * spec.noise))?;
        let sampler = model.sampler()?;
        let shift = spec.lerp(spec.group_shift_start, spec.group_shift_end, b);
        let bin_start = spec.start_year + (b as i32) * spec.bin_width as i32;
        for i in 0..spec.n_per_bin {
            id += 1;
            let year = bin_start + rng.random_range(0..spec.bin_width as i32);
            let weight = 1.0 + spec.weight_spread * rng.random_range(-1.0..=1.0);
            sampler.draw_one(&mut rng, &mut x);
            let mut record = vec![id.to_string(), year.to_string(), format!("{weight:.6}")];
            if spec.groups > 0 {
                let g = i % spec.groups;
                let offset = if spec.groups == 1 {
                    0.0
                } else {
                    shift * (2.0 * g as f64 / (spec.groups - 1) as f64 - 1.0)
                };
                for (xj, bj) in x.iter_mut().zip(&beta) {
                    *xj += bj * offset;
                }
                record.push(format!("g{}", g + 1));
            }
            for (j, &xj) in x.iter().enumerate() {
                if rng.random::<f64>() < spec.missingness {
                    record.push(String::new());
                } else {
                    record.push(discretize(xj, spec.scale(j)).to_string());
                }
            }
            w.write_record(&record).map_err(io)?;
        }
    }
    let data = String::from_utf8(w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?)
        .expect("csv output is utf-8");
    let mut schema = serde_json::to_string_pretty(&spec.schemas())?;
    schema.push('\n');
    Ok((data, schema))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixturePaths {
    pub data: PathBuf,
    pub schema: PathBuf,
}

/// Writes `fixture.csv` and `schema.json` into `out_dir`.
pub fn make_fixture(spec: &FixtureSpec, seed: u64, out_dir: &Path) -> Result<FixturePaths> {
    let (data, schema) = render_fixture(spec, seed)?;
    std::fs::create_dir_all(out_dir)?;
    let paths = FixturePaths { data: out_dir.join("fixture.csv"), schema: out_dir.join("schema.json") };
    std::fs::write(&paths.data, data)?;
    std::fs::write(&paths.schema, schema)?;
    Ok(paths)
}

/// One bin of a continuous, multi-group Gaussian population.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftBin {
    /// Mean vector of each group.
    pub means: Vec<Vec<f64>>,
    /// Covariance shared by every group in this bin.
    pub covariance: SymMatrix<f64>,
}

/// Draws `n_per_group` respondents per group and bin with unit weights;
/// groups are labelled `g1, g2, ...` under the variable `group`.
pub fn drift_bins(spec: &[DriftBin], n_per_group: usize, seed: u64) -> Result<Vec<Bin>> {
    spec.iter()
        .enumerate()
        .map(|(b, db)| {
            let p = db.covariance.dim();
            let sampler = LatentModel::gaussian(db.covariance.clone())?.sampler()?;
            let mut rng = stream_rng(seed, b as u64);
            let questions = (0..p).map(|j| format!("x{j}")).collect();
            let mut data = SurveyDataset::with_group_vars(questions, vec!["group".into()]);
            let year = 2000 + b as i32;
            let mut x = vec![0.0; p];
            for (g, mean) in db.means.iter().enumerate() {
                if mean.len() != p {
                    return Err(Error::DimensionMismatch { expected: p, got: mean.len() });
                }
                let label = format!("g{}", g + 1);
                for _ in 0..n_per_group {
                    sampler.draw_one(&mut rng, &mut x);
                    let row: Vec<Option<f64>> = x.iter().zip(mean).map(|(v, m)| Some(v + m)).collect();
                    data.push_row(&row, 1.0, year, &[Some(&label)])?;
                }
            }
            Ok(Bin::new(year, year + 1, data))
        })
        .collect()
}
