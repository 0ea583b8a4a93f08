use super::config::{AnalysisConfig, QuestionPolicy, Topic};
use crate::encode::{encode_dataset, load_schemas, EncodeCounts, QuestionSchema, RawTable};
use crate::error::{Error, Result};
use crate::estimate::SurveyDataset;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

/// Respondents of one `[start, end)` year interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub label: String,
    pub start: i32,
    pub end: i32,
    pub data: SurveyDataset<f64>,
    /// Questions removed from this bin by the question policy.
    pub dropped_questions: Vec<String>,
}

impl Bin {
    pub fn new(start: i32, end: i32, data: SurveyDataset<f64>) -> Self {
        Bin { label: bin_label(start, end), start, end, data, dropped_questions: Vec::new() }
    }
}

pub fn bin_label(start: i32, end: i32) -> String {
    format!("{start}-{end}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowDrop {
    /// 1-based line in the input file.
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DroppedBin {
    pub label: String,
    pub respondents: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IngestDiagnostics {
    pub rows_read: usize,
    pub rows_binned: usize,
    pub row_drops: Vec<RowDrop>,
    pub dropped_bins: Vec<DroppedBin>,
    /// Questions dropped everywhere by the intersection policy.
    pub dropped_questions: Vec<String>,
    pub encode_counts: BTreeMap<String, EncodeCounts>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ingested {
    pub bins: Vec<Bin>,
    pub diagnostics: IngestDiagnostics,
}

pub fn ingest(data_path: &Path, schema_path: &Path, config: &AnalysisConfig) -> Result<Ingested> {
    let schemas = load_schemas(schema_path)?;
    let file = std::fs::File::open(data_path)?;
    ingest_reader(file, &schemas, config)
}

/// Selects the schemas named by the topic, in schema-file order.
pub fn select_schemas<'a>(schemas: &'a [QuestionSchema], topic: &Topic) -> Result<Vec<&'a QuestionSchema>> {
    let selected: Vec<&QuestionSchema> = match topic {
        Topic::All => schemas.iter().collect(),
        Topic::Tag(tag) => schemas.iter().filter(|s| s.topics.iter().any(|t| t == tag)).collect(),
        Topic::Questions(ids) => ids
            .iter()
            .map(|id| {
                schemas
                    .iter()
                    .find(|s| &s.question_id == id)
                    .ok_or_else(|| Error::SchemaMismatch(id.clone()))
            })
            .collect::<Result<_>>()?,
    };
    if selected.is_empty() {
        return Err(Error::InvalidArgument(format!("topic {topic:?} selects no questions")));
    }
    Ok(selected)
}

struct ParsedRow {
    line: u64,
    year: i32,
    weight: f64,
    label: Option<String>,
}

pub fn ingest_reader<R: Read>(reader: R, schemas: &[QuestionSchema], config: &AnalysisConfig) -> Result<Ingested> {
    config.validate()?;
    let selected = select_schemas(schemas, &config.topic)?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);

    let year_col = col(&config.year_column)
        .ok_or_else(|| Error::InvalidArgument(format!("data has no '{}' column", config.year_column)))?;
    let weight_col = col(&config.weight_column)
        .ok_or_else(|| Error::MissingWeight(format!("data has no '{}' column", config.weight_column)))?;
    let group_col = match &config.group_var {
        Some(g) => Some(col(g).ok_or_else(|| Error::UnknownGroupVariable(g.clone()))?),
        None => None,
    };
    let question_cols: Vec<usize> = selected
        .iter()
        .map(|s| col(&s.question_id).ok_or_else(|| Error::SchemaMismatch(s.question_id.clone())))
        .collect::<Result<_>>()?;

    let is_missing = |cell: &str| {
        let c = cell.trim();
        c.is_empty() || config.missing_values.iter().any(|m| m == c)
    };

    let mut rows = Vec::new();
    let mut table = RawTable { columns: selected.iter().map(|s| s.question_id.clone()).collect(), rows: Vec::new() };
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let year_cell = record.get(year_col).unwrap_or("").trim();
        let year: i32 = year_cell.parse().map_err(|_| Error::Parse {
            line,
            column: year_col + 1,
            message: format!("year '{year_cell}' is not an integer"),
        })?;
        let weight_cell = record.get(weight_col).unwrap_or("").trim();
        let weight = match weight_cell.parse::<f64>() {
            Ok(w) if w.is_finite() && w > 0.0 => w,
            _ => {
                return Err(Error::MissingWeight(format!(
                    "respondent on line {line} has invalid weight '{weight_cell}'"
                )))
            }
        };
        let label = group_col
            .and_then(|c| record.get(c))
            .filter(|l| !is_missing(l))
            .map(|l| l.trim().to_string());
        table.rows.push(
            question_cols
                .iter()
                .map(|&c| record.get(c).filter(|v| !is_missing(v)).map(str::to_string))
                .collect(),
        );
        rows.push(ParsedRow { line, year, weight, label });
    }
    let encoded = encode_dataset::<f64>(&selected.iter().map(|s| (*s).clone()).collect::<Vec<_>>(), &table)?;

    let mut diagnostics = IngestDiagnostics {
        rows_read: rows.len(),
        encode_counts: encoded.questions.iter().cloned().zip(encoded.counts.iter().cloned()).collect(),
        ..Default::default()
    };

    let width = config.bin_width_years as i32;
    let anchor = rows.iter().map(|r| r.year).min().map(|y| y.div_euclid(width) * width);
    let mut by_bin: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let anchor = anchor.expect("rows exist");
        let start = anchor + (r.year - anchor).div_euclid(width) * width;
        by_bin.entry(start).or_default().push(i);
    }

    let mut kept: Vec<(i32, Vec<usize>)> = Vec::new();
    for (start, members) in by_bin {
        let (responding, silent): (Vec<usize>, Vec<usize>) =
            members.iter().partition(|&&i| encoded.values[i].iter().any(Option::is_some));
        if responding.len() < 2 {
            let label = bin_label(start, start + width);
            diagnostics
                .warnings
                .push(format!("bin {label} has {} responding respondent(s); dropped", responding.len()));
            for &i in &members {
                diagnostics.row_drops.push(RowDrop { line: rows[i].line, reason: format!("bin {label} dropped") });
            }
            diagnostics.dropped_bins.push(DroppedBin { label, respondents: responding.len() });
        } else {
            for &i in &silent {
                diagnostics.row_drops.push(RowDrop { line: rows[i].line, reason: "no usable responses".into() });
            }
            kept.push((start, responding));
        }
    }

    let p = selected.len();
    let answered = |members: &[usize], j: usize| members.iter().filter(|&&i| encoded.values[i][j].is_some()).count();
    let global_keep: Vec<bool> = (0..p).map(|j| kept.iter().all(|(_, m)| answered(m, j) >= 2)).collect();
    if config.question_policy == QuestionPolicy::Intersection {
        diagnostics.dropped_questions =
            (0..p).filter(|&j| !global_keep[j]).map(|j| encoded.questions[j].clone()).collect();
        if !kept.is_empty() && global_keep.iter().all(|k| !k) {
            diagnostics.warnings.push("no question is answered in every bin".into());
        }
    }

    let group_vars: Vec<String> = config.group_var.iter().cloned().collect();
    let mut bins = Vec::new();
    for (start, members) in kept {
        let keep: Vec<usize> = match config.question_policy {
            QuestionPolicy::Intersection => (0..p).filter(|&j| global_keep[j]).collect(),
            QuestionPolicy::PerBin => (0..p).filter(|&j| answered(&members, j) >= 2).collect(),
        };
        let label = bin_label(start, start + width);
        if keep.is_empty() {
            diagnostics.warnings.push(format!("bin {label} has no usable questions; dropped"));
            for &i in &members {
                diagnostics.row_drops.push(RowDrop { line: rows[i].line, reason: format!("bin {label} dropped") });
            }
            diagnostics.dropped_bins.push(DroppedBin { label, respondents: members.len() });
            continue;
        }
        let mut data = SurveyDataset::with_group_vars(keep.iter().map(|&j| encoded.questions[j].clone()).collect(), group_vars.clone());
        for &i in &members {
            let vals: Vec<Option<f64>> = keep.iter().map(|&j| encoded.values[i][j]).collect();
            let labels: Vec<Option<&str>> = if group_vars.is_empty() { vec![] } else { vec![rows[i].label.as_deref()] };
            data.push_row(&vals, rows[i].weight, rows[i].year, &labels)?;
        }
        diagnostics.rows_binned += members.len();
        let dropped_questions = (0..p).filter(|j| !keep.contains(j)).map(|j| encoded.questions[j].clone()).collect();
        bins.push(Bin { label, start, end: start + width, data, dropped_questions });
    }
    diagnostics.row_drops.sort_by_key(|d| d.line);
    Ok(Ingested { bins, diagnostics })
}

fn csv_error(e: csv::Error) -> Error {
    let (line, column) = match e.position() {
        Some(p) => (p.line(), 0),
        None => (0, 0),
    };
    if let csv::ErrorKind::Io(_) = e.kind() {
        return Error::Io(std::io::Error::other(e.to_string()));
    }
    Error::Parse { line, column, message: e.to_string() }
}
