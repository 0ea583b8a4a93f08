use super::analysis::AnalysisReport;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
}

impl OutputFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| Error::InvalidArgument(format!("cannot infer output format of {}", path.display())))?
            .parse()
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::InvalidArgument(format!("unknown output format '{other}'"))),
        }
    }
}

pub const CSV_COLUMNS: &[&str] = &[
    "bin",
    "start_year",
    "end_year",
    "n_respondents",
    "kish_n_eff",
    "questions",
    "polarization",
    "rho",
    "trace",
    "concentration",
    "norm_spectral",
    "norm_frobenius",
    "norm_nuclear",
    "lambda_min",
    "rho_within",
    "rho_between",
    "slack_w",
    "slack_b",
    "dropped_weight_share",
    "boot_ci_low",
    "boot_ci_high",
    "boot_se",
    "cf_variance_only",
    "cf_concentration_only",
    "cf_within_only",
    "cf_between_only",
];

pub fn emit(report: &AnalysisReport, format: OutputFormat, out_path: &Path) -> Result<()> {
    let body = render(report, format)?;
    std::fs::write(out_path, body)?;
    Ok(())
}

pub fn render(report: &AnalysisReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => to_csv(report),
        OutputFormat::Svg => to_svg(report),
    }
}

pub fn to_json(report: &AnalysisReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per bin with flat columns; optional parts are left empty.
pub fn to_csv(report: &AnalysisReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    let trace = report.trace_counterfactuals.as_ref();
    let groups = report.group_counterfactuals.as_ref();
    for (t, b) in report.bins.iter().enumerate() {
        let d = b.decomposition.as_ref();
        let boot = b.bootstrap.as_ref();
        let record = vec![
            b.bin_label.clone(),
            b.start_year.to_string(),
            b.end_year.to_string(),
            b.n_respondents.to_string(),
            num(b.kish_n_eff),
            b.questions.len().to_string(),
            num(b.polarization),
            num(b.index.rho),
            num(b.index.trace),
            num(b.index.concentration),
            num(b.index.norm_spectral),
            num(b.index.norm_frobenius),
            num(b.index.norm_nuclear),
            num(b.lambda_min),
            opt(d.map(|d| d.rho_within)),
            opt(d.map(|d| d.rho_between)),
            opt(d.map(|d| d.slack_w)),
            opt(d.map(|d| d.slack_b)),
            opt(d.map(|d| d.dropped_weight_share)),
            opt(boot.map(|b| b.ci_low)),
            opt(boot.map(|b| b.ci_high)),
            opt(boot.map(|b| b.std_error())),
            opt(trace.map(|c| c.variance_only[t])),
            opt(trace.map(|c| c.concentration_only[t])),
            opt(groups.map(|c| c.within_only[t])),
            opt(groups.map(|c| c.between_only[t])),
        ];
        w.write_record(&record).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// Line chart of the observed series and whichever counterfactuals exist.
pub fn to_svg(report: &AnalysisReport) -> Result<String> {
    if report.bins.is_empty() {
        return Err(Error::InvalidArgument("cannot chart an empty result set".into()));
    }
    let labels: Vec<&str> = report.bins.iter().map(|b| b.bin_label.as_str()).collect();
    let mut series: Vec<(&str, &str, Vec<f64>)> =
        vec![("observed", "#000000", report.bins.iter().map(|b| b.index.rho).collect())];
    if let Some(c) = &report.trace_counterfactuals {
        series.push(("variance only", "#2a9d3c", c.variance_only.clone()));
        series.push(("concentration only", "#1f5fbf", c.concentration_only.clone()));
    }
    if let Some(c) = &report.group_counterfactuals {
        series.push(("within only", "#c0392b", c.within_only.clone()));
        series.push(("between only", "#8e44ad", c.between_only.clone()));
    }

    let all = series.iter().flat_map(|(_, _, v)| v.iter().copied());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let n = labels.len();
    let x = |i: usize| if n == 1 { LEFT + plot_w / 2.0 } else { LEFT + plot_w * i as f64 / (n - 1) as f64 };
    let y = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(s, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">Spectral radius by time bin</text>"#, LEFT + plot_w / 2.0);
    let _ = writeln!(
        s,
        r##"<path d="M{LEFT:.2},{TOP:.2} V{:.2} H{:.2}" fill="none" stroke="#444444"/>"##,
        TOP + plot_h,
        LEFT + plot_w
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            LEFT - 6.0,
            y(v) + 4.0
        );
    }
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x(i),
            TOP + plot_h + 18.0,
            escape(l)
        );
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time bin</text>"#, LEFT + plot_w / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">spectral radius</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (k, (name, color, values)) in series.iter().enumerate() {
        let points: Vec<String> = values.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        let ly = TOP + 16.0 * k as f64 + 8.0;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{name}</text>"#, lx + 26.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
