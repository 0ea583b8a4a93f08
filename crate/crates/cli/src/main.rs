use clap::{Args, Parser, Subcommand};
use polarization::decompose::{GroupCounterfactuals, GroupDecomposition, TraceConcentration, TraceCounterfactuals};
use polarization::estimate::{
    consistency_check, consistency_check_model, normality_check, pairwise_covariance, polarization_index,
    BootstrapResult, ConsistencyRow, NormalityReport, PolarizationIndex,
};
use polarization::latent::{strict_increase_check, LatentDist, LatentModel, MonotonicityReport};
use polarization::pipeline::{
    analyze_files, emit, ingest, make_fixture, run_analysis, AnalysisConfig, AnalysisReport, Baseline, BootstrapConfig,
    FixtureSpec, OutputFormat, QuestionPolicy, Topic,
};
use polarization::{Dataset, Error, Matrix, NormKind, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "polarization", version, about = "Spectral-radius polarization analysis of survey data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-bin polarization indices, optional group decompositions and counterfactual series.
    Analyze {
        #[command(flatten)]
        input: AnalysisArgs,
        /// Bootstrap replicates per bin; zero disables the bootstrap.
        #[arg(long, default_value_t = 0)]
        bootstrap_b: usize,
        #[arg(long, default_value_t = 0.95)]
        bootstrap_level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output files; the format follows the extension (.json, .csv, .svg).
        #[arg(long, required = true, num_args = 1..)]
        out: Vec<PathBuf>,
    },
    /// Decomposition of polarization levels and changes.
    #[command(subcommand)]
    Decompose(DecomposeCommand),
    /// Sampling from synthetic models.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Monte Carlo checks of estimator behaviour.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Percentile bootstrap intervals for the spectral radius of each bin.
    Bootstrap {
        #[command(flatten)]
        input: AnalysisArgs,
        #[arg(long, default_value_t = 1000)]
        b: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes a synthetic survey file and its schema.
    Fixture {
        /// JSON file with generator parameters; flags below override it.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        questions: Option<usize>,
        /// Comma-separated scale lengths, cycled over questions.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<usize>>,
        #[arg(long)]
        n_per_bin: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        start_year: Option<i32>,
        #[arg(long)]
        bin_width: Option<u32>,
        #[arg(long)]
        missingness: Option<f64>,
        #[arg(long)]
        groups: Option<usize>,
        #[arg(long)]
        group_var: Option<String>,
        #[arg(long)]
        a_start: Option<f64>,
        #[arg(long)]
        a_end: Option<f64>,
        #[arg(long)]
        group_shift_start: Option<f64>,
        #[arg(long)]
        group_shift_end: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum DecomposeCommand {
    /// Trace times spectral concentration, per bin and as counterfactual series.
    TraceConcentration {
        #[command(flatten)]
        input: AnalysisArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Within-group and between-group polarization, per bin and as counterfactual series.
    Groups {
        #[command(flatten)]
        input: AnalysisArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SimulateCommand {
    /// Draws from a one-factor latent model given as JSON.
    Latent {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional grid of latent variances for the strict-increase check.
        #[arg(long, value_delimiter = ',')]
        a_grid: Option<Vec<f64>>,
        /// Summary JSON.
        #[arg(long)]
        out: PathBuf,
        /// Raw draws as CSV.
        #[arg(long)]
        samples_out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Consistency and normal-theory variance of sample eigenvalues.
    Asymptotics {
        /// Diagonal of the population covariance, comma-separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "model")]
        sigma: Option<Vec<f64>>,
        /// Latent model JSON used instead of a Gaussian with `--sigma`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Overrides the latent distribution of `--model` or of the model built from `--sigma`.
        #[arg(long)]
        y_dist: Option<LatentDist>,
        #[arg(long, value_delimiter = ',', default_value = "100,400,1600,6400")]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Sample size of the normality check; omitted skips it.
        #[arg(long)]
        normal_n: Option<usize>,
        #[arg(long, default_value_t = 2000)]
        normal_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Input files and the analysis settings shared by data-driven commands.
#[derive(Args, Debug)]
struct AnalysisArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// JSON analysis config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Topic tag selecting questions.
    #[arg(long, conflicts_with = "questions")]
    topic: Option<String>,
    /// Explicit comma-separated question ids.
    #[arg(long, value_delimiter = ',')]
    questions: Option<Vec<String>>,
    #[arg(long)]
    bin_width_years: Option<u32>,
    #[arg(long)]
    norm: Option<NormKind>,
    #[arg(long)]
    question_policy: Option<QuestionPolicy>,
    #[arg(long)]
    group_var: Option<String>,
    #[arg(long)]
    min_cell: Option<usize>,
    /// `first` or a bin label such as `1990-1995`.
    #[arg(long)]
    baseline_bin: Option<Baseline>,
    #[arg(long)]
    weight_column: Option<String>,
    #[arg(long)]
    year_column: Option<String>,
    /// Cell values treated as missing, comma-separated.
    #[arg(long, value_delimiter = ',')]
    missing_values: Option<Vec<String>>,
}

impl AnalysisArgs {
    fn config(&self) -> Result<AnalysisConfig> {
        let mut c = match &self.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => AnalysisConfig::default(),
        };
        if let Some(t) = &self.topic {
            c.topic = Topic::Tag(t.clone());
        }
        if let Some(q) = &self.questions {
            c.topic = Topic::Questions(q.clone());
        }
        if let Some(w) = self.bin_width_years {
            c.bin_width_years = w;
        }
        if let Some(n) = self.norm {
            c.norm = n;
        }
        if let Some(p) = self.question_policy {
            c.question_policy = p;
        }
        if let Some(g) = &self.group_var {
            c.group_var = Some(g.clone());
        }
        if let Some(m) = self.min_cell {
            c.min_cell = m;
        }
        if let Some(b) = &self.baseline_bin {
            c.baseline_bin = b.clone();
        }
        if let Some(w) = &self.weight_column {
            c.weight_column = w.clone();
        }
        if let Some(y) = &self.year_column {
            c.year_column = y.clone();
        }
        if let Some(m) = &self.missing_values {
            c.missing_values = m.clone();
        }
        Ok(c)
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    match out {
        Some(path) => std::fs::write(path, s)?,
        None => print!("{s}"),
    }
    Ok(())
}

fn warn(report: &AnalysisReport) {
    if let Some(d) = &report.diagnostics {
        for w in &d.warnings {
            eprintln!("warning: {w}");
        }
    }
}

fn read_model(path: &Path) -> Result<LatentModel<f64>> {
    let model: LatentModel<f64> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    model.validate()?;
    Ok(model)
}

#[derive(Serialize)]
struct TraceOutput {
    bins: Vec<TraceBin>,
    counterfactuals: Option<TraceCounterfactuals<f64>>,
}

#[derive(Serialize)]
struct TraceBin {
    bin: String,
    #[serde(flatten)]
    parts: TraceConcentration<f64>,
}

#[derive(Serialize)]
struct GroupsOutput {
    bins: Vec<GroupBin>,
    counterfactuals: Option<GroupCounterfactuals<f64>>,
}

#[derive(Serialize)]
struct GroupBin {
    bin: String,
    decomposition: GroupDecomposition<f64>,
}

#[derive(Serialize)]
struct BootstrapBin {
    bin: String,
    n_respondents: usize,
    result: BootstrapResult<f64>,
}

#[derive(Serialize)]
struct SimulationSummary {
    model: LatentModel<f64>,
    n: usize,
    seed: u64,
    population_covariance: Matrix,
    population_rho: f64,
    sample_covariance: Matrix,
    sample_index: PolarizationIndex<f64>,
    strict_increase: Option<MonotonicityReport<f64>>,
}

#[derive(Serialize)]
struct AsymptoticsOutput {
    population_covariance: Matrix,
    y_dist: LatentDist,
    seed: u64,
    consistency: Vec<ConsistencyRow<f64>>,
    normality: Option<NormalityReport<f64>>,
}

fn write_samples(data: &Dataset, path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(data.questions()).map_err(io)?;
    for r in 0..data.n() {
        let row: Vec<String> = data.row(r).iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()).collect();
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { input, bootstrap_b, bootstrap_level, seed, out } => {
            let mut config = input.config()?;
            if bootstrap_b > 0 {
                config.bootstrap = Some(BootstrapConfig { b: bootstrap_b, level: bootstrap_level, seed });
            }
            let formats = out.iter().map(|p| OutputFormat::from_path(p)).collect::<Result<Vec<_>>>()?;
            let report = analyze_files(&input.data, &input.schema, &config)?;
            warn(&report);
            for (path, format) in out.iter().zip(formats) {
                emit(&report, format, path)?;
            }
        }
        Command::Decompose(DecomposeCommand::TraceConcentration { input, out }) => {
            let config = input.config()?;
            let report = analyze_files(&input.data, &input.schema, &config)?;
            warn(&report);
            let bins = report
                .bins
                .iter()
                .map(|b| TraceBin {
                    bin: b.bin_label.clone(),
                    parts: TraceConcentration { trace: b.index.trace, concentration: b.index.concentration, rho: b.index.rho },
                })
                .collect();
            write_json(&TraceOutput { bins, counterfactuals: report.trace_counterfactuals }, out.as_deref())?;
        }
        Command::Decompose(DecomposeCommand::Groups { input, out }) => {
            let config = input.config()?;
            if config.group_var.is_none() {
                return Err(Error::InvalidArgument("decompose groups needs --group-var".into()));
            }
            let report = analyze_files(&input.data, &input.schema, &config)?;
            warn(&report);
            let bins = report
                .bins
                .into_iter()
                .map(|b| GroupBin { bin: b.bin_label, decomposition: b.decomposition.expect("group variable set") })
                .collect();
            write_json(&GroupsOutput { bins, counterfactuals: report.group_counterfactuals }, out.as_deref())?;
        }
        Command::Simulate(SimulateCommand::Latent { model, n, seed, a_grid, out, samples_out }) => {
            let model = read_model(&model)?;
            let data = model.sample(n, seed)?;
            let cov = pairwise_covariance(&data)?;
            let population_covariance = model.population_covariance();
            let strict_increase = match &a_grid {
                Some(grid) => Some(strict_increase_check(&model, grid)?),
                None => None,
            };
            let summary = SimulationSummary {
                population_rho: population_covariance.spectral_radius()?,
                population_covariance,
                sample_index: polarization_index(&cov)?,
                sample_covariance: cov.sigma,
                model,
                n,
                seed,
                strict_increase,
            };
            write_json(&summary, Some(&out))?;
            if let Some(path) = samples_out {
                write_samples(&data, &path)?;
            }
        }
        Command::Verify(VerifyCommand::Asymptotics {
            sigma,
            model,
            y_dist,
            n_grid,
            trials,
            normal_n,
            normal_trials,
            seed,
            out,
        }) => {
            let mut model = match (sigma, model) {
                (_, Some(path)) => read_model(&path)?,
                (Some(diag), None) => LatentModel::gaussian(Matrix::diag(&diag))?,
                (None, None) => return Err(Error::InvalidArgument("verify asymptotics needs --sigma or --model".into())),
            };
            if let Some(y) = y_dist {
                model.y_dist = y;
            }
            let population_covariance = model.population_covariance();
            let consistency = if model.y_dist == LatentDist::Normal && model.e_dist == Default::default() {
                consistency_check(&population_covariance, &n_grid, trials, seed)?
            } else {
                consistency_check_model(&model, &n_grid, trials, seed)?
            };
            let normality = match normal_n {
                Some(n) => Some(normality_check(&population_covariance, n, normal_trials, seed)?),
                None => None,
            };
            let output = AsymptoticsOutput { population_covariance, y_dist: model.y_dist, seed, consistency, normality };
            write_json(&output, Some(&out))?;
        }
        Command::Bootstrap { input, b, level, seed, out } => {
            let mut config = input.config()?;
            config.bootstrap = Some(BootstrapConfig { b, level, seed });
            config.validate()?;
            let ingested = ingest(&input.data, &input.schema, &config)?;
            for w in &ingested.diagnostics.warnings {
                eprintln!("warning: {w}");
            }
            let report = run_analysis(&ingested.bins, &config)?;
            let bins: Vec<BootstrapBin> = report
                .bins
                .into_iter()
                .map(|r| BootstrapBin {
                    bin: r.bin_label,
                    n_respondents: r.n_respondents,
                    result: r.bootstrap.expect("bootstrap requested"),
                })
                .collect();
            write_json(&bins, Some(&out))?;
        }
        Command::Fixture {
            spec,
            questions,
            scales,
            n_per_bin,
            bins,
            start_year,
            bin_width,
            missingness,
            groups,
            group_var,
            a_start,
            a_end,
            group_shift_start,
            group_shift_end,
            seed,
            out_dir,
        } => {
            let mut s: FixtureSpec = match spec {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => FixtureSpec::default(),
            };
            macro_rules! set {
                ($($field:ident),*) => { $(if let Some(v) = $field { s.$field = v; })* };
            }
            set!(
                questions,
                scales,
                n_per_bin,
                bins,
                start_year,
                bin_width,
                missingness,
                groups,
                group_var,
                a_start,
                a_end,
                group_shift_start,
                group_shift_end
            );
            let paths = make_fixture(&s, seed, &out_dir)?;
            println!("{}\n{}", paths.data.display(), paths.schema.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
