//! `maxspec`: tail-exponent estimation from the command line.

mod failure;
mod ingest;
mod report;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maxspec::experiments::{run_coverage, run_selection_study, CoverageSpec, SelectionStudySpec};
use maxspec::rng::entropy_seed;
use maxspec::{
    asymptotic_ci, estimate, gen_series, hill_plot, montecarlo_ci, select_j1, sigma1_matrix,
    AutoSelectConfig, CovarianceMode, CovarianceModel, Execution, Innovation, MaxSpectrum,
    McCiConfig, Method, Model, ModelConfig, ScaleRange, StreamState,
};

use crate::failure::{CliResult, Failure};
use crate::ingest::{IngestArgs, SIMULATE_HEADER};
use crate::report::{RangeInfo, Report, SelectionInfo, SCHEMA};

#[derive(Parser)]
#[command(
    name = "maxspec",
    version,
    about = "Heavy-tail exponent estimation with the max-spectrum"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate α with a confidence interval.
    Estimate(EstimateArgs),
    /// Print the max-spectrum as CSV (j, n_j, y).
    Spectrum(SpectrumArgs),
    /// Print the Hill plot as CSV (k, alpha).
    Hill(HillArgs),
    /// Generate a synthetic series.
    Simulate(SimulateArgs),
    /// Run a confidence-interval coverage experiment from a TOML config.
    Coverage(CoverageArgs),
    /// Run the automatic j1 selection study.
    SelectStudy(SelectStudyArgs),
    /// Compute the Σ₁ covariance table.
    Sigma1(Sigma1Args),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Ols,
    Wls,
    Gls,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ols => Method::Ols,
            MethodArg::Wls => Method::Wls,
            MethodArg::Gls => Method::Gls,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CiArg {
    Asymptotic,
    Montecarlo,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy)]
enum RangeArg {
    Auto,
    Fixed(u32, u32),
}

fn parse_range(s: &str) -> Result<RangeArg, String> {
    if s == "auto" {
        return Ok(RangeArg::Auto);
    }
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `auto` or `J1:J2`, got `{s}`"))?;
    let j1 = a.trim().parse().map_err(|_| format!("bad j1 `{a}`"))?;
    let j2 = b.trim().parse().map_err(|_| format!("bad j2 `{b}`"))?;
    Ok(RangeArg::Fixed(j1, j2))
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    ingest: IngestArgs,
    /// `auto` or an explicit `J1:J2`.
    #[arg(long, default_value = "auto", value_parser = parse_range)]
    range: RangeArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Wls)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = CiArg::Asymptotic)]
    ci: CiArg,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Significance level of the automatic range selection.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Back-start of the automatic range selection.
    #[arg(long, default_value_t = 3)]
    b: u32,
    /// Upper scale for automatic selection (default: largest available).
    #[arg(long)]
    j2: Option<u32>,
    /// Simulated paths for the Monte-Carlo interval.
    #[arg(long, default_value_t = 1000)]
    mc_reps: usize,
    /// Seed for the Monte-Carlo interval; drawn from entropy and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Compute the spectrum in O(log n) memory while reading.
    #[arg(long)]
    stream: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    ingest: IngestArgs,
    /// Compute the spectrum in O(log n) memory while reading.
    #[arg(long)]
    stream: bool,
}

#[derive(Args)]
struct HillArgs {
    #[command(flatten)]
    ingest: IngestArgs,
    /// Largest k (default: min(n - 1, n / 10)).
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModelArg {
    IidPareto,
    IidFrechet,
    Ar1Pareto,
    MaxAr1Frechet,
    MovingMaxima,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InnovationArg {
    Frechet,
    Pareto,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    alpha: f64,
    /// AR coefficient (ar1_pareto, max_ar1_frechet).
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Comma-separated moving-maxima coefficients.
    #[arg(long, value_delimiter = ',')]
    coefficients: Vec<f64>,
    #[arg(long, value_enum, default_value_t = InnovationArg::Frechet)]
    innovation: InnovationArg,
    #[arg(short, long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: standard output).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Override the replicate count.
    #[arg(long)]
    reps: Option<usize>,
    /// Override the seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run replicates on one thread.
    #[arg(long)]
    sequential: bool,
    /// Write coverage.csv, coverage_se.csv and coverage_cells.csv here instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SelectStudyArgs {
    /// TOML study description; replaces the model and selection flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    /// Max-AR(1) coefficient.
    #[arg(long, default_value_t = 0.9)]
    phi: f64,
    #[arg(short, long, default_value_t = 1 << 15)]
    n: usize,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, default_value_t = 4)]
    b: u32,
    #[arg(long, value_enum, default_value_t = MethodArg::Gls)]
    method: MethodArg,
    /// Replicates (default 500, or the config's value).
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run replicates on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sigma1ModeArg {
    Quadrature,
    Montecarlo,
}

#[derive(Args)]
struct Sigma1Args {
    #[arg(long, default_value_t = 15)]
    ell: usize,
    #[arg(long, value_enum, default_value_t = Sigma1ModeArg::Quadrature)]
    mode: Sigma1ModeArg,
    #[arg(long, default_value_t = 10_000_000)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Hill(a) => cmd_hill(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Coverage(a) => cmd_coverage(a),
        Command::SelectStudy(a) => cmd_select_study(a),
        Command::Sigma1(a) => cmd_sigma1(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if is_broken_pipe(&f) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("maxspec: {f}");
            f.exit_code()
        }
    }
}

fn is_broken_pipe(f: &Failure) -> bool {
    f.error
        .downcast_ref::<io::Error>()
        .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = entropy_seed();
        eprintln!("seed: {s}");
        s
    })
}

fn emit(text: &str) -> CliResult {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn read_spectrum(
    ingest: &IngestArgs,
    stream: bool,
) -> CliResult<(MaxSpectrum, ingest::IngestSummary)> {
    if stream {
        let mut state = StreamState::new();
        let summary = ingest.read(|v| state.update(v).map_err(Failure::from))?;
        Ok((state.finalize()?, summary))
    } else {
        let (values, summary) = ingest.read_all()?;
        Ok((MaxSpectrum::from_series(&values)?, summary))
    }
}

fn cmd_estimate(a: EstimateArgs) -> CliResult {
    let (spectrum, input) = read_spectrum(&a.ingest, a.stream)?;
    let method = Method::from(a.method);
    let (est, selection) = match a.range {
        RangeArg::Fixed(j1, j2) => {
            let cov = CovarianceModel::default_for(j2 as usize)?;
            (
                estimate(&spectrum, ScaleRange::new(j1, j2)?, method, &cov)?,
                None,
            )
        }
        RangeArg::Auto => {
            let cfg = AutoSelectConfig {
                p: a.p,
                b: a.b,
                j2: a.j2,
                method,
            };
            let cov = CovarianceModel::default_for(
                a.j2.unwrap_or(spectrum.scale_count()).max(2) as usize
            )?;
            let sel = select_j1(&spectrum, &cfg, &cov)?;
            let info = SelectionInfo {
                p: a.p,
                b: a.b,
                alternative_j1: sel.alternative_j1,
                trace: sel.trace,
            };
            (sel.estimate, Some(info))
        }
    };
    let mut seed = None;
    let ci = match a.ci {
        CiArg::None => None,
        CiArg::Asymptotic => Some(asymptotic_ci(&est, a.level)?),
        CiArg::Montecarlo => {
            let s = resolve_seed(a.seed);
            seed = Some(s);
            let cfg = McCiConfig {
                reps: a.mc_reps,
                ..McCiConfig::new(a.level, s)
            };
            Some(montecarlo_ci(&est, &cfg)?)
        }
    };
    let report = Report {
        schema: SCHEMA,
        input,
        n: spectrum.total_count(),
        spectrum: spectrum.scales().to_vec(),
        range: RangeInfo {
            j1: est.range.j1(),
            j2: est.range.j2(),
            auto: matches!(a.range, RangeArg::Auto),
        },
        selection,
        method,
        h: est.h,
        alpha: est.alpha,
        c_w: est.c_w,
        n_eff: est.n_eff,
        weights: est.weights.as_slice().to_vec(),
        ci,
        seed,
    };
    emit(&match a.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    })
}

fn cmd_spectrum(a: SpectrumArgs) -> CliResult {
    let (spectrum, _) = read_spectrum(&a.ingest, a.stream)?;
    let mut out = String::from("j,n_j,y\n");
    for s in spectrum.scales() {
        out.push_str(&format!("{},{},{}\n", s.j, s.block_count, s.y));
    }
    emit(&out)
}

fn cmd_hill(a: HillArgs) -> CliResult {
    let (values, _) = a.ingest.read_all()?;
    let n = values.len();
    let k_max = a.k_max.unwrap_or_else(|| (n - 1).min(n / 10).max(1));
    let plot = hill_plot(&values, k_max)?;
    let mut out = String::from("k,alpha\n");
    for p in &plot.points {
        out.push_str(&format!("{},{}\n", p.k, p.alpha));
    }
    emit(&out)
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    let model = match a.model {
        ModelArg::IidPareto => Model::IidPareto { alpha: a.alpha },
        ModelArg::IidFrechet => Model::IidFrechet { alpha: a.alpha },
        ModelArg::Ar1Pareto => Model::Ar1Pareto {
            alpha: a.alpha,
            phi: a.phi,
        },
        ModelArg::MaxAr1Frechet => Model::MaxAr1Frechet {
            alpha: a.alpha,
            phi: a.phi,
        },
        ModelArg::MovingMaxima => Model::MovingMaxima {
            alpha: a.alpha,
            coefficients: a.coefficients.clone(),
            innovation: match a.innovation {
                InnovationArg::Frechet => Innovation::Frechet,
                InnovationArg::Pareto => Innovation::Pareto,
            },
        },
    };
    let cfg = ModelConfig::new(model, a.n, resolve_seed(a.seed));
    let series = gen_series(&cfg)?;
    let header = serde_json::to_string(&cfg).expect("model config is always serializable");

    let sink: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(
            fs::File::create(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    writeln!(w, "{SIMULATE_HEADER} {header}")?;
    for v in series {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn cmd_coverage(a: CoverageArgs) -> CliResult {
    let mut spec: CoverageSpec = read_toml(&a.config)?;
    if let Some(r) = a.reps {
        spec.reps = r;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if a.sequential {
        spec.exec = Execution::Sequential;
    }
    let result = run_coverage(&spec)?;
    match a.out_dir {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("coverage.csv"), result.coverage_table())?;
            fs::write(dir.join("coverage_se.csv"), result.std_error_table())?;
            fs::write(dir.join("coverage_cells.csv"), result.long_table())?;
            Ok(())
        }
        None => emit(&format!(
            "# coverage ({} reps, seed {}, {} interval, {})\n{}\n# standard error\n{}",
            result.reps,
            result.seed,
            result.ci,
            result.method,
            result.coverage_table(),
            result.std_error_table()
        )),
    }
}

fn cmd_select_study(a: SelectStudyArgs) -> CliResult {
    let mut spec = match &a.config {
        Some(path) => read_toml::<SelectionStudySpec>(path)?,
        None => SelectionStudySpec {
            model: Model::MaxAr1Frechet {
                alpha: a.alpha,
                phi: a.phi,
            },
            n: a.n,
            auto: AutoSelectConfig {
                p: a.p,
                b: a.b,
                j2: None,
                method: a.method.into(),
            },
            reps: 500,
            seed: resolve_seed(a.seed),
            exec: Execution::Parallel,
        },
    };
    if let Some(r) = a.reps {
        spec.reps = r;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if a.sequential {
        spec.exec = Execution::Sequential;
    }
    let s = run_selection_study(&spec)?;
    let mut out = format!(
        "# reps {}, modal j1 {} ({:.1}%), degenerate {}, mean alpha {:.4}, rmse argmin {}\n",
        s.reps,
        s.modal_j1,
        100.0 * s.modal_share,
        s.degenerate,
        s.alpha_mean,
        s.rmse.argmin
    );
    out.push_str("# selected j1\nj1,count\n");
    for (j1, c) in &s.j1_histogram {
        out.push_str(&format!("{j1},{c}\n"));
    }
    out.push_str("\n# alpha estimates\nlower,upper,count\n");
    for b in &s.alpha_histogram {
        out.push_str(&format!("{:.2},{:.2},{}\n", b.lower, b.upper, b.count));
    }
    out.push_str("\n# root mean squared error of H\nj1,rmse\n");
    for p in &s.rmse.points {
        out.push_str(&format!("{},{:.6}\n", p.j1, p.rmse));
    }
    emit(&out)
}

fn cmd_sigma1(a: Sigma1Args) -> CliResult {
    let mode = match a.mode {
        Sigma1ModeArg::Quadrature => CovarianceMode::Quadrature,
        Sigma1ModeArg::Montecarlo => CovarianceMode::MonteCarlo {
            samples: a.samples,
            seed: resolve_seed(a.seed),
        },
    };
    let model = sigma1_matrix(a.ell, mode)?;
    model.validate()?;
    emit(&model.to_table())
}
