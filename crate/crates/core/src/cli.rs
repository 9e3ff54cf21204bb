//! Command-line front end. Every numerical output depends only on the
//! arguments (the seed is mandatory), never on thread count or wall clock.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::{assemble_expectation, expected_linear_escape};
use crate::escape::{
    mean_escape_monte_carlo, mean_escape_quadrature, EscapeSettings, MeanEscapeEstimate, QuadratureSettings,
};
use crate::kp::{run_campaign, CampaignConfig, Generator};
use crate::optimize::{minimize, InitialGuess, NelderMeadOptions, ObjectiveSettings};
use crate::paths::UnitSpeedPath;
use crate::rng::RandomStream;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_BAD_INPUT: u8 = 2;
pub const EXIT_KP_VIOLATION: u8 = 3;

/// Worker cap read at startup.
pub const THREADS_ENV: &str = "ESCAPE_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "escape-lab", version, about = "Expected escape times of paths from the unit ball")]
pub struct Cli {
    /// Seed for every random stream of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate J for a path given as JSON.
    Evaluate(EvaluateArgs),
    /// Closed form, integral route and Monte Carlo for the line, n = 1..n_max.
    Table(TableArgs),
    /// Kneser–Poulsen campaign on random contraction pairs (JSON lines).
    Kp(KpArgs),
    /// Nelder–Mead over turn angles of planar chains.
    Optimize(OptimizeArgs),
    /// Monte Carlo escape time of a path in the unit n-ball.
    Mc(McArgs),
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Path specification file.
    pub path: PathBuf,
    #[arg(long, default_value_t = 0.005)]
    pub h: f64,
    #[arg(long, default_value_t = 16.0)]
    pub t_cap: f64,
    /// Also write the `t,area,cumulative_J` table here.
    #[arg(long)]
    pub area_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct KpArgs {
    #[arg(long, default_value_t = 1000)]
    pub size: usize,
    /// Largest number of balls per configuration.
    #[arg(long = "max-balls", short = 'N', default_value_t = 6)]
    pub max_balls: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value = "both")]
    pub generator: String,
    /// Samples per volume when the dimension is not 2.
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 500)]
    pub budget: usize,
    /// Number of seeded runs; run i starts from seed + i.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0.5)]
    pub segment_length: f64,
    /// Random starting angles are drawn from [-w, w].
    #[arg(long, default_value_t = 0.5)]
    pub init_width: f64,
    /// Start every run from the straight line instead.
    #[arg(long)]
    pub zero_init: bool,
    #[arg(long, default_value_t = 0.001)]
    pub h: f64,
    #[arg(long, default_value_t = 16.0)]
    pub t_cap: f64,
    /// Directory for the per-run trace CSVs.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Path specification file; defaults to the line along the first axis.
    #[arg(long)]
    pub path: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 16.0)]
    pub t_cap: f64,
}

#[derive(Debug)]
pub enum CliError {
    BadInput(String),
    Internal(String),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        Self::BadInput(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Internal(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(CliError::BadInput(msg)) => {
            eprintln!("error: {msg}");
            EXIT_BAD_INPUT
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::BadInput(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn execute(cli: &Cli) -> CliResult<u8> {
    let seed = cli
        .seed
        .ok_or_else(|| CliError::BadInput("--seed is required".into()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| {
        let mut out: Box<dyn Write> = match &cli.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        };
        let code = match &cli.command {
            Command::Evaluate(a) => evaluate(a, cli.format, &mut out)?,
            Command::Table(a) => table(a, seed, cli.format, &mut out)?,
            Command::Kp(a) => kp(a, seed, cli.format, &mut out)?,
            Command::Optimize(a) => optimize(a, seed, cli.format, &mut out)?,
            Command::Mc(a) => mc(a, seed, cli.format, &mut out)?,
        };
        out.flush()?;
        Ok(code)
    })
}

fn read_path(file: &Path) -> CliResult<UnitSpeedPath> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::BadInput(format!("{}: {e}", file.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("{}: {e}", file.display())))
}

fn csv_field(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn write_json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    value: f64,
    error_bound: f64,
    truncated: bool,
    method: &'a crate::escape::EstimateMethod,
}

fn write_estimate(est: &MeanEscapeEstimate, format: Format, out: &mut dyn Write) -> CliResult<()> {
    match format {
        Format::Json => write_json_line(
            out,
            &EstimateReport {
                value: est.value,
                error_bound: est.error_bound,
                truncated: est.truncated,
                method: &est.method,
            },
        ),
        Format::Csv => {
            let method = serde_json::to_value(est.method)?;
            writeln!(out, "value,error_bound,truncated,method")?;
            writeln!(
                out,
                "{},{},{},{}",
                est.value,
                est.error_bound,
                est.truncated,
                method.as_str().unwrap_or_default()
            )?;
            Ok(())
        }
    }
}

fn evaluate(a: &EvaluateArgs, format: Format, out: &mut dyn Write) -> CliResult<u8> {
    let path = read_path(&a.path)?;
    let settings = QuadratureSettings { h: a.h, t_cap: a.t_cap, ..QuadratureSettings::default() };
    let est = mean_escape_quadrature(&path, &settings)?;
    if let Some(csv) = &a.area_csv {
        est.write_area_csv(BufWriter::new(File::create(csv)?))?;
    }
    write_estimate(&est, format, out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TableRow {
    n: usize,
    closed_form: f64,
    integral_route: Option<f64>,
    monte_carlo: f64,
    std_error: f64,
}

fn table(a: &TableArgs, seed: u64, format: Format, out: &mut dyn Write) -> CliResult<u8> {
    if a.n_max == 0 {
        return Err(CliError::BadInput("--n-max must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(a.n_max);
    for n in 1..=a.n_max {
        let mc = mean_escape_monte_carlo(
            &UnitSpeedPath::axis_line(n),
            n,
            a.samples,
            RandomStream::new(seed, n as u64),
            &EscapeSettings::default(),
        )?;
        rows.push(TableRow {
            n,
            closed_form: expected_linear_escape(n),
            // the radial route needs n ≥ 2
            integral_route: assemble_expectation(n).ok(),
            monte_carlo: mc.value,
            std_error: mc.error_bound,
        });
    }
    match format {
        Format::Json => {
            for row in &rows {
                write_json_line(out, row)?;
            }
        }
        Format::Csv => {
            writeln!(out, "n,closed_form,integral_route,monte_carlo,std_error")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n,
                    r.closed_form,
                    csv_field(r.integral_route),
                    r.monte_carlo,
                    r.std_error
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn kp(a: &KpArgs, seed: u64, format: Format, out: &mut dyn Write) -> CliResult<u8> {
    if format == Format::Csv {
        return Err(CliError::BadInput("kp reports are JSON lines only".into()));
    }
    let generator: Generator = a.generator.parse()?;
    let cfg = CampaignConfig {
        size: a.size,
        max_balls: a.max_balls,
        dim: a.dim,
        generator,
        seed,
        samples: a.samples,
        ..CampaignConfig::default()
    };
    let records = run_campaign(&cfg)?;
    let mut violation = false;
    for r in &records {
        write_json_line(out, r)?;
        violation |= r.exact && !r.passed();
    }
    Ok(if violation { EXIT_KP_VIOLATION } else { EXIT_OK })
}

/// A run reaches the target if its best value is within this of the line.
pub const OPTIMIZE_TARGET_GAP: f64 = 1e-3;

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    best_value: f64,
    best_angles: Vec<f64>,
    evaluations: usize,
    converged: bool,
    reached: bool,
}

#[derive(Serialize)]
struct OptimizeSummary {
    runs: Vec<RunSummary>,
    target: f64,
    fraction_reached: f64,
}

fn optimize(a: &OptimizeArgs, seed: u64, format: Format, out: &mut dyn Write) -> CliResult<u8> {
    if a.k == 0 {
        return Err(CliError::BadInput("--k must be at least 1".into()));
    }
    let settings = ObjectiveSettings {
        quadrature: QuadratureSettings { h: a.h, t_cap: a.t_cap, ..QuadratureSettings::default() },
        ..ObjectiveSettings::default()
    };
    let traces = (0..a.seeds)
        .into_par_iter()
        .map(|i| {
            let run_seed = seed.wrapping_add(i);
            let init = if a.zero_init {
                InitialGuess::Zero
            } else {
                InitialGuess::Random { seed: run_seed, half_width: a.init_width }
            };
            minimize(a.k, a.segment_length, &init, a.budget, &settings, &NelderMeadOptions::default())
                .map(|t| (run_seed, t))
        })
        .collect::<crate::Result<Vec<_>>>()?;

    if let Some(dir) = &a.trace_dir {
        std::fs::create_dir_all(dir)?;
        for (run_seed, t) in &traces {
            t.write_csv(BufWriter::new(File::create(dir.join(format!("trace_{run_seed}.csv")))?))?;
        }
    }

    let target = expected_linear_escape(2) + OPTIMIZE_TARGET_GAP;
    let runs: Vec<RunSummary> = traces
        .into_iter()
        .map(|(run_seed, t)| RunSummary {
            seed: run_seed,
            reached: t.best_value <= target,
            best_value: t.best_value,
            best_angles: t.best.angles,
            evaluations: t.evaluations,
            converged: t.converged,
        })
        .collect();
    let reached = runs.iter().filter(|r| r.reached).count();
    let fraction_reached = if runs.is_empty() { 0.0 } else { reached as f64 / runs.len() as f64 };
    let summary = OptimizeSummary { runs, target, fraction_reached };
    match format {
        Format::Json => write_json_line(out, &summary)?,
        Format::Csv => {
            let angles: Vec<String> = (0..a.k).map(|i| format!("angle_{i}")).collect();
            writeln!(out, "seed,best_value,evaluations,converged,reached,{}", angles.join(","))?;
            for r in &summary.runs {
                let angles: Vec<String> = r.best_angles.iter().map(|x| x.to_string()).collect();
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.seed,
                    r.best_value,
                    r.evaluations,
                    r.converged,
                    r.reached,
                    angles.join(",")
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn mc(a: &McArgs, seed: u64, format: Format, out: &mut dyn Write) -> CliResult<u8> {
    let path = match &a.path {
        Some(p) => read_path(p)?,
        None if a.dim >= 1 => UnitSpeedPath::axis_line(a.dim),
        None => return Err(CliError::BadInput("--dim must be at least 1".into())),
    };
    let settings = EscapeSettings { t_cap: a.t_cap, ..EscapeSettings::default() };
    let est = mean_escape_monte_carlo(&path, a.dim, a.samples, RandomStream::new(seed, 0), &settings)?;
    write_estimate(&est, format, out)?;
    Ok(EXIT_OK)
}
