//! The `kspm` command line: argument parsing, command execution and output
//! serialization.
//!
//! JSON documents have the shape `{"meta": {...}, "result": {...}}`. Exit
//! codes: 0 pass, 2 argument error, 3 overflow or capacity, 4 spectral check
//! failure, 5 invariant violation.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::{
    self, climbing_zero_check, log_fit, max_plateau, parse_waves, regression_gate, AnalyzerError,
    ClimbingZeroReport, FitField, Grammar, LogFit, RegressionGate, ScanConfig, ScanRow,
};
use crate::dds::{reconstruct_fixed_point, DdsError, GroundTruth};
use crate::model::{ModelError, Params, SlopeConfig};
use crate::spectral::{self, LogBound, SpectralError, SpectralReport, SpectralTolerances};
use crate::stabilizer::{
    leftmost_avalanche, stabilize, stabilize_incremental, FixedPoint, Strategy, RANDOM_ALGORITHM,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;
pub const EXIT_SPECTRAL: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

const SCAN_HELP: &str = "\
CSV columns (one header row):
  N,p,w,n_strict,n_loose,uniform_index,interior_zeros,density_column,ambiguous_count,elapsed_us
uniform_index is empty if no uniform vector appears; density_column is empty
outside --incremental; elapsed_us is 0 unless --timings is given.
In CSV mode the fit summary goes to stderr.";

/// Kadanoff sandpile fixed points: simulation, shot-vector dynamics and
/// wave-pattern verification.
#[derive(Parser, Debug, Clone)]
#[command(name = "kspm", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,

    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyArg {
    Leftmost,
    Random,
    Incremental,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Stabilize N grains stacked on column 0
    Stabilize {
        #[arg(long)]
        p: u32,
        /// Number of grains
        #[arg(long = "n")]
        n: u64,
        #[arg(long, value_enum, default_value = "leftmost")]
        strategy: StrategyArg,
        /// Seed for the random strategy
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep N = stride, 2·stride, … up to n-max
    #[command(after_help = SCAN_HELP)]
    Scan {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Build fixed points one grain at a time and record L(p,N)
        #[arg(long)]
        incremental: bool,
        /// Write (series,x,y) rows for n_strict vs log2 N and w vs √N
        #[arg(long, value_name = "PATH")]
        emit_plot_data: Option<PathBuf>,
        /// Worker threads for direct scans (0 = all cores)
        #[arg(long, env = "KSPM_THREADS", default_value_t = 0)]
        threads: usize,
        /// Record wall-clock time per row
        #[arg(long)]
        timings: bool,
    },
    /// Exact and numeric spectral checks for every 2 <= p <= p-max
    Spectral {
        #[arg(long)]
        p_max: u32,
        /// Tolerance on the root modulus bound
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// The avalanche from π(k-1) to π(k)
    Avalanche {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        k: u64,
    },
    /// Cross-check all computations of one fixed point
    Verify {
        #[arg(long)]
        p: u32,
        #[arg(long = "n")]
        n: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("capacity exceeded: {0}")]
    Overflow(String),
    #[error("spectral computation failed: {0}")]
    Spectral(#[from] SpectralError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Argument(_) => EXIT_USAGE,
            CliError::Overflow(_) => EXIT_OVERFLOW,
            CliError::Spectral(_) => EXIT_SPECTRAL,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParameter => CliError::Argument(e.to_string()),
            ModelError::Overflow | ModelError::TooManyGrains(_) => CliError::Overflow(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<DdsError> for CliError {
    fn from(e: DdsError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<AnalyzerError> for CliError {
    fn from(e: AnalyzerError) -> Self {
        match e {
            AnalyzerError::EmptySelection { .. } | AnalyzerError::ZeroStride => CliError::Argument(e.to_string()),
            AnalyzerError::InsufficientData { .. } => CliError::Argument(e.to_string()),
            AnalyzerError::Model(m) => m.into(),
            AnalyzerError::Dds(d) => d.into(),
        }
    }
}

/// Validated echo of the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Stabilize { p: Params, n: u64, strategy: Strategy },
    Scan { p: Params, n_max: u64, stride: u64, incremental: bool, threads: usize, timings: bool },
    Spectral { p_max: u32, tolerances: SpectralTolerances },
    Avalanche { p: Params, k: u64 },
    Verify { p: Params, n: u64 },
}

impl RunConfig {
    pub fn from_command(cmd: &Command) -> Result<Self, CliError> {
        Ok(match *cmd {
            Command::Stabilize { p, n, strategy, seed } => RunConfig::Stabilize {
                p: Params::new(p)?,
                n,
                strategy: match strategy {
                    StrategyArg::Leftmost => Strategy::Leftmost,
                    StrategyArg::Random => Strategy::Random { seed },
                    StrategyArg::Incremental => Strategy::Incremental,
                },
            },
            Command::Scan { p, n_max, stride, incremental, threads, timings, .. } => {
                if n_max < 1 {
                    return Err(CliError::Argument("n-max must be at least 1".into()));
                }
                if stride < 1 {
                    return Err(CliError::Argument("stride must be at least 1".into()));
                }
                if stride > n_max {
                    return Err(CliError::Argument(format!("stride {stride} selects no N <= {n_max}")));
                }
                RunConfig::Scan { p: Params::new(p)?, n_max, stride, incremental, threads, timings }
            }
            Command::Spectral { p_max, tol } => {
                if p_max < 2 {
                    return Err(CliError::Argument("p-max must be at least 2".into()));
                }
                if !(tol.is_finite() && tol > 0.0) {
                    return Err(CliError::Argument(format!("tolerance must be positive and finite, got {tol}")));
                }
                RunConfig::Spectral {
                    p_max,
                    tolerances: SpectralTolerances { modulus: tol, ..SpectralTolerances::default() },
                }
            }
            Command::Avalanche { p, k } => {
                if k < 1 {
                    return Err(CliError::Argument("k must be at least 1".into()));
                }
                RunConfig::Avalanche { p: Params::new(p)?, k }
            }
            Command::Verify { p, n } => RunConfig::Verify { p: Params::new(p)?, n },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Stabilize { .. } => "stabilize",
            RunConfig::Scan { .. } => "scan",
            RunConfig::Spectral { .. } => "spectral",
            RunConfig::Avalanche { .. } => "avalanche",
            RunConfig::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    /// Present when the random strategy is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub meta: Meta,
    pub result: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizeOutput {
    #[serde(flatten)]
    pub fixed_point: FixedPoint,
    pub heights: Vec<i64>,
    pub w: usize,
    pub n_strict: usize,
    pub n_loose: usize,
    pub uniform_index: Option<usize>,
    pub interior_zeros: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub field: FitField,
    pub fit: Option<LogFit>,
    /// Why no fit was produced.
    pub skipped: Option<String>,
    pub gate: Option<RegressionGate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutput {
    pub rows: Vec<ScanRow>,
    pub fits: Vec<FitSummary>,
    pub repeated_firings: Option<usize>,
    pub all_invariants_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralOutput {
    pub reports: Vec<SpectralReport>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvalancheOutput {
    pub k: u64,
    pub before: SlopeConfig,
    pub after: SlopeConfig,
    /// Columns in firing order.
    pub order: Vec<usize>,
    /// Fired columns, sorted.
    pub fired: Vec<usize>,
    pub density_column: usize,
    pub holes: Vec<usize>,
    pub max_fired: Option<usize>,
    pub climbing_zero: ClimbingZeroReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub p: u32,
    pub n: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kspm: {e}");
            e.exit_code()
        }
    }
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Runs a parsed command line, writing its output; returns the exit code
/// for a completed run (non-zero when a check failed).
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let config = RunConfig::from_command(&cli.command)?;
    let mut out = open_output(cli.output.as_deref())?;
    let code = execute(&cli.command, &config, cli.format, &mut out)?;
    out.flush()?;
    Ok(code)
}

fn meta(config: &RunConfig) -> Meta {
    let rng = match config {
        RunConfig::Stabilize { strategy: Strategy::Random { .. }, .. } => Some(RANDOM_ALGORITHM.to_string()),
        _ => None,
    };
    Meta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.name().to_string(),
        config: config.clone(),
        rng,
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, config: &RunConfig, result: &T) -> Result<(), CliError> {
    let doc = Document { meta: meta(config), result };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Executes a validated command, writing to `out`.
pub fn execute(cmd: &Command, config: &RunConfig, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    match config {
        RunConfig::Stabilize { p, n, strategy } => {
            let result = cmd_stabilize(*p, *n, *strategy)?;
            match format {
                Format::Json => write_json(out, config, &result)?,
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["i", "slope", "height", "shot"])?;
                    let fp = &result.fixed_point;
                    let len = fp.slopes.support().max(fp.shot.len());
                    for i in 0..len {
                        w.write_record([
                            i.to_string(),
                            fp.slopes.get(i).to_string(),
                            result.heights.get(i).copied().unwrap_or(0).to_string(),
                            fp.shot_at(i as i64).to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
            Ok(EXIT_OK)
        }
        RunConfig::Scan { p, n_max, stride, incremental, threads, timings } => {
            let scan_config =
                ScanConfig { p: *p, n_max: *n_max, stride: *stride, incremental: *incremental, timings: *timings };
            let result = cmd_scan(&scan_config, *threads)?;
            if let Command::Scan { emit_plot_data: Some(path), .. } = cmd {
                write_plot_data(path, &result.rows)?;
            }
            match format {
                Format::Json => write_json(out, config, &result)?,
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(ScanRow::CSV_HEADER)?;
                    for row in &result.rows {
                        w.write_record(row.csv_record())?;
                    }
                    w.flush()?;
                    eprintln!("{}", serde_json::to_string(&result.fits)?);
                }
            }
            Ok(if result.all_invariants_ok { EXIT_OK } else { EXIT_INVARIANT })
        }
        RunConfig::Spectral { p_max, tolerances } => {
            let result = cmd_spectral(*p_max, *tolerances)?;
            match format {
                Format::Json => write_json(out, config, &result)?,
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record([
                        "p",
                        "bezout",
                        "char_poly_m",
                        "char_poly_a",
                        "char_poly_o",
                        "max_root_modulus",
                        "modulus_bound",
                        "min_root_separation",
                        "spectral_radius_o",
                        "o_inf_norm",
                        "passed",
                    ])?;
                    for r in &result.reports {
                        w.write_record([
                            r.p.to_string(),
                            r.bezout.to_string(),
                            r.char_poly_m.to_string(),
                            r.char_poly_a.to_string(),
                            r.char_poly_o.to_string(),
                            r.max_root_modulus.to_string(),
                            r.modulus_bound.to_string(),
                            r.min_root_separation.map_or_else(String::new, |s| s.to_string()),
                            r.spectral_radius_o.to_string(),
                            r.o_inf_norm.to_string(),
                            r.passed.to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
            Ok(if result.all_passed { EXIT_OK } else { EXIT_SPECTRAL })
        }
        RunConfig::Avalanche { p, k } => {
            let result = cmd_avalanche(*p, *k)?;
            match format {
                Format::Json => write_json(out, config, &result)?,
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["k", "order", "density_column", "holes", "max_fired"])?;
                    w.write_record([
                        result.k.to_string(),
                        join(&result.order),
                        result.density_column.to_string(),
                        join(&result.holes),
                        result.max_fired.map_or_else(String::new, |m| m.to_string()),
                    ])?;
                    w.flush()?;
                }
            }
            Ok(EXIT_OK)
        }
        RunConfig::Verify { p, n } => {
            let result = cmd_verify(*p, *n)?;
            match format {
                Format::Json => write_json(out, config, &result)?,
                Format::Csv => {
                    let mut w = csv_writer(out);
                    w.write_record(["check", "passed", "detail"])?;
                    for c in &result.checks {
                        w.write_record([c.name.as_str(), &c.passed.to_string(), c.detail.as_str()])?;
                    }
                    w.flush()?;
                }
            }
            if result.passed {
                Ok(EXIT_OK)
            } else {
                let failed: Vec<&str> =
                    result.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                eprintln!("kspm: invariant violated: {}", failed.join(", "));
                Ok(EXIT_INVARIANT)
            }
        }
    }
}

pub fn cmd_stabilize(p: Params, n: u64, strategy: Strategy) -> Result<StabilizeOutput, CliError> {
    let fp = stabilize(p, n, strategy)?;
    let a = analyzer::analyze(&fp)?;
    Ok(StabilizeOutput {
        heights: fp.slopes.heights().as_slice().to_vec(),
        w: a.w,
        n_strict: a.strict.n,
        n_loose: a.loose.n,
        uniform_index: a.uniform_index,
        interior_zeros: a.strict.interior_zero_count,
        fixed_point: fp,
    })
}

fn fit_summary(rows: &[ScanRow], field: FitField) -> FitSummary {
    let points: Vec<(u64, f64)> = rows.iter().filter_map(|r| field.get(r).map(|v| (r.n, v))).collect();
    match log_fit(rows, field) {
        Ok(fit) => FitSummary { field, fit: Some(fit), skipped: None, gate: regression_gate(&points) },
        Err(e) => FitSummary { field, fit: None, skipped: Some(e.to_string()), gate: None },
    }
}

pub fn cmd_scan(config: &ScanConfig, threads: usize) -> Result<ScanOutput, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Argument(e.to_string()))?;
    let result = pool.install(|| analyzer::scan(config))?;
    let mut fields = vec![FitField::NStrict, FitField::UniformIndex];
    if config.incremental {
        fields.push(FitField::DensityColumn);
    }
    let fits = fields.into_iter().map(|f| fit_summary(&result.rows, f)).collect();
    let all_invariants_ok =
        result.rows.iter().all(ScanRow::invariants_ok) && result.repeated_firings.unwrap_or(0) == 0;
    Ok(ScanOutput { rows: result.rows, fits, repeated_firings: result.repeated_firings, all_invariants_ok })
}

fn write_plot_data(path: &Path, rows: &[ScanRow]) -> Result<(), CliError> {
    let file = File::create(path)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(["series", "x", "y"])?;
    for r in rows {
        w.write_record(["n_strict_vs_log2_n", &(r.n as f64).log2().to_string(), &r.n_strict.to_string()])?;
    }
    for r in rows {
        w.write_record(["w_vs_sqrt_n", &(r.n as f64).sqrt().to_string(), &r.w.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_spectral(p_max: u32, tol: SpectralTolerances) -> Result<SpectralOutput, CliError> {
    use rayon::prelude::*;
    let reports = (2..=p_max)
        .into_par_iter()
        .map(|p| spectral::spectral_report(p, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let all_passed = reports.iter().all(|r| r.passed);
    Ok(SpectralOutput { reports, all_passed })
}

pub fn cmd_avalanche(p: Params, k: u64) -> Result<AvalancheOutput, CliError> {
    let prev = stabilize(p, k - 1, Strategy::Leftmost)?;
    let (next, av) = leftmost_avalanche(&prev)?;
    let climbing_zero = climbing_zero_check(&prev, &next, &av);
    Ok(AvalancheOutput {
        k,
        holes: av.holes(),
        density_column: av.density_column,
        max_fired: av.max_fired,
        before: prev.slopes,
        after: next.slopes,
        order: av.order,
        fired: av.fired,
        climbing_zero,
    })
}

fn check(checks: &mut Vec<Check>, name: &str, passed: bool, detail: impl Into<String>) {
    checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
}

pub fn cmd_verify(p: Params, n: u64) -> Result<VerifyOutput, CliError> {
    let mut checks = Vec::new();
    let direct = stabilize(p, n, Strategy::Leftmost)?;
    let random = stabilize(p, n, Strategy::Random { seed: 0 })?;
    let (incremental, avalanches) = stabilize_incremental(p, n)?;
    let recon = reconstruct_fixed_point(p, n, direct.shot_at(0), &mut GroundTruth(&direct.slopes));

    check(&mut checks, "stable", direct.slopes.is_stable(p), direct.slopes.to_string());
    let grains = direct.slopes.grain_count();
    check(&mut checks, "grain_conservation", grains == Ok(n), format!("{grains:?}"));
    check(
        &mut checks,
        "shot_consistency",
        direct.check_shot_consistency().is_ok(),
        format!("{:?}", direct.check_shot_consistency()),
    );
    check(
        &mut checks,
        "direct_eq_random",
        direct.slopes == random.slopes && direct.shot == random.shot,
        "leftmost vs random seed 0",
    );
    check(
        &mut checks,
        "direct_eq_incremental",
        direct.slopes == incremental.slopes && direct.shot == incremental.shot,
        "leftmost vs hourglass",
    );
    match &recon {
        Ok(r) => check(
            &mut checks,
            "direct_eq_reconstruction",
            r.slopes == direct.slopes && r.shot == direct.shot,
            format!("{} ambiguous columns", r.ambiguous.len()),
        ),
        Err(e) => check(&mut checks, "direct_eq_reconstruction", false, e.to_string()),
    }
    let repeated = avalanches.iter().filter(|a| a.fired.windows(2).any(|w| w[0] == w[1])).count();
    check(&mut checks, "avalanches_fire_once", repeated == 0, format!("{repeated} avalanches repeat a column"));
    let density = avalanches.iter().map(|a| a.density_column).max().unwrap_or(0);
    check(&mut checks, "density_column", true, format!("L = {density}"));

    let a = analyzer::analyze(&direct)?;
    check(
        &mut checks,
        "strict_grammar",
        a.strict.accepted && a.strict.interior_zero_count <= 1,
        format!("n_strict = {}, interior zeros = {}", a.strict.n, a.strict.interior_zero_count),
    );
    check(&mut checks, "n_strict_le_w_plus_1", a.strict.n <= a.w + 1, format!("w = {}", a.w));
    check(
        &mut checks,
        "loose_from_uniform",
        a.loose_at_uniform,
        format!("uniform_index = {:?}", a.uniform_index),
    );
    check(&mut checks, "wave_unfold_consistency", a.unfold_consistent, "strict tail replayed from a uniform vector");
    check(
        &mut checks,
        "support_bounds",
        a.support.within_bounds,
        format!("{:.3} < {} < {:.3}", a.support.lower, a.support.upper, a.w),
    );
    check(&mut checks, "averaging_audit", a.audit_passed, format!("{} ambiguous before uniform", a.ambiguous_count));
    let plateau = max_plateau(&direct.slopes.heights());
    check(
        &mut checks,
        "plateau_bound",
        plateau <= p.p_usize() + 1,
        format!("max plateau {plateau}"),
    );
    let loose = parse_waves(p, &direct.slopes, Grammar::Loose);
    check(&mut checks, "loose_grammar", loose.accepted, format!("n_loose = {}", loose.n));

    if p.p() >= 2 {
        match spectral::z_trajectory(&direct, LogBound::for_parameter(p.p())) {
            Ok(z) => {
                check(&mut checks, "z_recurrence", true, "exact agreement at every step");
                check(&mut checks, "initial_spread", z.initial_spread_ok, format!("spread {}", z.initial_spread));
                check(
                    &mut checks,
                    "z_contraction",
                    z.within_predicted,
                    format!("n0 = {:?}, predicted <= {}", z.n0, z.predicted_n0),
                );
                check(&mut checks, "z_zero_when_uniform", z.uniform_nonzero_z == 0, "");
            }
            Err(e) => check(&mut checks, "z_recurrence", false, e.to_string()),
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyOutput { p: p.p(), n, checks, passed })
}
