//! Command-line front end: parameter sweeps, metric computation, and
//! plot-data generation as CSV or JSON.
//!
//! Commands and flags are documented in the README; output ordering is
//! deterministic (lexicographic over sweep variables) so repeated runs are
//! byte-identical. Sweep points are evaluated on a worker pool whose size
//! is capped by the `MZI_THREADS` environment variable.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::engine::Outcome;
use crate::interferometer::{
    build_lossless_mz_2x2, build_lossy_mz, phase_grid, unitarity_defect, LossParameters,
    LosslessConvention, ScatteringMatrix, INPUT_MODES, OUTPUT_MODES,
};
use crate::metrics::{fidelity, fisher_information, posterior, PhasePrior};
use crate::pipeline::{
    pipeline_distribution, DetectionKernel, DetectionModel, MeasurementModel, PreparationModel,
    Transfer,
};
use crate::poly::TrigSpectrum;
use crate::statespec::{parse_state_spec, StateSpec};
use crate::Error;

/// Exit code for configuration errors (bad flags, specs, files).
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical non-convergence.
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "mzi",
    about = "Photon-counting phase estimation in a lossy Mach-Zehnder interferometer",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Outcome probabilities over a phase grid
    Probs(ProbsArgs),
    /// Classical Fisher information and Cramer-Rao bound over a phase grid
    Fisher(FisherArgs),
    /// Fidelity (Shannon mutual information, bits) of the distribution
    Fidelity(FidelityArgs),
    /// Bayesian phase posterior for one or all outcomes
    Posterior(PosteriorArgs),
    /// Cross-product sweep over states and loss parameters
    Sweep(SweepArgs),
    /// Print scattering matrix entries and the unitarity defect
    Smatrix(SmatrixArgs),
}

/// Interferometer matrix convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    /// 4-mode lossy matrix (one-photon |1,0⟩ exits b₁ with sin²(φ/2) at r = 0)
    Lossy,
    /// dedicated lossless 2×2 matrix (cos²(φ/2) convention); requires r = 0
    Lossless2x2,
}

/// Transfer stage selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransferChoice {
    /// exact engine evolution through the scattering matrix
    Engine,
    /// fixed one-photon table P(1,0)=sin²φ, P(0,1)=cos²φ; needs --state fock:1
    Sin2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A `start:stop:count` phase grid in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl PhiGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.start + step * k as f64).collect()
    }
}

impl FromStr for PhiGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:count, got '{s}'"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|e| format!("start: {e}"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|e| format!("stop: {e}"))?;
        let count: usize = parts[2].trim().parse().map_err(|e| format!("count: {e}"))?;
        if count == 0 {
            return Err("count must be positive".into());
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err("grid bounds must be finite".into());
        }
        Ok(Self { start, stop, count })
    }
}

const DEFAULT_PHI_GRID: &str = "-3.141592653589793:3.141592653589793:64";

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Input state: vac | fock:N | noon:N | mix:p=0.3:vac,p=0.7:fock:1
    #[arg(long)]
    pub state: Option<String>,

    /// Preparation mixture (same grammar); alternative to --state
    #[arg(long)]
    pub prep: Option<String>,

    /// Loss amplitude r_x of the phase-shifter arm, in [0, 1]
    #[arg(long, default_value_t = 0.0)]
    pub rx: f64,

    /// Loss amplitude r_y of the reference arm, in [0, 1]
    #[arg(long, default_value_t = 0.0)]
    pub ry: f64,

    /// Matrix convention
    #[arg(long, value_enum, default_value_t = Convention::Lossy)]
    pub convention: Convention,

    /// Transfer stage
    #[arg(long, value_enum, default_value_t = TransferChoice::Engine)]
    pub transfer: TransferChoice,

    /// Detection: flip:px=0.2 or a path to a JSON confusion kernel
    #[arg(long)]
    pub detect: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PriorArgs {
    /// Phase prior: "uniform" or a path to a two-column CSV (phi, weight)
    #[arg(long, default_value = "uniform")]
    pub prior: String,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ProbsArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Phase grid start:stop:count in radians
    #[arg(long, default_value = DEFAULT_PHI_GRID, allow_hyphen_values = true)]
    pub phi_grid: PhiGrid,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FisherArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Phase grid start:stop:count in radians
    #[arg(long, default_value = DEFAULT_PHI_GRID, allow_hyphen_values = true)]
    pub phi_grid: PhiGrid,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FidelityArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    pub prior: PriorArgs,

    /// Quadrature convergence tolerance in bits
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PosteriorArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    pub prior: PriorArgs,

    /// Outcome to condition on: "n,m" or "i" (inconclusive); all when omitted
    #[arg(long)]
    pub outcome: Option<String>,

    /// Number of uniform grid points over [-pi, pi)
    #[arg(long, default_value_t = 512)]
    pub grid_size: usize,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Metric to tabulate at each sweep point
    #[arg(long, value_enum)]
    pub metric: SweepMetric,

    /// Comma-separated states; ranges allowed, e.g. fock:1..3,noon:2
    #[arg(long)]
    pub states: String,

    /// r_x grid start:stop:count
    #[arg(long, default_value = "0:1:21")]
    pub rx_grid: PhiGrid,

    /// r_y grid start:stop:count; defaults to r_y = r_x lockstep
    #[arg(long)]
    pub ry_grid: Option<PhiGrid>,

    /// Phase grid for probs/fisher sweeps
    #[arg(long, default_value = DEFAULT_PHI_GRID, allow_hyphen_values = true)]
    pub phi_grid: PhiGrid,

    /// Quadrature tolerance for fidelity sweeps
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMetric {
    Probs,
    Fisher,
    Fidelity,
}

#[derive(Args, Debug)]
pub struct SmatrixArgs {
    /// Loss amplitude r_x
    #[arg(long, default_value_t = 0.0)]
    pub rx: f64,

    /// Loss amplitude r_y
    #[arg(long, default_value_t = 0.0)]
    pub ry: f64,

    /// Matrix convention
    #[arg(long, value_enum, default_value_t = Convention::Lossy)]
    pub convention: Convention,

    /// Number of phases for the unitarity-defect check
    #[arg(long, default_value_t = 64)]
    pub defect_grid: usize,

    #[command(flatten)]
    pub output: OutputArgs,
}

/// One output value; keeps CSV and JSON renderings consistent.
#[derive(Clone, Debug)]
enum Cell {
    Str(String),
    UInt(u64),
    Float(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => {
                if v.is_infinite() {
                    if *v > 0.0 { "inf".into() } else { "-inf".into() }
                } else {
                    v.to_string()
                }
            }
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Str(s) => serde_json::Value::String(s.clone()),
            Cell::UInt(v) => serde_json::Value::from(*v),
            Cell::Float(v) => match serde_json::Number::from_f64(*v) {
                Some(n) => serde_json::Value::Number(n),
                // infinities mirror the CSV rendering
                None => serde_json::Value::String(self.csv()),
            },
        }
    }
}

struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn write(&self, format: Format, sink: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                let mut writer = csv::Writer::from_writer(sink);
                writer.write_record(self.columns)?;
                for row in &self.rows {
                    writer.write_record(row.iter().map(Cell::csv))?;
                }
                writer.flush()
            }
            Format::Json => {
                let records: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut map = serde_json::Map::new();
                        for (name, cell) in self.columns.iter().zip(row) {
                            map.insert((*name).to_string(), cell.json());
                        }
                        serde_json::Value::Object(map)
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut *sink, &records)?;
                sink.write_all(b"\n")
            }
        }
    }
}

/// Maps an error to the documented process exit code.
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Core(Error::QuadratureNoConvergence { .. }) => EXIT_NO_CONVERGENCE,
        CliError::Io(_) => 1,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs a parsed command to completion.
pub fn run(cli: Cli) -> CliResult<()> {
    init_thread_pool();
    match cli.command {
        Command::Probs(args) => cmd_probs(args),
        Command::Fisher(args) => cmd_fisher(args),
        Command::Fidelity(args) => cmd_fidelity(args),
        Command::Posterior(args) => cmd_posterior(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Smatrix(args) => cmd_smatrix(args),
    }
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("MZI_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads > 0 {
                // ignore failure when a pool is already installed
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

/// Resolved model: the canonical state label plus the final distribution.
struct ResolvedModel {
    label: String,
    rx: f64,
    ry: f64,
    probs: BTreeMap<Outcome, TrigSpectrum>,
}

fn resolve_spec(model: &ModelArgs) -> CliResult<StateSpec> {
    let text = match (&model.state, &model.prep) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "--state and --prep are mutually exclusive; use one".into(),
            )
            .into())
        }
        (Some(s), None) => s,
        (None, Some(p)) => p,
        (None, None) => {
            return Err(Error::Config("one of --state or --prep is required".into()).into())
        }
    };
    Ok(parse_state_spec(text)?)
}

fn build_matrix(convention: Convention, rx: f64, ry: f64) -> CliResult<ScatteringMatrix> {
    match convention {
        Convention::Lossy => {
            Ok(build_lossy_mz(&LossParameters::new(rx, ry)?))
        }
        Convention::Lossless2x2 => {
            if rx != 0.0 || ry != 0.0 {
                return Err(Error::Config(
                    "the lossless 2x2 convention has no loss; drop --rx/--ry".into(),
                )
                .into());
            }
            Ok(build_lossless_mz_2x2(LosslessConvention::CosSquared))
        }
    }
}

fn parse_detect(spec: &str) -> CliResult<DetectionModel> {
    if let Some(rest) = spec.strip_prefix("flip:") {
        let value = rest
            .strip_prefix("px=")
            .ok_or_else(|| Error::Config(format!("expected flip:px=<value>, got '{spec}'")))?;
        let p_x: f64 = value
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("invalid flip probability '{value}': {e}")))?;
        return Ok(crate::pipeline::binary_flip_detection(p_x)?);
    }
    // otherwise a path to a JSON kernel document:
    // { "1,0": { "1,0": 0.9, "0,1": 0.1 }, ... }, with "i" accepted for "0,0"
    let mut text = String::new();
    File::open(spec)
        .map_err(|e| Error::Config(format!("cannot open detection kernel '{spec}': {e}")))?
        .read_to_string(&mut text)?;
    let raw: BTreeMap<String, BTreeMap<String, f64>> = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid kernel JSON '{spec}': {e}")))?;
    let mut rows = BTreeMap::new();
    for (true_label, row) in raw {
        let true_outcome = parse_outcome(&true_label)?;
        let mut entries = Vec::new();
        for (reported_label, p) in row {
            entries.push((parse_outcome(&reported_label)?, p));
        }
        rows.insert(true_outcome, entries);
    }
    Ok(DetectionModel::Kernel(DetectionKernel::new(rows)?))
}

fn parse_outcome(label: &str) -> CliResult<Outcome> {
    let trimmed = label.trim();
    if trimmed.eq_ignore_ascii_case("i") || trimmed.eq_ignore_ascii_case("inconclusive") {
        return Ok(Outcome::INCONCLUSIVE);
    }
    let parts: Vec<&str> = trimmed.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "expected an outcome 'n,m' or 'i', got '{label}'"
        ))
        .into());
    }
    let n = parts[0].trim().parse().map_err(|e| {
        Error::Config(format!("invalid outcome '{label}': {e}"))
    })?;
    let m = parts[1].trim().parse().map_err(|e| {
        Error::Config(format!("invalid outcome '{label}': {e}"))
    })?;
    Ok(Outcome::new(n, m))
}

fn parse_prior(arg: &PriorArgs) -> CliResult<PhasePrior> {
    if arg.prior.trim().eq_ignore_ascii_case("uniform") {
        return Ok(PhasePrior::uniform());
    }
    let path = &arg.prior;
    let mut text = String::new();
    File::open(path)
        .map_err(|e| Error::Config(format!("cannot open prior '{path}': {e}")))?
        .read_to_string(&mut text)?;
    let mut points = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Config(format!(
                "prior '{path}' line {}: expected 'phi,weight'",
                line_no + 1
            ))
            .into());
        }
        // tolerate a header row
        if line_no == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        let phi: f64 = fields[0].parse().map_err(|e| {
            Error::Config(format!("prior '{path}' line {}: {e}", line_no + 1))
        })?;
        let weight: f64 = fields[1].parse().map_err(|e| {
            Error::Config(format!("prior '{path}' line {}: {e}", line_no + 1))
        })?;
        points.push((phi, weight));
    }
    let integral = crate::metrics::periodic_trapezoid_integral_of(&points);
    if (integral - 1.0).abs() > 1e-6 {
        eprintln!(
            "warning: prior '{path}' integrates to {integral}; renormalizing"
        );
    }
    Ok(PhasePrior::tabulated(points)?)
}

fn resolve_model(model: &ModelArgs) -> CliResult<ResolvedModel> {
    let spec = resolve_spec(model)?;
    let label = spec.to_string();
    let components = spec.components()?;
    let prep = PreparationModel::mixture(components)?;
    let transfer = match model.transfer {
        TransferChoice::Engine => {
            Transfer::Scattering(build_matrix(model.convention, model.rx, model.ry)?)
        }
        TransferChoice::Sin2 => {
            if model.rx != 0.0 || model.ry != 0.0 {
                return Err(Error::Config(
                    "the sin2 transfer is lossless; drop --rx/--ry".into(),
                )
                .into());
            }
            Transfer::OnePhotonSinSq
        }
    };
    let detect = match &model.detect {
        None => DetectionModel::Ideal,
        Some(spec) => parse_detect(spec)?,
    };
    let chain = MeasurementModel {
        prep,
        transfer,
        detect,
    };
    Ok(ResolvedModel {
        label,
        rx: model.rx,
        ry: model.ry,
        probs: pipeline_distribution(&chain)?,
    })
}

fn write_table(table: &Table, output: &OutputArgs) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            let mut file = File::create(path)?;
            table.write(output.format, &mut file)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(output.format, &mut lock)?;
        }
    }
    Ok(())
}

const PROBS_COLUMNS: &[&str] = &[
    "state",
    "r_x",
    "r_y",
    "phi",
    "outcome_n",
    "outcome_m",
    "probability",
];

fn probs_rows(resolved: &ResolvedModel, phis: &[f64], rows: &mut Vec<Vec<Cell>>) {
    for &phi in phis {
        for (outcome, spectrum) in &resolved.probs {
            rows.push(vec![
                Cell::Str(resolved.label.clone()),
                Cell::Float(resolved.rx),
                Cell::Float(resolved.ry),
                Cell::Float(phi),
                Cell::UInt(outcome.n.into()),
                Cell::UInt(outcome.m.into()),
                Cell::Float(spectrum.eval(phi)),
            ]);
        }
    }
}

fn cmd_probs(args: ProbsArgs) -> CliResult<()> {
    let resolved = resolve_model(&args.model)?;
    let mut rows = Vec::new();
    probs_rows(&resolved, &args.phi_grid.values(), &mut rows);
    write_table(
        &Table {
            columns: PROBS_COLUMNS,
            rows,
        },
        &args.output,
    )
}

const FISHER_COLUMNS: &[&str] = &["state", "r_x", "r_y", "phi", "fisher", "crb"];

fn fisher_rows(
    resolved: &ResolvedModel,
    phis: &[f64],
    rows: &mut Vec<Vec<Cell>>,
) -> CliResult<()> {
    for &phi in phis {
        let report = fisher_information(&resolved.probs, phi)?;
        rows.push(vec![
            Cell::Str(resolved.label.clone()),
            Cell::Float(resolved.rx),
            Cell::Float(resolved.ry),
            Cell::Float(phi),
            Cell::Float(report.fisher),
            Cell::Float(report.cramer_rao_bound),
        ]);
    }
    Ok(())
}

fn cmd_fisher(args: FisherArgs) -> CliResult<()> {
    let resolved = resolve_model(&args.model)?;
    let mut rows = Vec::new();
    fisher_rows(&resolved, &args.phi_grid.values(), &mut rows)?;
    write_table(
        &Table {
            columns: FISHER_COLUMNS,
            rows,
        },
        &args.output,
    )
}

const FIDELITY_COLUMNS: &[&str] = &["state", "r_x", "r_y", "fidelity_bits", "quadrature_nodes"];

fn cmd_fidelity(args: FidelityArgs) -> CliResult<()> {
    let resolved = resolve_model(&args.model)?;
    let prior = parse_prior(&args.prior)?;
    let report = fidelity(&resolved.probs, &prior, args.tol)?;
    let rows = vec![vec![
        Cell::Str(resolved.label),
        Cell::Float(resolved.rx),
        Cell::Float(resolved.ry),
        Cell::Float(report.bits),
        Cell::UInt(report.nodes),
    ]];
    write_table(
        &Table {
            columns: FIDELITY_COLUMNS,
            rows,
        },
        &args.output,
    )
}

const POSTERIOR_COLUMNS: &[&str] = &[
    "state",
    "r_x",
    "r_y",
    "outcome_n",
    "outcome_m",
    "phi",
    "density",
];

fn cmd_posterior(args: PosteriorArgs) -> CliResult<()> {
    let resolved = resolve_model(&args.model)?;
    let prior = parse_prior(&args.prior)?;
    let outcomes: Vec<Outcome> = match &args.outcome {
        Some(label) => vec![parse_outcome(label)?],
        None => resolved.probs.keys().copied().collect(),
    };
    let mut rows = Vec::new();
    for outcome in outcomes {
        let post = posterior(&resolved.probs, outcome, &prior, args.grid_size)?;
        for (phi, density) in post.phis.iter().zip(&post.density) {
            rows.push(vec![
                Cell::Str(resolved.label.clone()),
                Cell::Float(resolved.rx),
                Cell::Float(resolved.ry),
                Cell::UInt(outcome.n.into()),
                Cell::UInt(outcome.m.into()),
                Cell::Float(*phi),
                Cell::Float(*density),
            ]);
        }
    }
    write_table(
        &Table {
            columns: POSTERIOR_COLUMNS,
            rows,
        },
        &args.output,
    )
}

/// Expands `fock:1..3` style ranges and splits the comma-separated list.
fn expand_states(text: &str) -> CliResult<Vec<StateSpec>> {
    let mut specs = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((head, range)) = part.split_once(':').and_then(|(h, r)| {
            r.contains("..").then_some((h, r))
        }) {
            let (lo, hi) = range.split_once("..").expect("checked above");
            let lo: u32 = lo.trim().parse().map_err(|e| {
                Error::Config(format!("invalid range start in '{part}': {e}"))
            })?;
            let hi: u32 = hi.trim().parse().map_err(|e| {
                Error::Config(format!("invalid range end in '{part}': {e}"))
            })?;
            if lo > hi {
                return Err(Error::Config(format!("empty range '{part}'")).into());
            }
            for n in lo..=hi {
                specs.push(parse_state_spec(&format!("{head}:{n}"))?);
            }
        } else {
            let spec = parse_state_spec(part)?;
            if spec.is_mixture() {
                return Err(Error::Config(
                    "sweep states must be atoms (vac, fock:N, noon:N); \
                     use the single-state commands for mixtures"
                        .into(),
                )
                .into());
            }
            specs.push(spec);
        }
    }
    if specs.is_empty() {
        return Err(Error::Config("no states given".into()).into());
    }
    Ok(specs)
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let states = expand_states(&args.states)?;
    let rx_values = args.rx_grid.values();
    let phis = args.phi_grid.values();

    // cross product in lexicographic order: state, then r_x, then r_y
    let mut points = Vec::new();
    for spec in &states {
        for &rx in &rx_values {
            match &args.ry_grid {
                Some(grid) => {
                    for &ry in &grid.values() {
                        points.push((spec.clone(), rx, ry));
                    }
                }
                None => points.push((spec.clone(), rx, rx)),
            }
        }
    }

    let results: Vec<CliResult<Vec<Vec<Cell>>>> = points
        .par_iter()
        .map(|(spec, rx, ry)| sweep_point(spec, *rx, *ry, &args, &phis))
        .collect();

    let mut rows = Vec::new();
    for result in results {
        rows.extend(result?);
    }
    let columns = match args.metric {
        SweepMetric::Probs => PROBS_COLUMNS,
        SweepMetric::Fisher => FISHER_COLUMNS,
        SweepMetric::Fidelity => FIDELITY_COLUMNS,
    };
    write_table(&Table { columns, rows }, &args.output)
}

fn sweep_point(
    spec: &StateSpec,
    rx: f64,
    ry: f64,
    args: &SweepArgs,
    phis: &[f64],
) -> CliResult<Vec<Vec<Cell>>> {
    let matrix = build_lossy_mz(&LossParameters::new(rx, ry)?);
    let prep = PreparationModel::mixture(spec.components()?)?;
    let chain = MeasurementModel {
        prep,
        transfer: Transfer::Scattering(matrix),
        detect: DetectionModel::Ideal,
    };
    let resolved = ResolvedModel {
        label: spec.to_string(),
        rx,
        ry,
        probs: pipeline_distribution(&chain)?,
    };
    let mut rows = Vec::new();
    match args.metric {
        SweepMetric::Probs => probs_rows(&resolved, phis, &mut rows),
        SweepMetric::Fisher => fisher_rows(&resolved, phis, &mut rows)?,
        SweepMetric::Fidelity => {
            let report = fidelity(&resolved.probs, &PhasePrior::uniform(), args.tol)?;
            rows.push(vec![
                Cell::Str(resolved.label),
                Cell::Float(rx),
                Cell::Float(ry),
                Cell::Float(report.bits),
                Cell::UInt(report.nodes),
            ]);
        }
    }
    Ok(rows)
}

fn cmd_smatrix(args: SmatrixArgs) -> CliResult<()> {
    let matrix = build_matrix(args.convention, args.rx, args.ry)?;
    if args.defect_grid < 2 {
        return Err(Error::Config("defect grid needs at least 2 phases".into()).into());
    }
    let defect = unitarity_defect(&matrix, &phase_grid(args.defect_grid));

    let mut text = String::new();
    text.push_str(&format!(
        "scattering matrix ({:?}, r_x = {}, r_y = {})\n",
        args.convention, args.rx, args.ry
    ));
    text.push_str("entries as c0 + c1*z with z = e^(i*phi):\n");
    for row in 0..4 {
        for col in 0..4 {
            let entry = matrix.entry(row, col);
            let c0 = entry.coeff(0);
            let c1 = entry.coeff(1);
            text.push_str(&format!(
                "  S[{}][{}] = ({:+.6}{:+.6}i) + ({:+.6}{:+.6}i)*z\n",
                OUTPUT_MODES[row],
                INPUT_MODES[col],
                c0.re,
                c0.im,
                c1.re,
                c1.im
            ));
        }
    }
    text.push_str(&format!(
        "unitarity defect over {} phases: {:.3e}\n",
        args.defect_grid, defect
    ));

    match &args.output.out {
        Some(path) => File::create(path)?.write_all(text.as_bytes())?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
