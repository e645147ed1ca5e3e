//! Command-line front end.
//!
//! Every setting can come from a flat `key = value` config file (`#` starts a
//! comment) or from the flag of the same name; flags win. Frequencies are
//! entered either as linear frequencies in GHz (`--unit ghz_linear`, converted
//! with a factor 2π) or directly as angular frequencies (`--unit angular`).
//! Times (`--tau-grid`, `--t0`) are in the reciprocal base unit, i.e. ns for GHz.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{limit_scan, log_tau_grid, EvolveConfig, RampProtocol, RampShape, ScanRow};
use crate::entanglement::{conditional_concurrences, Conditioning};
use crate::error::DleError;
use crate::hamiltonian::{SystemParams, DEFAULT_RESONANCE_TOL};
use crate::hilbert::{BasisLabel, FockCutoff};
use crate::oracle::{exact_quench_amplitudes, OracleConfig};
use crate::perturbation::perturbed_state;
use crate::quench::{probabilities_from, quench_amplitudes, QuenchSpec, TARGET_LABELS};

pub const WORKERS_ENV: &str = "DYNLAMB_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "dynlamb",
    version,
    about = "Dynamical Lamb effect for two qubits in a quenched cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the showcase observables next to their reference values.
    Reproduce(Settings),
    /// Closed-form observables over a parameter grid.
    Sweep(Settings),
    /// Closed-form amplitudes against exact diagonalization.
    OracleCompare(Settings),
    /// Time-domain ramp scan over a logarithmic grid of durations.
    Evolve(Settings),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    #[value(name = "ghz_linear")]
    GhzLinear,
    #[value(name = "angular")]
    Angular,
}

impl Unit {
    fn to_angular(self, x: f64) -> f64 {
        match self {
            Unit::GhzLinear => x * std::f64::consts::TAU,
            Unit::Angular => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Sudden,
    Linear,
    Smoothstep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Omega1,
    Omega2,
    E0,
    Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / last)
            .collect()
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    /// `name=start:stop:steps`
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("expected name=start:stop:steps, got `{s}`"))?;
        let param = match name.trim() {
            "omega1" => SweepParam::Omega1,
            "omega2" => SweepParam::Omega2,
            "e0" => SweepParam::E0,
            "lambda" => SweepParam::Lambda,
            other => return Err(format!("unknown sweep parameter `{other}`")),
        };
        let parts: Vec<&str> = range.split(':').map(str::trim).collect();
        let [start, stop, steps] = parts[..] else {
            return Err(format!("expected start:stop:steps, got `{range}`"));
        };
        let start: f64 = start.parse().map_err(|e| format!("start: {e}"))?;
        let stop: f64 = stop.parse().map_err(|e| format!("stop: {e}"))?;
        let steps: usize = steps.parse().map_err(|e| format!("steps: {e}"))?;
        if steps < 2 {
            return Err(format!("steps must be >= 2, got {steps}"));
        }
        if !(start.is_finite() && stop.is_finite()) {
            return Err("start and stop must be finite".into());
        }
        Ok(SweepSpec {
            param,
            start,
            stop,
            steps,
        })
    }
}

/// `min:max:points`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl FromStr for TauGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [min, max, points] = parts[..] else {
            return Err(format!("expected min:max:points, got `{s}`"));
        };
        Ok(TauGrid {
            min: min.parse().map_err(|e| format!("min: {e}"))?,
            max: max.parse().map_err(|e| format!("max: {e}"))?,
            points: points.parse().map_err(|e| format!("points: {e}"))?,
        })
    }
}

/// Settings shared by all subcommands. Each is optional here because it may
/// come from `--config` instead.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Flat key = value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub omega1: Option<f64>,
    #[arg(long)]
    pub omega2: Option<f64>,
    #[arg(long)]
    pub e0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub unit: Option<Unit>,
    /// Maximum photon number N.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// name=start:stop:steps with name one of omega1, omega2, e0, lambda.
    #[arg(long)]
    pub sweep: Option<SweepSpec>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Relative distance to E0 below which a frequency counts as resonant.
    #[arg(long = "tol-resonance")]
    pub tol_resonance: Option<f64>,
    /// Relative amplitude change allowed when the oracle cutoff grows by 5.
    #[arg(long = "tol-convergence")]
    pub tol_convergence: Option<f64>,
    #[arg(long = "tol-norm")]
    pub tol_norm: Option<f64>,
    #[arg(long = "tol-leakage")]
    pub tol_leakage: Option<f64>,
    /// Local error per integrator step.
    #[arg(long = "tol-step")]
    pub tol_step: Option<f64>,
    #[arg(long, value_enum)]
    pub shape: Option<ShapeArg>,
    /// min:max:points, logarithmic.
    #[arg(long = "tau-grid")]
    pub tau_grid: Option<TauGrid>,
    /// Ramp onset time.
    #[arg(long)]
    pub t0: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(DleError),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(e) => write!(f, "{}: {e}", error_kind(e)),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DleError> for CliError {
    fn from(e: DleError) -> Self {
        CliError::Numerical(e)
    }
}

fn error_kind(e: &DleError) -> &'static str {
    match e {
        DleError::NearResonance { .. } => "near_resonance",
        DleError::AssignmentFailed { .. } => "assignment_failed",
        DleError::CutoffLeakage { .. } => "cutoff_leakage",
        DleError::NormDrift { .. } => "norm_drift",
        DleError::CutoffUnconverged { .. } | DleError::NotConverged { .. } => "not_converged",
        DleError::StepUnderflow { .. } => "step_underflow",
        DleError::Eigensolver(_) => "eigensolver",
        _ => "invalid_parameter",
    }
}

impl CliError {
    /// 0 success, 2 configuration, 3 numerical validity, 4 convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(e) => match e {
                DleError::NearResonance { .. }
                | DleError::AssignmentFailed { .. }
                | DleError::CutoffLeakage { .. }
                | DleError::NormDrift { .. } => 3,
                DleError::CutoffUnconverged { .. }
                | DleError::NotConverged { .. }
                | DleError::StepUnderflow { .. }
                | DleError::Eigensolver(_) => 4,
                _ => 2,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("`{key}` = `{value}`: {e}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> CliResult<T> {
    T::from_str(value, false).map_err(|e| CliError::Config(format!("`{key}`: {e}")))
}

/// Parses a flat `key = value` file into settings.
pub fn parse_config(text: &str) -> CliResult<Settings> {
    let mut s = Settings::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "omega1" => s.omega1 = Some(parse_value(key, value)?),
            "omega2" => s.omega2 = Some(parse_value(key, value)?),
            "e0" => s.e0 = Some(parse_value(key, value)?),
            "lambda" => s.lambda = Some(parse_value(key, value)?),
            "unit" => s.unit = Some(parse_enum(key, value)?),
            "cutoff" => s.cutoff = Some(parse_value(key, value)?),
            "sweep" => s.sweep = Some(parse_value(key, value)?),
            "output" => s.output = Some(PathBuf::from(value)),
            "format" => s.format = Some(parse_enum(key, value)?),
            "tol-resonance" => s.tol_resonance = Some(parse_value(key, value)?),
            "tol-convergence" => s.tol_convergence = Some(parse_value(key, value)?),
            "tol-norm" => s.tol_norm = Some(parse_value(key, value)?),
            "tol-leakage" => s.tol_leakage = Some(parse_value(key, value)?),
            "tol-step" => s.tol_step = Some(parse_value(key, value)?),
            "shape" => s.shape = Some(parse_enum(key, value)?),
            "tau-grid" => s.tau_grid = Some(parse_value(key, value)?),
            "t0" => s.t0 = Some(parse_value(key, value)?),
            other => {
                return Err(CliError::Config(format!(
                    "line {}: unknown key `{other}`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(s)
}

impl Settings {
    /// Fields set on `self` win over `file`.
    fn over(self, file: Settings) -> Settings {
        Settings {
            config: self.config,
            omega1: self.omega1.or(file.omega1),
            omega2: self.omega2.or(file.omega2),
            e0: self.e0.or(file.e0),
            lambda: self.lambda.or(file.lambda),
            unit: self.unit.or(file.unit),
            cutoff: self.cutoff.or(file.cutoff),
            sweep: self.sweep.or(file.sweep),
            output: self.output.or(file.output),
            format: self.format.or(file.format),
            tol_resonance: self.tol_resonance.or(file.tol_resonance),
            tol_convergence: self.tol_convergence.or(file.tol_convergence),
            tol_norm: self.tol_norm.or(file.tol_norm),
            tol_leakage: self.tol_leakage.or(file.tol_leakage),
            tol_step: self.tol_step.or(file.tol_step),
            shape: self.shape.or(file.shape),
            tau_grid: self.tau_grid.or(file.tau_grid),
            t0: self.t0.or(file.t0),
        }
    }
}

/// Physical inputs in the user's unit, before conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPoint {
    pub omega1: f64,
    pub omega2: f64,
    pub e0: f64,
    pub lambda: f64,
}

impl RawPoint {
    fn with(self, param: SweepParam, value: f64) -> RawPoint {
        let mut p = self;
        match param {
            SweepParam::Omega1 => p.omega1 = value,
            SweepParam::Omega2 => p.omega2 = value,
            SweepParam::E0 => p.e0 = value,
            SweepParam::Lambda => p.lambda = value,
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub point: RawPoint,
    pub unit: Unit,
    pub cutoff: Option<usize>,
    pub sweep: Option<SweepSpec>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub tol_resonance: f64,
    pub tol_convergence: f64,
    pub evolve: EvolveConfig,
    pub shape: RampShape,
    pub tau_grid: Option<TauGrid>,
    pub t0: f64,
}

impl RunConfig {
    pub fn from_settings(flags: Settings) -> CliResult<RunConfig> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("config `{}`: {e}", path.display())))?;
                parse_config(&text)?
            }
            None => Settings::default(),
        };
        let s = flags.over(file);
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Config(format!("missing required parameter `{name}`")))
        };
        let point = RawPoint {
            omega1: need(s.omega1, "omega1")?,
            omega2: need(s.omega2, "omega2")?,
            e0: need(s.e0, "e0")?,
            lambda: need(s.lambda, "lambda")?,
        };
        let unit = s.unit.ok_or_else(|| {
            CliError::Config("missing required parameter `unit` (ghz_linear or angular)".into())
        })?;
        let defaults = EvolveConfig::default();
        let evolve = EvolveConfig {
            tol: s.tol_step.unwrap_or(defaults.tol),
            norm_bound: s.tol_norm.unwrap_or(defaults.norm_bound),
            leakage_bound: s.tol_leakage.unwrap_or(defaults.leakage_bound),
            ..defaults
        };
        let shape = match s.shape.unwrap_or(ShapeArg::Smoothstep) {
            ShapeArg::Sudden => RampShape::Sudden,
            ShapeArg::Linear => RampShape::Linear,
            ShapeArg::Smoothstep => RampShape::Smoothstep,
        };
        Ok(RunConfig {
            point,
            unit,
            cutoff: s.cutoff,
            sweep: s.sweep,
            output: s.output,
            format: s.format.unwrap_or(Format::Csv),
            tol_resonance: s.tol_resonance.unwrap_or(DEFAULT_RESONANCE_TOL),
            tol_convergence: s
                .tol_convergence
                .unwrap_or(OracleConfig::default().convergence_tol),
            evolve,
            shape,
            tau_grid: s.tau_grid,
            t0: s.t0.unwrap_or(0.0),
        })
    }

    /// The base point in internal angular units.
    fn internal(&self) -> RawPoint {
        let u = self.unit;
        RawPoint {
            omega1: u.to_angular(self.point.omega1),
            omega2: u.to_angular(self.point.omega2),
            e0: u.to_angular(self.point.e0),
            lambda: u.to_angular(self.point.lambda),
        }
    }

    fn physical(&self, p: RawPoint) -> crate::Result<(SystemParams, QuenchSpec)> {
        let params =
            SystemParams::new(p.e0, p.lambda)?.with_resonance_tolerance(self.tol_resonance)?;
        let quench = QuenchSpec::new(p.omega1, p.omega2)?;
        Ok((params, quench))
    }

    /// Grid points as `(swept value in the input unit, internal point)`.
    ///
    /// The grid is laid out between endpoints already converted to internal
    /// units, so both unit conventions produce bit-identical internal points.
    fn grid(&self) -> Vec<(Option<f64>, RawPoint)> {
        let base = self.internal();
        match self.sweep {
            Some(sw) => {
                let internal = SweepSpec {
                    start: self.unit.to_angular(sw.start),
                    stop: self.unit.to_angular(sw.stop),
                    ..sw
                };
                sw.values()
                    .into_iter()
                    .zip(internal.values())
                    .map(|(shown, v)| (Some(shown), base.with(sw.param, v)))
                    .collect()
            }
            None => vec![(None, base)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResultRow {
    pub swept_value: Option<f64>,
    pub w_10: f64,
    pub w_01: f64,
    pub w_11: f64,
    pub c_1: f64,
    pub c_2: f64,
    pub a_1_10: f64,
    pub a_0_11: f64,
    pub a_2_11: f64,
    pub a_2_00: f64,
    pub validity_warning: bool,
}

pub const RESULT_HEADER: &str =
    "swept_value,w_10,w_01,w_11,c_1,c_2,a_1_10,a_0_11,a_2_11,a_2_00,validity_warning";

const WARN_PROBABILITY: f64 = 0.5;
const WARN_COEFFICIENT: f64 = 0.3;

pub fn result_row(
    params: &SystemParams,
    quench: &QuenchSpec,
    swept_value: Option<f64>,
) -> crate::Result<ResultRow> {
    let amps = quench_amplitudes(params, quench)?;
    let probs = probabilities_from(&amps);
    let conc = conditional_concurrences(params, quench, Conditioning::Raw)?;
    let mut first_order = amps.a_1_10.abs().max(amps.a_1_01.abs());
    let vacuum = perturbed_state(BasisLabel::new(0, 0, 0), params, quench.omega1)?;
    first_order = first_order.max(vacuum.max_correction());
    for label in TARGET_LABELS {
        first_order =
            first_order.max(perturbed_state(label, params, quench.omega2)?.max_correction());
    }
    let validity_warning = probs.validity_warning
        || [probs.w_10, probs.w_01, probs.w_11]
            .iter()
            .any(|&w| w > WARN_PROBABILITY)
        || first_order > WARN_COEFFICIENT;
    Ok(ResultRow {
        swept_value,
        w_10: probs.w_10,
        w_01: probs.w_01,
        w_11: probs.w_11,
        c_1: conc.c_1,
        c_2: conc.c_2,
        a_1_10: amps.a_1_10,
        a_0_11: amps.a_0_11,
        a_2_11: amps.a_2_11,
        a_2_00: amps.a_2_00,
        validity_warning,
    })
}

/// Scientific notation with 10 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn result_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        let cols = [
            r.w_10, r.w_01, r.w_11, r.c_1, r.c_2, r.a_1_10, r.a_0_11, r.a_2_11, r.a_2_00,
        ];
        let _ = write!(out, "{}", fmt_opt(r.swept_value));
        for c in cols {
            let _ = write!(out, ",{}", fmt_float(c));
        }
        let _ = writeln!(out, ",{}", r.validity_warning);
    }
    out
}

/// Showcase references: (name, value, relative tolerance).
pub const REFERENCES: [(&str, f64, f64); 5] = [
    ("w_10", 1.472e-5, 1e-3),
    ("w_01", 1.472e-5, 1e-3),
    ("w_11", 0.1, 1e-2),
    ("c_1", 2.945e-5, 1e-3),
    ("c_2", 1.553e-3, 1e-3),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceRow {
    pub observable: &'static str,
    pub computed: f64,
    pub reference: f64,
    pub relative_deviation: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

pub fn reproduce_rows(
    params: &SystemParams,
    quench: &QuenchSpec,
) -> crate::Result<Vec<ReproduceRow>> {
    let row = result_row(params, quench, None)?;
    let computed = [row.w_10, row.w_01, row.w_11, row.c_1, row.c_2];
    Ok(REFERENCES
        .iter()
        .zip(computed)
        .map(|(&(observable, reference, tolerance), computed)| {
            let relative_deviation = (computed - reference).abs() / reference.abs();
            ReproduceRow {
                observable,
                computed,
                reference,
                relative_deviation,
                tolerance,
                within_tolerance: relative_deviation <= tolerance,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub swept_value: Option<f64>,
    pub amplitude: &'static str,
    pub closed_form: f64,
    pub exact: f64,
    pub relative_error: f64,
    pub relative_error_half_lambda: f64,
    /// Error shrink factor under λ → λ/2.
    pub lambda_scaling: f64,
}

const AMPLITUDE_NAMES: [&str; 5] = ["a_1_10", "a_1_01", "a_0_11", "a_2_11", "a_2_00"];

fn relative_errors(
    params: &SystemParams,
    quench: &QuenchSpec,
    config: &OracleConfig,
) -> crate::Result<([f64; 5], [f64; 5], [f64; 5])> {
    let closed = quench_amplitudes(params, quench)?.values();
    let exact = exact_quench_amplitudes(params, quench, config)?
        .amplitudes
        .values();
    let rel = std::array::from_fn(|i| ((closed[i] - exact[i]) / exact[i]).abs());
    Ok((closed, exact, rel))
}

pub fn compare_rows(
    params: &SystemParams,
    quench: &QuenchSpec,
    config: &OracleConfig,
    swept_value: Option<f64>,
) -> crate::Result<Vec<CompareRow>> {
    let (closed, exact, rel) = relative_errors(params, quench, config)?;
    let half = params.with_lambda(0.5 * params.lambda())?;
    let (_, _, rel_half) = relative_errors(&half, quench, config)?;
    Ok((0..5)
        .map(|i| CompareRow {
            swept_value,
            amplitude: AMPLITUDE_NAMES[i],
            closed_form: closed[i],
            exact: exact[i],
            relative_error: rel[i],
            relative_error_half_lambda: rel_half[i],
            lambda_scaling: rel[i] / rel_half[i],
        })
        .collect())
}

#[derive(Debug, Serialize)]
struct JsonScanRow {
    tau: f64,
    total_excitation: f64,
    w_10: f64,
    w_01: f64,
    w_11: f64,
    c_1: f64,
    c_2: f64,
    norm_drift: f64,
    parity_drift: f64,
}

impl From<&ScanRow> for JsonScanRow {
    fn from(r: &ScanRow) -> Self {
        JsonScanRow {
            tau: r.tau,
            total_excitation: r.total_excitation,
            w_10: r.w_10,
            w_01: r.w_01,
            w_11: r.w_11,
            c_1: r.c_1,
            c_2: r.c_2,
            norm_drift: r.norm_drift,
            parity_drift: r.parity_drift,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(e.to_string()))
}

fn emit(config: &RunConfig, text: &str) -> CliResult<()> {
    match &config.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("`{}`: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_sweep(config: &RunConfig, require_sweep: bool) -> CliResult<()> {
    if require_sweep && config.sweep.is_none() {
        return Err(CliError::Config(
            "`sweep` requires --sweep name=start:stop:steps".into(),
        ));
    }
    let rows = config
        .grid()
        .into_par_iter()
        .map(|(swept, raw)| {
            let (params, quench) = config.physical(raw)?;
            result_row(&params, &quench, swept)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let text = match config.format {
        Format::Csv => result_csv(&rows),
        Format::Json => to_json(&rows)?,
    };
    emit(config, &text)
}

fn run_reproduce(config: &RunConfig) -> CliResult<()> {
    let (params, quench) = config.physical(config.internal())?;
    let rows = reproduce_rows(&params, &quench)?;
    let text = match config.format {
        Format::Csv => {
            let mut out = String::from(
                "observable,computed,reference,relative_deviation,tolerance,within_tolerance\n",
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.observable,
                    fmt_float(r.computed),
                    fmt_float(r.reference),
                    fmt_float(r.relative_deviation),
                    fmt_float(r.tolerance),
                    r.within_tolerance
                );
            }
            out
        }
        Format::Json => to_json(&rows)?,
    };
    emit(config, &text)
}

fn run_oracle_compare(config: &RunConfig) -> CliResult<()> {
    let oracle = OracleConfig {
        cutoff: FockCutoff::new(
            config
                .cutoff
                .unwrap_or(OracleConfig::default().cutoff.max_photons()),
        ),
        convergence_tol: config.tol_convergence,
        ..OracleConfig::default()
    };
    let rows: Vec<CompareRow> = config
        .grid()
        .into_par_iter()
        .map(|(swept, raw)| {
            let (params, quench) = config.physical(raw)?;
            compare_rows(&params, &quench, &oracle, swept)
        })
        .collect::<crate::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let text = match config.format {
        Format::Csv => {
            let mut out = String::from(
                "swept_value,amplitude,closed_form,exact,relative_error,relative_error_half_lambda,lambda_scaling\n",
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    fmt_opt(r.swept_value),
                    r.amplitude,
                    fmt_float(r.closed_form),
                    fmt_float(r.exact),
                    fmt_float(r.relative_error),
                    fmt_float(r.relative_error_half_lambda),
                    fmt_float(r.lambda_scaling)
                );
            }
            out
        }
        Format::Json => to_json(&rows)?,
    };
    emit(config, &text)
}

fn run_evolve(config: &RunConfig) -> CliResult<()> {
    let grid = config
        .tau_grid
        .ok_or_else(|| CliError::Config("`evolve` requires --tau-grid min:max:points".into()))?;
    if config.sweep.is_some() {
        return Err(CliError::Config(
            "`sweep` is not supported by `evolve`".into(),
        ));
    }
    let (params, quench) = config.physical(config.internal())?;
    let cutoff = FockCutoff::new(
        config
            .cutoff
            .unwrap_or(config.evolve.default_cutoff().max_photons()),
    );
    let taus = log_tau_grid(grid.min, grid.max, grid.points)?;
    let family = RampProtocol::new(
        config.shape,
        quench.omega1,
        quench.omega2,
        if config.shape == RampShape::Sudden {
            0.0
        } else {
            taus[0]
        },
        config.t0,
    )?;
    let table = limit_scan(&params, &family, &taus, cutoff, &config.evolve)?;
    let text = match config.format {
        Format::Csv => {
            let mut out = String::from(
                "tau,total_excitation,w_10,w_01,w_11,c_1,c_2,norm_drift,parity_drift\n",
            );
            for r in &table.rows {
                let cols = [
                    r.tau,
                    r.total_excitation,
                    r.w_10,
                    r.w_01,
                    r.w_11,
                    r.c_1,
                    r.c_2,
                    r.norm_drift,
                    r.parity_drift,
                ];
                let line: Vec<String> = cols.iter().map(|&c| fmt_float(c)).collect();
                let _ = writeln!(out, "{}", line.join(","));
            }
            out
        }
        Format::Json => {
            let rows: Vec<JsonScanRow> = table.rows.iter().map(JsonScanRow::from).collect();
            to_json(&rows)?
        }
    };
    emit(config, &text)
}

fn worker_count() -> CliResult<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "`{WORKERS_ENV}` must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| match command {
        Command::Reproduce(s) => run_reproduce(&RunConfig::from_settings(s)?),
        Command::Sweep(s) => run_sweep(&RunConfig::from_settings(s)?, true),
        Command::OracleCompare(s) => run_oracle_compare(&RunConfig::from_settings(s)?),
        Command::Evolve(s) => run_evolve(&RunConfig::from_settings(s)?),
    })
}
