//! Command-line front end.
//!
//! Every subcommand renders its whole report into a string before writing
//! it, so a run either produces complete output or none. The only source of
//! randomness is `--seed`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

use crate::atten::{self, AttenError};
use crate::budget::{self, BudgetError, ChannelSpec, Measured, SpecField, TypeAMode};
use crate::calib::{self, CalibError, Instrument};
use crate::channel::{ChannelError, ChannelGeometry};
use crate::refmodel::{ReferenceCurve, RefModelError, DEFAULT_VALID_RANGE};
use crate::scatter::{self, ContrastProfile, QuadratureScheme, QuadratureSpec, ScatterError};
use crate::turbidity::{self, CurveMode, TurbidityError};

/// Seed used when neither `--seed` nor the config file gives one.
pub const DEFAULT_SEED: u64 = 42;
/// Replicates per thermostat level in `simulate`.
pub const DEFAULT_REPLICATES: usize = 15;
/// Counter jitter of the simulated instrument, m/s equivalent.
pub const DEFAULT_SPEED_NOISE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Calib(#[from] CalibError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Reference(#[from] RefModelError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Atten(#[from] AttenError),
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Turbidity(#[from] TurbidityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "sonometrics", version, about = "Sound-speed channel simulation, calibration and metrology reports")]
pub struct Cli {
    /// Seed for every random draw [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration; command-line flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the output here instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report format [default: text]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the thermostat calibration protocol and write a code log
    Simulate(SimulateArgs),
    /// Fit speed against timer code from a calibration log
    Calibrate(CalibrateArgs),
    /// Uncertainty budget from repeated speed measurements
    Budget(BudgetArgs),
    /// Check instruments against spec sheets
    Conform(ConformArgs),
    /// Fit the attenuation power law a1·f^b
    Atten(AttenArgs),
    /// Scattering coefficients from compressibility and density contrasts
    Scatter(ScatterArgs),
    /// Turbidity calibration curve from a sample table
    Turbidity(TurbidityArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Thermostat levels, °C [default: 4,8,...,28]
    #[arg(long, value_delimiter = ',', value_name = "T")]
    pub temperatures: Option<Vec<f64>>,
    /// Replicates per level [default: 15]
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Counter jitter as an equivalent speed standard deviation, m/s [default: 0.01]
    #[arg(long, value_name = "M_PER_S")]
    pub speed_noise: Option<f64>,
    /// Attenuation of the liquid, Np/m [default: 0]
    #[arg(long, value_name = "NP_PER_M")]
    pub alpha: Option<f64>,
    /// Measuring base ΔL between the reflectors, m [default: 0.025]
    #[arg(long, value_name = "M")]
    pub base: Option<f64>,
    /// Timer resolution, s [default: 1e-11]
    #[arg(long, value_name = "S")]
    pub timer_resolution: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Calibration log `timestamp,temperature_C,code_N`
    pub log: PathBuf,
    /// Polynomial degree [default: 3]
    #[arg(long)]
    pub degree: Option<usize>,
    /// Write the fitted model CSV here
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Reference curve `degree,coefficient` CSV [default: built-in pure water]
    #[arg(long, value_name = "PATH")]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// One-column CSV of repeated measurements (header line first)
    pub samples: PathBuf,
    /// Type B component, `label=value`; repeatable
    #[arg(long = "ub", value_name = "LABEL=VALUE")]
    pub type_b: Vec<String>,
    /// Coverage factor
    #[arg(short = 'k', long = "coverage", default_value_t = budget::DEFAULT_COVERAGE_K)]
    pub coverage: f64,
    /// Use the standard error of the mean for the type A component
    #[arg(long)]
    pub mean: bool,
    /// Units of the measurements
    #[arg(long, default_value = "m/s")]
    pub units: String,
}

#[derive(Debug, Args)]
pub struct ConformArgs {
    /// Spec database CSV [default: bundled tables]
    #[arg(long, value_name = "PATH")]
    pub specs: Option<PathBuf>,
    /// Measured errors `name,field,measured_error,units`
    #[arg(long, value_name = "PATH")]
    pub measured: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttenArgs {
    /// Attenuation table `freq_MHz,alpha_dB_per_m`
    pub table: PathBuf,
    /// Evaluate the fitted law at this frequency, MHz; repeatable
    #[arg(long = "at", value_name = "MHZ")]
    pub at: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Compressibility contrast β
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Density contrast q
    #[arg(long, allow_hyphen_values = true)]
    pub q: f64,
    /// Wavenumber, rad/m
    #[arg(long)]
    pub k: f64,
    /// Relative number density of scatterers
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    /// Quadrature nodes per axis [default: 64]
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Quadrature rule
    #[arg(long, value_enum, default_value_t = Scheme::Gauss)]
    pub scheme: Scheme,
    /// Also report the differential coefficient at this angle, degrees; repeatable
    #[arg(long = "angle", value_name = "DEG")]
    pub angles: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Gauss,
    Midpoint,
}

#[derive(Debug, Args)]
pub struct TurbidityArgs {
    /// Sample table `reading,concentration_ppm,enabled`
    pub samples: PathBuf,
    /// Curve type
    #[arg(long, value_enum, default_value_t = Mode::Poly)]
    pub mode: Mode,
    /// Polynomial degree, 1 to 4 [default: 1]
    #[arg(long)]
    pub degree: Option<usize>,
    /// Convert this reading to a concentration; repeatable
    #[arg(long = "reading", value_name = "X", allow_hyphen_values = true)]
    pub readings: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Lookup,
    Poly,
}

/// Geometry overrides accepted in the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryOverrides {
    pub reflector_1_offset: Option<f64>,
    pub reflector_2_offset: Option<f64>,
    pub reflection_coeff_full: Option<f64>,
    pub reflection_coeff_partial: Option<f64>,
    pub carrier_freq: Option<f64>,
    pub timer_resolution: Option<f64>,
    pub electronic_delay: Option<f64>,
}

/// Contents of a `--config` TOML file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub degree: Option<usize>,
    pub quadrature_nodes: Option<usize>,
    pub temperatures: Option<Vec<f64>>,
    pub replicates: Option<usize>,
    pub speed_noise: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub geometry: GeometryOverrides,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn geometry(&self) -> ChannelGeometry {
        let d = ChannelGeometry::default();
        let g = &self.geometry;
        ChannelGeometry {
            reflector_1_offset: g.reflector_1_offset.unwrap_or(d.reflector_1_offset),
            reflector_2_offset: g.reflector_2_offset.unwrap_or(d.reflector_2_offset),
            reflection_coeff_full: g.reflection_coeff_full.unwrap_or(d.reflection_coeff_full),
            reflection_coeff_partial: g.reflection_coeff_partial.unwrap_or(d.reflection_coeff_partial),
            carrier_freq: g.carrier_freq.unwrap_or(d.carrier_freq),
            timer_resolution: g.timer_resolution.unwrap_or(d.timer_resolution),
            electronic_delay: g.electronic_delay.unwrap_or(d.electronic_delay),
        }
    }
}

/// Fixed-point rendering with 6 significant digits.
///
/// Magnitudes outside [1e-4, 1e9) switch to exponent notation. Zero, of
/// either sign, prints as `0`.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..9).contains(&exp) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into the next decade (9.999996 -> 10.00000).
    let rounded: f64 = s.parse().expect("formatted float");
    if decimals > 0 && rounded.abs() >= 10f64.powi(exp + 1) {
        let d = decimals - 1;
        format!("{x:.d$}")
    } else {
        s
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Parses arguments, runs the subcommand and writes its output.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let format = cli.format.or(config.format).unwrap_or_default();
    let output = match &cli.command {
        Command::Simulate(a) => simulate(a, &config, seed)?,
        Command::Calibrate(a) => calibrate(a, &config, format)?,
        Command::Budget(a) => budget_report(a, format)?,
        Command::Conform(a) => conform(a, format)?,
        Command::Atten(a) => atten_report(a, format)?,
        Command::Scatter(a) => scatter_report(a, &config, format)?,
        Command::Turbidity(a) => turbidity_report(a, &config, format)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, output.as_bytes()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => stdout.write_all(output.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn simulate(a: &SimulateArgs, config: &RunConfig, seed: u64) -> Result<String, CliError> {
    let mut geometry = config.geometry();
    if let Some(base) = a.base {
        geometry.reflector_2_offset = geometry.reflector_1_offset + base;
    }
    if let Some(t) = a.timer_resolution {
        geometry.timer_resolution = t;
    }
    geometry.validate()?;
    let mut instrument = Instrument::new(geometry);
    instrument.speed_noise = a.speed_noise.or(config.speed_noise).unwrap_or(DEFAULT_SPEED_NOISE);
    instrument.alpha_np = a.alpha.or(config.alpha).unwrap_or(0.0);
    if !(instrument.speed_noise >= 0.0) {
        return Err(CliError::Usage("--speed-noise must be >= 0".into()));
    }
    if !(instrument.alpha_np >= 0.0) {
        return Err(CliError::Usage("--alpha must be >= 0".into()));
    }
    let temperatures = a
        .temperatures
        .clone()
        .or_else(|| config.temperatures.clone())
        .unwrap_or_else(|| calib::DEFAULT_TEMPERATURES.to_vec());
    let replicates = a.replicates.or(config.replicates).unwrap_or(DEFAULT_REPLICATES);
    let rows = calib::run_protocol_log(&instrument, &ReferenceCurve::default(), &temperatures, replicates, seed)?;
    let mut buf = Vec::new();
    calib::write_log(&rows, &mut buf).expect("write to memory");
    Ok(String::from_utf8(buf).expect("ascii log"))
}

fn calibrate(a: &CalibrateArgs, config: &RunConfig, format: Format) -> Result<String, CliError> {
    let reference = match &a.reference {
        Some(p) => ReferenceCurve::from_csv_path(p, DEFAULT_VALID_RANGE)?,
        None => ReferenceCurve::default(),
    };
    let rows = calib::read_log(open(&a.log)?).map_err(|e| input_err(&a.log, e))?;
    let points = calib::aggregate(&rows);
    let degree = a.degree.or(config.degree).unwrap_or(calib::DEFAULT_DEGREE);
    let model = calib::fit_speed_vs_code(&points, &reference, degree)?;
    let res = calib::residuals(&model, &points, &reference)?;
    if let Some(path) = &a.model {
        let mut buf = Vec::new();
        model.write_csv(&mut buf).expect("write to memory");
        std::fs::write(path, buf).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    let mut s = String::new();
    match format {
        Format::Text => {
            writeln!(
                s,
                "calibration fit: degree {} over {} levels ({} observations)",
                degree,
                points.len(),
                rows.len()
            )
            .unwrap();
            for (p, (t, dc)) in points.iter().zip(&res) {
                let c_ref = reference.speed(*t)?;
                writeln!(
                    s,
                    "T = {} °C  N = {}  c_ref = {} m/s  c_fit = {} m/s  Δc = {} m/s",
                    fmt6(*t),
                    fmt6(p.code),
                    fmt6(c_ref),
                    fmt6(c_ref + dc),
                    fmt6(*dc)
                )
                .unwrap();
            }
            writeln!(s, "rmse = {} m/s", fmt6(model.rmse)).unwrap();
        }
        Format::Csv => {
            writeln!(s, "temperature_C,mean_code_N,reference_m_s,fitted_m_s,residual_m_s").unwrap();
            for (p, (t, dc)) in points.iter().zip(&res) {
                let c_ref = reference.speed(*t)?;
                writeln!(s, "{},{},{},{},{}", fmt6(*t), fmt6(p.code), fmt6(c_ref), fmt6(c_ref + dc), fmt6(*dc))
                    .unwrap();
            }
        }
    }
    Ok(s)
}

fn read_column(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(open(path)?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| input_err(path, format!("line {line}: {e}")))?;
        let field = rec
            .get(0)
            .ok_or_else(|| input_err(path, format!("line {line}: empty row")))?;
        out.push(
            field
                .trim()
                .parse()
                .map_err(|e| input_err(path, format!("line {line}: `{field}`: {e}")))?,
        );
    }
    Ok(out)
}

fn budget_report(a: &BudgetArgs, format: Format) -> Result<String, CliError> {
    let samples = read_column(&a.samples)?;
    let mut components = Vec::new();
    for spec in &a.type_b {
        let (label, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--ub expects LABEL=VALUE, got `{spec}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("--ub {label}: {e}")))?;
        components.push((label.trim().to_string(), value));
    }
    let mode = if a.mean {
        TypeAMode::StandardErrorOfMean
    } else {
        TypeAMode::SampleStd
    };
    let b = budget::UncertaintyBudget::from_samples(&samples, components, a.coverage, mode)?;
    let u = &a.units;
    let a_label = match mode {
        TypeAMode::SampleStd => "u_A",
        TypeAMode::StandardErrorOfMean => "u_A(mean)",
    };
    let mut rows: Vec<(String, String, String)> = vec![
        ("n".into(), b.n_observations.to_string(), "count".into()),
        (a_label.into(), fmt6(b.u_a), u.clone()),
    ];
    for (label, v) in &b.u_b_components {
        rows.push((format!("u_B[{label}]"), fmt6(*v), u.clone()));
    }
    rows.push(("u_c".into(), fmt6(b.u_c), u.clone()));
    rows.push(("k".into(), fmt6(b.coverage_k), "dimensionless".into()));
    rows.push(("U".into(), fmt6(b.expanded), u.clone()));
    Ok(render_scalars(&rows, format))
}

fn render_scalars(rows: &[(String, String, String)], format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Text => {
            for (q, v, u) in rows {
                writeln!(s, "{q} = {v} {u}").unwrap();
            }
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(["quantity", "value", "units"]).unwrap();
            for (q, v, u) in rows {
                w.write_record([q, v, u]).unwrap();
            }
            s = String::from_utf8(w.into_inner().unwrap()).unwrap();
        }
    }
    s
}

struct VerdictRow {
    name: String,
    check: String,
    value: Option<f64>,
    limit: Option<f64>,
    units: String,
    verdict: &'static str,
}

fn read_measured(path: &Path) -> Result<Vec<(String, SpecField, Measured)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(open(path)?);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| input_err(path, "line 1: empty measured-error file"))?
        .map_err(|e| input_err(path, format!("line 1: {e}")))?;
    if header.iter().collect::<Vec<_>>() != ["name", "field", "measured_error", "units"] {
        return Err(input_err(path, "line 1: expected header `name,field,measured_error,units`"));
    }
    let mut out = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| input_err(path, format!("line {line}: {e}")))?;
        if rec.len() != 4 {
            return Err(input_err(path, format!("line {line}: expected 4 fields, got {}", rec.len())));
        }
        let field: SpecField = rec[1]
            .trim()
            .parse()
            .map_err(|e: BudgetError| input_err(path, format!("line {line}: {e}")))?;
        let value: f64 = rec[2]
            .trim()
            .parse()
            .map_err(|e| input_err(path, format!("line {line}: `{}`: {e}", &rec[2])))?;
        out.push((rec[0].to_string(), field, Measured::new(value, rec[3].trim())));
    }
    Ok(out)
}

fn conform(a: &ConformArgs, format: Format) -> Result<String, CliError> {
    let specs: Vec<ChannelSpec> = match &a.specs {
        Some(p) => budget::read_specs(open(p)?).map_err(|e| input_err(p, e))?,
        None => budget::bundled_specs(),
    };
    let mut rows = Vec::new();
    match &a.measured {
        Some(path) => {
            for (name, field, m) in read_measured(path)? {
                let spec = specs
                    .iter()
                    .find(|s| s.name == name)
                    .ok_or_else(|| input_err(path, format!("no spec named `{name}`")))?;
                let row = match spec.field(field) {
                    None => VerdictRow {
                        name,
                        check: format!("measured vs {field}"),
                        value: Some(m.value),
                        limit: None,
                        units: m.units.clone(),
                        verdict: "SKIP",
                    },
                    Some(_) => {
                        let v = budget::check_conformance(&m, spec, field)?;
                        VerdictRow {
                            name,
                            check: format!("measured vs {field}"),
                            value: Some(v.value),
                            limit: Some(v.limit),
                            units: m.units.clone(),
                            verdict: if v.pass { "PASS" } else { "FAIL" },
                        }
                    }
                };
                rows.push(row);
            }
        }
        None => {
            for spec in &specs {
                if spec.calibration_error.is_some()
                    && spec.stability.is_some()
                    && spec.final_accuracy.is_some()
                {
                    let v = budget::additive_consistency(spec)?;
                    rows.push(VerdictRow {
                        name: spec.name.clone(),
                        check: "calibration_error + stability = final_accuracy".into(),
                        value: Some(v.value),
                        limit: Some(v.limit),
                        units: spec.units.clone(),
                        verdict: if v.pass { "PASS" } else { "FAIL" },
                    });
                }
                if let Some(declared) = spec.declared_error {
                    let row = match spec.type_test_error {
                        Some(tt) => {
                            let v = budget::check_conformance(
                                &Measured::new(tt, &spec.units),
                                spec,
                                SpecField::DeclaredError,
                            )?;
                            VerdictRow {
                                name: spec.name.clone(),
                                check: "type_test_error vs declared_error".into(),
                                value: Some(v.value),
                                limit: Some(v.limit),
                                units: spec.units.clone(),
                                verdict: if v.pass { "PASS" } else { "FAIL" },
                            }
                        }
                        None => VerdictRow {
                            name: spec.name.clone(),
                            check: "type_test_error vs declared_error".into(),
                            value: None,
                            limit: Some(declared),
                            units: spec.units.clone(),
                            verdict: "SKIP",
                        },
                    };
                    rows.push(row);
                }
            }
        }
    }
    let opt = |v: Option<f64>| v.map(fmt6).unwrap_or_else(|| "-".into());
    let mut s = String::new();
    match format {
        Format::Text => {
            for r in &rows {
                writeln!(
                    s,
                    "{}: {} [{}]: value = {} {u}, limit = {} {u}",
                    r.name,
                    r.check,
                    r.verdict,
                    opt(r.value),
                    opt(r.limit),
                    u = r.units
                )
                .unwrap();
            }
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(["name", "check", "value", "limit", "units", "verdict"]).unwrap();
            let blank = |v: Option<f64>| v.map(fmt6).unwrap_or_default();
            for r in &rows {
                w.write_record([
                    r.name.clone(),
                    r.check.clone(),
                    blank(r.value),
                    blank(r.limit),
                    r.units.clone(),
                    r.verdict.to_string(),
                ])
                .unwrap();
            }
            s = String::from_utf8(w.into_inner().unwrap()).unwrap();
        }
    }
    Ok(s)
}

fn atten_report(a: &AttenArgs, format: Format) -> Result<String, CliError> {
    let pts = atten::read_attenuation_csv(open(&a.table)?).map_err(|e| input_err(&a.table, e))?;
    let m = atten::fit_power_law(&pts)?;
    let mut rows: Vec<(String, String, String)> = vec![
        ("a1".into(), fmt6(m.a1), "dB/m".into()),
        ("b".into(), fmt6(m.b), "dimensionless".into()),
    ];
    for &f in &a.at {
        let v = atten::eval_power_law(&m, f)?;
        rows.push((format!("alpha({} MHz)", fmt6(f)), fmt6(v), "dB/m".into()));
        rows.push((format!("alpha({} MHz)", fmt6(f)), fmt6(atten::db_to_np(v)), "Np/m".into()));
    }
    Ok(render_scalars(&rows, format))
}

fn scatter_report(a: &ScatterArgs, config: &RunConfig, format: Format) -> Result<String, CliError> {
    let profile = ContrastProfile {
        number_density: a.density,
        ..ContrastProfile::new(a.beta, a.q, a.k)
    };
    let n = a.nodes.or(config.quadrature_nodes).unwrap_or(64);
    let quad = QuadratureSpec {
        n_polar: n,
        n_azimuth: n,
        scheme: match a.scheme {
            Scheme::Gauss => QuadratureScheme::Gauss,
            Scheme::Midpoint => QuadratureScheme::Midpoint,
        },
    };
    let back = scatter::backscatter_coefficient(&profile)?;
    let total = scatter::total_coefficient(&profile, &quad)?;
    let exact = scatter::total_coefficient_analytic(&profile);
    let mut rows: Vec<(String, String, String)> = vec![
        ("backscatter".into(), fmt6(back), "1/(m·sr)".into()),
        ("total (quadrature)".into(), fmt6(total), "1/m".into()),
        ("total (closed form)".into(), fmt6(exact), "1/m".into()),
    ];
    for &deg in &a.angles {
        let d = scatter::differential_coefficient(&profile, deg.to_radians())?;
        rows.push((format!("differential({} deg)", fmt6(deg)), fmt6(d), "1/(m·sr)".into()));
    }
    Ok(render_scalars(&rows, format))
}

fn turbidity_report(a: &TurbidityArgs, config: &RunConfig, format: Format) -> Result<String, CliError> {
    let set = turbidity::read_samples(open(&a.samples)?).map_err(|e| input_err(&a.samples, e))?;
    let (mode, degree) = match a.mode {
        Mode::Lookup => (CurveMode::Lookup, 0),
        Mode::Poly => (CurveMode::Polynomial, a.degree.or(config.degree).unwrap_or(1)),
    };
    let curve = turbidity::fit_curve(&set, mode, degree)?;
    let (lo, hi) = curve.domain();
    let mut rows: Vec<(String, String, String)> = vec![
        ("enabled samples".into(), set.enabled().count().to_string(), "count".into()),
        ("domain min".into(), fmt6(lo), "reading".into()),
        ("domain max".into(), fmt6(hi), "reading".into()),
    ];
    if let Some(raw) = curve.raw_coefficients() {
        for (i, c) in raw.iter().enumerate() {
            let units = match i {
                0 => "ppm".to_string(),
                1 => "ppm/reading".to_string(),
                _ => format!("ppm/reading^{i}"),
            };
            rows.push((format!("c{i}"), fmt6(*c), units));
        }
    }
    for &x in &a.readings {
        let c = turbidity::concentration(&curve, x)?;
        let label = if c.clamped {
            format!("concentration({}) clamped", fmt6(x))
        } else {
            format!("concentration({})", fmt6(x))
        };
        rows.push((label, fmt6(c.ppm), "ppm".into()));
    }
    Ok(render_scalars(&rows, format))
}
