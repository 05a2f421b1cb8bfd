//! Uncertainty budgets and spec-sheet conformance.
//!
//! Type A is evaluated from repeated observations, type B components are
//! supplied by the caller; they combine by root-sum-square and the expanded
//! uncertainty is `U = k · u_c`.
//!
//! By default `u_A` is the sample standard deviation of the observations
//! (the dispersion of single results), which is how the national sound-speed
//! standard quotes its type A figure. [`TypeAMode::StandardErrorOfMean`]
//! gives the usual `s/√n` instead.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BudgetError {
    #[error("type A evaluation needs at least 2 observations, got {0}")]
    TooFewSamples(usize),
    #[error("uncertainty component `{label}` is negative or not finite: {value}")]
    NegativeComponent { label: String, value: f64 },
    #[error("coverage factor must be > 0, got {0}")]
    CoverageFactor(f64),
    #[error("unit mismatch: measured in `{measured}`, spec `{spec}` is in `{expected}`")]
    UnitMismatch {
        measured: String,
        spec: String,
        expected: String,
    },
    #[error("spec `{spec}` has no `{field}` value")]
    MissingField { spec: String, field: SpecField },
    #[error("invalid spec row `{0}`: {1}")]
    InvalidSpec(String, String),
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TypeAMode {
    /// Sample standard deviation, n - 1 denominator.
    #[default]
    SampleStd,
    /// Sample standard deviation divided by √n.
    StandardErrorOfMean,
}

/// Type A standard uncertainty of repeated observations.
pub fn type_a(samples: &[f64], mode: TypeAMode) -> Result<f64, BudgetError> {
    let n = samples.len();
    if n < 2 {
        return Err(BudgetError::TooFewSamples(n));
    }
    // Shift by the first observation so identical samples give exactly zero.
    let origin = samples[0];
    let shift = samples.iter().map(|x| x - origin).sum::<f64>() / n as f64;
    let var = samples
        .iter()
        .map(|x| (x - origin - shift).powi(2))
        .sum::<f64>()
        / (n - 1) as f64;
    let s = var.sqrt();
    Ok(match mode {
        TypeAMode::SampleStd => s,
        TypeAMode::StandardErrorOfMean => s / (n as f64).sqrt(),
    })
}

fn check_component(label: &str, value: f64) -> Result<(), BudgetError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(BudgetError::NegativeComponent {
            label: label.to_string(),
            value,
        })
    }
}

/// Root-sum-square of the type A value and all type B components.
pub fn combine(u_a: f64, u_b: &[f64]) -> Result<f64, BudgetError> {
    check_component("type A", u_a)?;
    let mut ss = u_a * u_a;
    for (i, &u) in u_b.iter().enumerate() {
        check_component(&format!("type B #{}", i + 1), u)?;
        ss += u * u;
    }
    Ok(ss.sqrt())
}

/// Expanded uncertainty `U = k · u_c`.
pub fn expand(u_c: f64, k: f64) -> Result<f64, BudgetError> {
    check_component("combined", u_c)?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(BudgetError::CoverageFactor(k));
    }
    Ok(k * u_c)
}

/// Default coverage factor.
pub const DEFAULT_COVERAGE_K: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyBudget {
    pub u_a: f64,
    pub u_b_components: Vec<(String, f64)>,
    pub u_c: f64,
    pub coverage_k: f64,
    pub expanded: f64,
    pub n_observations: usize,
}

impl UncertaintyBudget {
    pub fn from_samples(
        samples: &[f64],
        u_b_components: Vec<(String, f64)>,
        coverage_k: f64,
        mode: TypeAMode,
    ) -> Result<Self, BudgetError> {
        let u_a = type_a(samples, mode)?;
        for (label, v) in &u_b_components {
            check_component(label, *v)?;
        }
        let values: Vec<f64> = u_b_components.iter().map(|c| c.1).collect();
        let u_c = combine(u_a, &values)?;
        let expanded = expand(u_c, coverage_k)?;
        Ok(Self {
            u_a,
            u_b_components,
            u_c,
            coverage_k,
            expanded,
            n_observations: samples.len(),
        })
    }
}

/// Published characteristics of a sound-speed measurement standard, m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceStandard {
    pub name: &'static str,
    /// RMS deviation of results (upper bound).
    pub rms_deviation: f64,
    pub n_observations: usize,
    /// Non-excluded systematic error bound.
    pub systematic_error: f64,
    /// Confidence probability attached to the systematic bound.
    pub confidence: f64,
}

pub const PRIMARY_STANDARD: ReferenceStandard = ReferenceStandard {
    name: "State primary standard, sound speed in liquids",
    rms_deviation: 0.005,
    n_observations: 15,
    systematic_error: 0.04,
    confidence: 0.99,
};

pub const SECONDARY_STANDARD: ReferenceStandard = ReferenceStandard {
    name: "Secondary standard, sound speed in sea water",
    rms_deviation: 0.05,
    n_observations: 15,
    systematic_error: 0.08,
    confidence: 0.99,
};

/// Published budget of the primary standard: (u_A, u_B, u_c, k, U), m/s.
pub const PRIMARY_STANDARD_BUDGET: (f64, f64, f64, f64, f64) = (0.005, 0.02, 0.02, 2.0, 0.04);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    SoundSpeed,
    Temperature,
    Pressure,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::SoundSpeed => "sound_speed",
            Quantity::Temperature => "temperature",
            Quantity::Pressure => "pressure",
        })
    }
}

impl FromStr for Quantity {
    type Err = BudgetError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sound_speed" => Ok(Quantity::SoundSpeed),
            "temperature" => Ok(Quantity::Temperature),
            "pressure" => Ok(Quantity::Pressure),
            other => Err(BudgetError::Parse(format!("unknown quantity `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecField {
    Resolution,
    CalibrationError,
    Stability,
    FinalAccuracy,
    DeclaredError,
    TypeTestError,
}

impl fmt::Display for SpecField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpecField::Resolution => "resolution",
            SpecField::CalibrationError => "calibration_error",
            SpecField::Stability => "stability",
            SpecField::FinalAccuracy => "final_accuracy",
            SpecField::DeclaredError => "declared_error",
            SpecField::TypeTestError => "type_test_error",
        })
    }
}

impl FromStr for SpecField {
    type Err = BudgetError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "resolution" => SpecField::Resolution,
            "calibration_error" => SpecField::CalibrationError,
            "stability" => SpecField::Stability,
            "final_accuracy" => SpecField::FinalAccuracy,
            "declared_error" => SpecField::DeclaredError,
            "type_test_error" => SpecField::TypeTestError,
            other => return Err(BudgetError::Parse(format!("unknown spec field `{other}`"))),
        })
    }
}

/// One row of a manufacturer or type-test spec sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub name: String,
    pub quantity: Quantity,
    /// Measuring range; absent when the sheet does not state it.
    pub range: Option<(f64, f64)>,
    pub units: String,
    pub resolution: Option<f64>,
    pub calibration_error: Option<f64>,
    pub stability: Option<f64>,
    pub final_accuracy: Option<f64>,
    pub declared_error: Option<f64>,
    pub type_test_error: Option<f64>,
}

impl ChannelSpec {
    pub fn field(&self, field: SpecField) -> Option<f64> {
        match field {
            SpecField::Resolution => self.resolution,
            SpecField::CalibrationError => self.calibration_error,
            SpecField::Stability => self.stability,
            SpecField::FinalAccuracy => self.final_accuracy,
            SpecField::DeclaredError => self.declared_error,
            SpecField::TypeTestError => self.type_test_error,
        }
    }

    fn require(&self, field: SpecField) -> Result<f64, BudgetError> {
        self.field(field).ok_or_else(|| BudgetError::MissingField {
            spec: self.name.clone(),
            field,
        })
    }

    pub fn validate(&self) -> Result<(), BudgetError> {
        let bad = |m: &str| Err(BudgetError::InvalidSpec(self.name.clone(), m.to_string()));
        if let Some((lo, hi)) = self.range {
            if !(lo < hi) {
                return bad("degenerate range");
            }
        }
        for f in [
            SpecField::Resolution,
            SpecField::CalibrationError,
            SpecField::Stability,
            SpecField::FinalAccuracy,
            SpecField::DeclaredError,
            SpecField::TypeTestError,
        ] {
            if let Some(v) = self.field(f) {
                if !(v >= 0.0) {
                    return bad(&format!("{f} is negative"));
                }
            }
        }
        Ok(())
    }
}

/// A measured error with its units.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub units: String,
}

impl Measured {
    pub fn new(value: f64, units: &str) -> Self {
        Self {
            value,
            units: units.to_string(),
        }
    }
}

/// Outcome of a limit check. `margin = limit - |value|`; pass iff margin ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
    pub margin: f64,
}

impl Verdict {
    fn against(value: f64, limit: f64) -> Self {
        let margin = limit - value.abs();
        Self {
            pass: value.abs() <= limit,
            value,
            limit,
            margin,
        }
    }
}

/// Checks `|measured| ≤ spec.field` (boundary inclusive).
pub fn check_conformance(
    measured: &Measured,
    spec: &ChannelSpec,
    field: SpecField,
) -> Result<Verdict, BudgetError> {
    if measured.units.trim() != spec.units.trim() {
        return Err(BudgetError::UnitMismatch {
            measured: measured.units.clone(),
            spec: spec.name.clone(),
            expected: spec.units.clone(),
        });
    }
    let limit = spec.require(field)?;
    Ok(Verdict::against(measured.value, limit))
}

/// Additive budget of a sensor row: final accuracy = calibration error + stability.
///
/// Equality is judged to 1e-12 of the final accuracy, which absorbs binary
/// representation of the decimal table values and nothing else.
pub fn additive_consistency(spec: &ChannelSpec) -> Result<Verdict, BudgetError> {
    let cal = spec.require(SpecField::CalibrationError)?;
    let stab = spec.require(SpecField::Stability)?;
    let fin = spec.require(SpecField::FinalAccuracy)?;
    let sum = cal + stab;
    let diff = fin - sum;
    Ok(Verdict {
        pass: diff.abs() <= 1e-12 * fin.abs().max(f64::MIN_POSITIVE),
        value: sum,
        limit: fin,
        margin: diff,
    })
}

pub const SPEC_HEADER: [&str; 11] = [
    "name",
    "quantity",
    "range_min",
    "range_max",
    "units",
    "resolution",
    "calibration_error",
    "stability",
    "final_accuracy",
    "declared_error",
    "type_test_error",
];

/// SVP profiler channels: calibration error, stability and final accuracy.
pub const PROFILER_SENSORS_CSV: &str = include_str!("../data/profiler_sensors.csv");
/// ISZ-1 profiler channels with declared errors.
pub const ISZ1_PROFILER_CSV: &str = include_str!("../data/isz1_profiler.csv");
/// Commercial sound-speed meters: declared vs type-test errors.
pub const SOUND_SPEED_METERS_CSV: &str = include_str!("../data/sound_speed_meters.csv");

fn opt(s: &str) -> Result<Option<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|e| format!("`{s}`: {e}"))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Reads a spec database CSV.
pub fn read_specs<R: Read>(input: R) -> Result<Vec<ChannelSpec>, BudgetError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| BudgetError::Parse("line 1: empty spec file".into()))?
        .map_err(|e| BudgetError::Parse(format!("line 1: {e}")))?;
    if header.iter().collect::<Vec<_>>() != SPEC_HEADER {
        return Err(BudgetError::Parse(format!(
            "line 1: expected header `{}`",
            SPEC_HEADER.join(",")
        )));
    }
    let mut specs = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let ctx = |m: String| BudgetError::Parse(format!("line {line}: {m}"));
        let rec = rec.map_err(|e| ctx(e.to_string()))?;
        if rec.len() != SPEC_HEADER.len() {
            return Err(ctx(format!("expected {} fields, got {}", SPEC_HEADER.len(), rec.len())));
        }
        let range = match (opt(&rec[2]).map_err(ctx)?, opt(&rec[3]).map_err(ctx)?) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            _ => return Err(ctx("range needs both ends or neither".into())),
        };
        let spec = ChannelSpec {
            name: rec[0].to_string(),
            quantity: rec[1].parse().map_err(|e: BudgetError| ctx(e.to_string()))?,
            range,
            units: rec[4].to_string(),
            resolution: opt(&rec[5]).map_err(ctx)?,
            calibration_error: opt(&rec[6]).map_err(ctx)?,
            stability: opt(&rec[7]).map_err(ctx)?,
            final_accuracy: opt(&rec[8]).map_err(ctx)?,
            declared_error: opt(&rec[9]).map_err(ctx)?,
            type_test_error: opt(&rec[10]).map_err(ctx)?,
        };
        spec.validate().map_err(|e| ctx(e.to_string()))?;
        specs.push(spec);
    }
    Ok(specs)
}

/// Writes a spec database CSV (inverse of [`read_specs`]).
pub fn write_specs<W: Write>(specs: &[ChannelSpec], out: W) -> Result<(), BudgetError> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| BudgetError::Parse(e.to_string());
    wtr.write_record(SPEC_HEADER).map_err(io)?;
    for s in specs {
        let (lo, hi) = match s.range {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        wtr.write_record([
            s.name.clone(),
            s.quantity.to_string(),
            fmt_opt(lo),
            fmt_opt(hi),
            s.units.clone(),
            fmt_opt(s.resolution),
            fmt_opt(s.calibration_error),
            fmt_opt(s.stability),
            fmt_opt(s.final_accuracy),
            fmt_opt(s.declared_error),
            fmt_opt(s.type_test_error),
        ])
        .map_err(io)?;
    }
    wtr.flush().map_err(|e| BudgetError::Parse(e.to_string()))
}

pub fn bundled_specs() -> Vec<ChannelSpec> {
    [PROFILER_SENSORS_CSV, ISZ1_PROFILER_CSV, SOUND_SPEED_METERS_CSV]
        .iter()
        .flat_map(|t| read_specs(t.as_bytes()).expect("bundled spec fixtures parse"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn find<'a>(specs: &'a [ChannelSpec], prefix: &str) -> &'a ChannelSpec {
        specs.iter().find(|s| s.name.starts_with(prefix)).unwrap()
    }

    #[test]
    fn type_a_cases() {
        assert_eq!(type_a(&[1482.3; 15], TypeAMode::SampleStd).unwrap(), 0.0);
        assert_abs_diff_eq!(type_a(&[-1.0, 1.0], TypeAMode::SampleStd).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(type_a(&[-1.0, 1.0], TypeAMode::StandardErrorOfMean).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(type_a(&[1.0], TypeAMode::SampleStd), Err(BudgetError::TooFewSamples(1)));

        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let normal = Normal::new(1500.0, 0.005).unwrap();
        let draws: Vec<f64> = (0..15).map(|_| normal.sample(&mut rng)).collect();
        let u = type_a(&draws, TypeAMode::SampleStd).unwrap();
        assert!((0.0025..=0.0085).contains(&u), "{u}");
    }

    #[test]
    fn combine_and_expand() {
        let uc = combine(0.005, &[0.02]).unwrap();
        assert_abs_diff_eq!(uc, 0.020616, epsilon = 1e-6);
        assert_abs_diff_eq!(expand(uc, 2.0).unwrap(), 0.041231, epsilon = 1e-6);
        assert_eq!(combine(0.0, &[]).unwrap(), 0.0);
        assert_abs_diff_eq!(combine(3.0, &[4.0]).unwrap(), 5.0, epsilon = 1e-15);
        assert!(combine(0.1, &[-0.1]).is_err());
        assert_eq!(expand(0.0, 3.0).unwrap(), 0.0);
        assert_abs_diff_eq!(expand(SECONDARY_STANDARD.rms_deviation, 2.0).unwrap(), 0.10, epsilon = 1e-15);
        assert!(expand(0.1, 0.0).is_err());
    }

    #[test]
    fn primary_standard_scenario() {
        let normal = Normal::new(1482.0, 0.005).unwrap();
        let mut inside = 0;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..15).map(|_| normal.sample(&mut rng)).collect();
            let b = UncertaintyBudget::from_samples(&xs, vec![("B".into(), 0.02)], 2.0, TypeAMode::SampleStd)
                .unwrap();
            if (0.040..=0.043).contains(&b.expanded) {
                inside += 1;
            }
        }
        assert!(inside >= 950, "{inside}");
    }

    #[test]
    fn conformance_against_tables() {
        let specs = bundled_specs();
        let svp20 = find(&specs, "SVP-20");
        let v = check_conformance(&Measured::new(0.6, "m/s"), svp20, SpecField::DeclaredError).unwrap();
        assert!(!v.pass);
        assert_abs_diff_eq!(v.margin, -0.35, epsilon = 1e-12);

        let isz = find(&specs, "ISZ-1 sound speed");
        let v = check_conformance(&Measured::new(0.02, "m/s"), isz, SpecField::DeclaredError).unwrap();
        assert!(v.pass);
        assert_eq!(v.margin, 0.0);

        assert!(check_conformance(&Measured::new(0.0, "m/s"), isz, SpecField::DeclaredError).unwrap().pass);
        assert!(matches!(
            check_conformance(&Measured::new(0.01, "°C"), isz, SpecField::DeclaredError),
            Err(BudgetError::UnitMismatch { .. })
        ));
        assert!(matches!(
            check_conformance(&Measured::new(0.01, "m/s"), isz, SpecField::Stability),
            Err(BudgetError::MissingField { .. })
        ));
    }

    #[test]
    fn sensor_rows_are_additive() {
        let specs = read_specs(PROFILER_SENSORS_CSV.as_bytes()).unwrap();
        let sensors: Vec<_> = specs.iter().filter(|s| s.name.starts_with("Sensor")).collect();
        assert_eq!(sensors.len(), 3);
        for s in sensors {
            assert!(additive_consistency(s).unwrap().pass, "{}", s.name);
        }
        let fake = ChannelSpec {
            calibration_error: Some(0.01),
            stability: Some(0.01),
            final_accuracy: Some(0.03),
            ..specs[0].clone()
        };
        assert!(!additive_consistency(&fake).unwrap().pass);
        assert!(additive_consistency(&specs[3]).is_err());
    }

    #[test]
    fn fixtures_round_trip_byte_identical() {
        for text in [PROFILER_SENSORS_CSV, ISZ1_PROFILER_CSV, SOUND_SPEED_METERS_CSV] {
            let specs = read_specs(text.as_bytes()).unwrap();
            let mut out = Vec::new();
            write_specs(&specs, &mut out).unwrap();
            assert_eq!(String::from_utf8(out).unwrap(), text);
        }
    }

    #[test]
    fn malformed_spec_rows() {
        let hdr = SPEC_HEADER.join(",");
        let bad_range = format!("{hdr}\nx,sound_speed,5,5,m/s,,,,,0.1,\n");
        assert!(read_specs(bad_range.as_bytes()).is_err());
        let neg = format!("{hdr}\nx,sound_speed,,,m/s,,,,,-0.1,\n");
        assert!(read_specs(neg.as_bytes()).unwrap_err().to_string().contains("line 2"));
        assert!(read_specs("a,b\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn combine_permutation_invariant_and_monotone(
            ua in 0.0f64..1.0,
            mut ub in proptest::collection::vec(0.0f64..1.0, 0..6),
            bump in 0.0f64..0.5,
            k in 0.1f64..5.0,
        ) {
            let a = combine(ua, &ub).unwrap();
            let mut rev = ub.clone();
            rev.reverse();
            prop_assert!((combine(ua, &rev).unwrap() - a).abs() <= 1e-15 * a.max(1.0));
            if !ub.is_empty() {
                ub[0] += bump;
                prop_assert!(combine(ua, &ub).unwrap() >= a);
            }
            let u1 = expand(a, k).unwrap();
            let u2 = expand(a, 2.0 * k).unwrap();
            prop_assert!((u2 - 2.0 * u1).abs() <= 1e-15 * u2.max(1e-300));
        }
    }
}
