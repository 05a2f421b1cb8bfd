//! Suspended-solids / oil-in-water calibration curves.
//!
//! A sample set holds up to 16 (reading, concentration) pairs, each of which
//! can be disabled without being deleted. Enabled samples produce either a
//! piecewise-linear lookup table or a least-squares polynomial of degree 1–4
//! mapping instrument reading to concentration in ppm.

use std::io::Read;

use thiserror::Error;

use crate::polyfit::{self, FitError, NormalizedPoly};

pub const MAX_SAMPLES: usize = 16;
pub const MIN_DEGREE: usize = 1;
pub const MAX_DEGREE: usize = 4;
/// Relative extension of the polynomial domain still accepted by [`concentration`].
pub const POLY_EXTENSION: f64 = 0.05;

/// Diatomaceous-earth full scale: 2.0 g in 2 L.
pub const FULL_SCALE_PPM: f64 = 1000.0;
/// The usual five-point dilution series.
pub const STANDARD_FRACTIONS: [f64; 5] = [1.0, 0.75, 0.5, 0.25, 0.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TurbidityError {
    #[error("sample set is full ({MAX_SAMPLES} samples)")]
    TooManySamples,
    #[error("dilution fraction {0} outside [0, 1]")]
    Fraction(f64),
    #[error("polynomial degree {0} outside [1, 4]")]
    Degree(usize),
    #[error("need at least {needed} enabled samples, have {have}")]
    TooFewSamples { needed: usize, have: usize },
    #[error("duplicate reading {0} among enabled samples")]
    DuplicateReading(f64),
    #[error("reading {reading} is outside the curve domain [{min}, {max}]")]
    OutOfDomain { reading: f64, min: f64, max: f64 },
    #[error("invalid sample: {0}")]
    Sample(String),
    #[error("fit: {0}")]
    Fit(#[from] FitError),
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub reading: f64,
    pub concentration: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleSet {
    samples: Vec<Sample>,
}

impl SampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, reading: f64, concentration: f64) -> Result<usize, TurbidityError> {
        self.push_sample(Sample {
            reading,
            concentration,
            enabled: true,
        })
    }

    pub fn push_sample(&mut self, s: Sample) -> Result<usize, TurbidityError> {
        if self.samples.len() >= MAX_SAMPLES {
            return Err(TurbidityError::TooManySamples);
        }
        if !(s.concentration >= 0.0) || !s.reading.is_finite() {
            return Err(TurbidityError::Sample(format!(
                "reading {} / concentration {} ppm",
                s.reading, s.concentration
            )));
        }
        self.samples.push(s);
        Ok(self.samples.len() - 1)
    }

    pub fn set_enabled(&mut self, index: usize, enabled: bool) {
        self.samples[index].enabled = enabled;
    }

    /// Replaces a sample in place.
    pub fn edit(&mut self, index: usize, reading: f64, concentration: f64) {
        let s = &mut self.samples[index];
        s.reading = reading;
        s.concentration = concentration;
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn enabled(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.enabled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    Lookup,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CalCurve {
    /// Nodes strictly increasing in reading.
    Lookup { nodes: Vec<(f64, f64)> },
    Polynomial {
        poly: NormalizedPoly,
        domain: (f64, f64),
    },
}

impl CalCurve {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            CalCurve::Lookup { nodes } => (nodes[0].0, nodes[nodes.len() - 1].0),
            CalCurve::Polynomial { domain, .. } => *domain,
        }
    }

    /// Polynomial coefficients in ascending powers of the raw reading.
    pub fn raw_coefficients(&self) -> Option<Vec<f64>> {
        match self {
            CalCurve::Polynomial { poly, .. } => Some(poly.raw_coefficients()),
            CalCurve::Lookup { .. } => None,
        }
    }
}

/// `full_scale · fraction` for each fraction.
pub fn dilution_series(full_scale_ppm: f64, fractions: &[f64]) -> Result<Vec<f64>, TurbidityError> {
    fractions
        .iter()
        .map(|&f| {
            if (0.0..=1.0).contains(&f) {
                Ok(full_scale_ppm * f)
            } else {
                Err(TurbidityError::Fraction(f))
            }
        })
        .collect()
}

/// Mass concentration in ppm (mg/L) of `mass_g` grams dispersed in `volume_l` litres.
pub fn mass_to_ppm(mass_g: f64, volume_l: f64) -> f64 {
    mass_g * 1000.0 / volume_l
}

pub fn fit_curve(set: &SampleSet, mode: CurveMode, degree: usize) -> Result<CalCurve, TurbidityError> {
    if mode == CurveMode::Polynomial && !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
        return Err(TurbidityError::Degree(degree));
    }
    let mut nodes: Vec<(f64, f64)> = set.enabled().map(|s| (s.reading, s.concentration)).collect();
    nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if let Some(w) = nodes.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(TurbidityError::DuplicateReading(w[0].0));
    }
    let needed = match mode {
        CurveMode::Lookup => 2,
        CurveMode::Polynomial => degree + 1,
    };
    if nodes.len() < needed {
        return Err(TurbidityError::TooFewSamples {
            needed,
            have: nodes.len(),
        });
    }
    match mode {
        CurveMode::Lookup => Ok(CalCurve::Lookup { nodes }),
        CurveMode::Polynomial => {
            let x: Vec<f64> = nodes.iter().map(|n| n.0).collect();
            let y: Vec<f64> = nodes.iter().map(|n| n.1).collect();
            let poly = polyfit::fit(&x, &y, degree)?;
            Ok(CalCurve::Polynomial {
                poly,
                domain: (x[0], x[x.len() - 1]),
            })
        }
    }
}

/// Concentration for a reading. `clamped` is set when a lookup curve had to
/// hold its end value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concentration {
    pub ppm: f64,
    pub clamped: bool,
}

pub fn concentration(curve: &CalCurve, reading: f64) -> Result<Concentration, TurbidityError> {
    let (min, max) = curve.domain();
    match curve {
        CalCurve::Lookup { nodes } => {
            if reading <= min {
                return Ok(Concentration {
                    ppm: nodes[0].1,
                    clamped: reading < min,
                });
            }
            if reading >= max {
                return Ok(Concentration {
                    ppm: nodes[nodes.len() - 1].1,
                    clamped: reading > max,
                });
            }
            let i = nodes.partition_point(|n| n.0 <= reading);
            let (x0, y0) = nodes[i - 1];
            let (x1, y1) = nodes[i];
            let ppm = if reading == x0 {
                y0
            } else {
                y0 + (y1 - y0) * (reading - x0) / (x1 - x0)
            };
            Ok(Concentration {
                ppm,
                clamped: false,
            })
        }
        CalCurve::Polynomial { poly, .. } => {
            let ext = POLY_EXTENSION * (max - min);
            if !(reading >= min - ext && reading <= max + ext) {
                return Err(TurbidityError::OutOfDomain { reading, min, max });
            }
            Ok(Concentration {
                ppm: poly.eval(reading),
                clamped: false,
            })
        }
    }
}

/// Per-limit pass/fail of a relative error against the device spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceVerdict {
    pub reduced_error_pass: bool,
    pub sensitivity_pass: bool,
}

/// Device accuracy limits, percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceSpec {
    pub reduced_error: f64,
    pub sensitivity: f64,
}

impl Default for DeviceSpec {
    fn default() -> Self {
        Self {
            reduced_error: 4.0,
            sensitivity: 2.0,
        }
    }
}

/// `|measured| ≤ limit` for each limit, boundary inclusive.
pub fn check_device_spec(measured_rel_error_pct: f64, spec: &DeviceSpec) -> DeviceVerdict {
    let m = measured_rel_error_pct.abs();
    DeviceVerdict {
        reduced_error_pass: m <= spec.reduced_error,
        sensitivity_pass: m <= spec.sensitivity,
    }
}

/// Reads `reading,concentration_ppm,enabled` rows.
pub fn read_samples<R: Read>(input: R) -> Result<SampleSet, TurbidityError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| TurbidityError::Parse("line 1: empty sample file".into()))?
        .map_err(|e| TurbidityError::Parse(format!("line 1: {e}")))?;
    if header.iter().collect::<Vec<_>>() != ["reading", "concentration_ppm", "enabled"] {
        return Err(TurbidityError::Parse(
            "line 1: expected header `reading,concentration_ppm,enabled`".into(),
        ));
    }
    let mut set = SampleSet::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let ctx = |m: String| TurbidityError::Parse(format!("line {line}: {m}"));
        let rec = rec.map_err(|e| ctx(e.to_string()))?;
        if rec.len() != 3 {
            return Err(ctx(format!("expected 3 fields, got {}", rec.len())));
        }
        let reading: f64 = rec[0].trim().parse().map_err(|e| ctx(format!("reading: {e}")))?;
        let concentration: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|e| ctx(format!("concentration_ppm: {e}")))?;
        let enabled = match rec[2].trim() {
            "1" => true,
            "0" => false,
            other => return Err(ctx(format!("enabled must be 0 or 1, got `{other}`"))),
        };
        set.push_sample(Sample {
            reading,
            concentration,
            enabled,
        })
        .map_err(|e| ctx(e.to_string()))?;
    }
    Ok(set)
}
