//! Reference speed of sound in pure water at atmospheric pressure.
//!
//! The default curve is the fifth-degree Del Grosso & Mader polynomial in
//! temperature (°C). Other curves can be loaded from a `degree,coefficient`
//! CSV file and swapped in wherever a [`ReferenceCurve`] is accepted.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

/// Del Grosso & Mader (1972) pure-water coefficients, ascending powers of T [°C] → m/s.
pub const DEL_GROSSO_MADER: [f64; 6] = [
    1402.388,
    5.037_11,
    -5.808_52e-2,
    3.342_0e-4,
    -1.478_00e-6,
    3.146_4e-9,
];

/// Default validity window of the reference curve, °C.
pub const DEFAULT_VALID_RANGE: (f64, f64) = (0.0, 40.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefModelError {
    #[error("temperature {temperature} °C is outside the reference curve range [{min}, {max}] °C")]
    OutOfRange { temperature: f64, min: f64, max: f64 },
    #[error("reference curve needs at least one coefficient")]
    Empty,
    #[error("invalid valid range [{0}, {1}] °C")]
    BadRange(f64, f64),
    #[error("curve file: {0}")]
    Parse(String),
}

/// Polynomial c(T) with an explicit validity window. Never extrapolates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurve {
    coefficients: Vec<f64>,
    valid_range: (f64, f64),
}

impl Default for ReferenceCurve {
    fn default() -> Self {
        Self {
            coefficients: DEL_GROSSO_MADER.to_vec(),
            valid_range: DEFAULT_VALID_RANGE,
        }
    }
}

impl ReferenceCurve {
    pub fn new(coefficients: Vec<f64>, valid_range: (f64, f64)) -> Result<Self, RefModelError> {
        if coefficients.is_empty() {
            return Err(RefModelError::Empty);
        }
        let (lo, hi) = valid_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(RefModelError::BadRange(lo, hi));
        }
        Ok(Self {
            coefficients,
            valid_range,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn valid_range(&self) -> (f64, f64) {
        self.valid_range
    }

    fn check(&self, temperature: f64) -> Result<(), RefModelError> {
        let (min, max) = self.valid_range;
        if temperature.is_nan() || temperature < min || temperature > max {
            return Err(RefModelError::OutOfRange {
                temperature,
                min,
                max,
            });
        }
        Ok(())
    }

    /// Speed of sound c(T) in m/s.
    pub fn speed(&self, temperature: f64) -> Result<f64, RefModelError> {
        self.check(temperature)?;
        Ok(self
            .coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * temperature + a))
    }

    /// Analytic dc/dT in (m/s)/°C.
    pub fn slope(&self, temperature: f64) -> Result<f64, RefModelError> {
        self.check(temperature)?;
        Ok(self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &a)| acc * temperature + i as f64 * a))
    }

    /// Reads a `degree,coefficient` CSV. Missing degrees are zero.
    pub fn from_csv_reader<R: Read>(
        reader: R,
        valid_range: (f64, f64),
    ) -> Result<Self, RefModelError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| RefModelError::Parse(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["degree", "coefficient"] {
            return Err(RefModelError::Parse(
                "expected header `degree,coefficient`".into(),
            ));
        }
        let mut terms: Vec<(usize, f64)> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| RefModelError::Parse(format!("line {line}: {e}")))?;
            let degree: usize = rec[0]
                .trim()
                .parse()
                .map_err(|e| RefModelError::Parse(format!("line {line}: degree: {e}")))?;
            let coef: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|e| RefModelError::Parse(format!("line {line}: coefficient: {e}")))?;
            terms.push((degree, coef));
        }
        let max_degree = terms
            .iter()
            .map(|t| t.0)
            .max()
            .ok_or(RefModelError::Empty)?;
        let mut coefficients = vec![0.0; max_degree + 1];
        for (d, a) in terms {
            coefficients[d] += a;
        }
        Self::new(coefficients, valid_range)
    }

    pub fn from_csv_path(path: &Path, valid_range: (f64, f64)) -> Result<Self, RefModelError> {
        let file = std::fs::File::open(path)
            .map_err(|e| RefModelError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file, valid_range)
    }
}

/// c(T) from the default pure-water curve.
pub fn pure_water_speed(temperature: f64) -> Result<f64, RefModelError> {
    ReferenceCurve::default().speed(temperature)
}

/// dc/dT from the default pure-water curve.
pub fn pure_water_speed_slope(temperature: f64) -> Result<f64, RefModelError> {
    ReferenceCurve::default().slope(temperature)
}
