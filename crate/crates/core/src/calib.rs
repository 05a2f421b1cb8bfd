//! Thermostat calibration of the timing channel.
//!
//! The instrument sits in deaerated distilled water at a series of
//! temperatures; at each level its code `N` is logged. The reference curve
//! turns every temperature into a speed, and a least-squares polynomial
//! `c = p(N)` becomes the instrument's calibration.

use std::io::{Read, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::channel::{
    self, code_from_time, correlate_delay_refined, echo_gates, synthesize_echoes, ChannelError,
    ChannelGeometry, SynthesisConfig, TimingCode,
};
use crate::polyfit::{self, FitError, NormalizedPoly};
use crate::refmodel::{RefModelError, ReferenceCurve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibError {
    #[error(transparent)]
    Reference(#[from] RefModelError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("underdetermined fit: {points} distinct codes for degree {degree}")]
    Underdetermined { points: usize, degree: usize },
    #[error("conditioning: {0}")]
    Conditioning(String),
    #[error("code {code} is outside the model domain [{min}, {max}] beyond the {band} tolerance band")]
    Extrapolation {
        code: f64,
        min: f64,
        max: f64,
        band: f64,
    },
    #[error("replicates must be >= 1")]
    Replicates,
    #[error("degree must be >= 1")]
    Degree,
    #[error("{0}")]
    Parse(String),
}

impl From<FitError> for CalibError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::Underdetermined { points, degree } => {
                CalibError::Underdetermined { points, degree }
            }
            FitError::Conditioning(m) => CalibError::Conditioning(m),
        }
    }
}

/// Default thermostat grid: seven levels across 4–28 °C.
pub const DEFAULT_TEMPERATURES: [f64; 7] = [4.0, 8.0, 12.0, 16.0, 20.0, 24.0, 28.0];

/// Default regression degree.
pub const DEFAULT_DEGREE: usize = 3;

/// Relative band beyond the fitted code range inside which `predict` still answers.
pub const DEFAULT_EXTRAPOLATION_BAND: f64 = 0.02;

/// Simulated instrument: a channel geometry plus the signal chain that times it.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    pub geometry: ChannelGeometry,
    pub synthesis: SynthesisConfig,
    /// Attenuation of the liquid, Np/m.
    pub alpha_np: f64,
    /// Counter jitter expressed as an equivalent speed standard deviation, m/s.
    pub speed_noise: f64,
    /// Envelope threshold used to gate the echoes.
    pub gate_threshold: f64,
}

impl Instrument {
    pub fn new(geometry: ChannelGeometry) -> Self {
        Self {
            geometry,
            synthesis: SynthesisConfig::for_geometry(&geometry),
            alpha_np: 0.0,
            speed_noise: 0.0,
            gate_threshold: 0.5,
        }
    }

    /// Timing standard deviation equivalent to a speed standard deviation at `c`.
    pub fn jitter_for_speed_noise(&self, c: f64, sigma_c: f64) -> f64 {
        2.0 * self.geometry.base() * sigma_c / (c * c)
    }

    /// Echo-pair interval for one shot at speed `c`, s.
    pub fn measure_interval(&self, c: f64, seed: u64) -> Result<f64, ChannelError> {
        let cfg = SynthesisConfig {
            seed,
            ..self.synthesis
        };
        let w = synthesize_echoes(&self.geometry, c, self.alpha_np, &cfg)?;
        let (g1, g2) = echo_gates(&w, self.gate_threshold)?;
        let mut dt = correlate_delay_refined(&w, g1, g2)?;
        if self.speed_noise > 0.0 {
            let sigma_t = self.jitter_for_speed_noise(c, self.speed_noise);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
            dt += Normal::new(0.0, sigma_t)
                .expect("finite jitter")
                .sample(&mut rng);
        }
        Ok(dt.max(0.0))
    }

    pub fn measure_code(&self, c: f64, seed: u64) -> Result<TimingCode, ChannelError> {
        code_from_time(self.measure_interval(c, seed)?, &self.geometry)
    }
}

/// One logged replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub timestamp: u64,
    pub temperature: f64,
    pub code: u64,
}

/// Averaged observation at one thermostat level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub temperature: f64,
    /// Mean code over replicates.
    pub code: f64,
    pub replicates: usize,
    /// Sample standard deviation of replicate codes (0 for one replicate).
    pub code_std: f64,
}

/// Synthetic epoch for log timestamps, s (2020-04-12T00:00:00Z).
const LOG_EPOCH: u64 = 1_586_649_600;

/// Runs the thermostat protocol and returns the raw replicate log.
pub fn run_protocol_log(
    instrument: &Instrument,
    reference: &ReferenceCurve,
    temperatures: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<LogRow>, CalibError> {
    if replicates == 0 {
        return Err(CalibError::Replicates);
    }
    let speeds = temperatures
        .iter()
        .map(|&t| reference.speed(t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = LOG_EPOCH + (seed % 100_000) * 86_400;
    let mut rows = Vec::with_capacity(temperatures.len() * replicates);
    for (&t, &c) in temperatures.iter().zip(&speeds) {
        for _ in 0..replicates {
            let code = instrument.measure_code(c, rng.next_u64())?;
            rows.push(LogRow {
                timestamp: start + 60 * rows.len() as u64,
                temperature: t,
                code: code.get(),
            });
        }
    }
    Ok(rows)
}

/// Groups replicate rows by temperature, in order of first appearance.
pub fn aggregate(rows: &[LogRow]) -> Vec<CalibrationPoint> {
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|g| g.0 == r.temperature) {
            Some(g) => g.1.push(r.code as f64),
            None => groups.push((r.temperature, vec![r.code as f64])),
        }
    }
    groups
        .into_iter()
        .map(|(temperature, codes)| {
            let n = codes.len();
            let mean = codes.iter().sum::<f64>() / n as f64;
            let code_std = if n > 1 {
                (codes.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            CalibrationPoint {
                temperature,
                code: mean,
                replicates: n,
                code_std,
            }
        })
        .collect()
}

/// Runs the protocol and averages replicates per level.
pub fn run_protocol(
    instrument: &Instrument,
    reference: &ReferenceCurve,
    temperatures: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<CalibrationPoint>, CalibError> {
    Ok(aggregate(&run_protocol_log(
        instrument,
        reference,
        temperatures,
        replicates,
        seed,
    )?))
}

/// Calibration polynomial c = p(N).
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    poly: NormalizedPoly,
    pub rmse: f64,
    pub domain: (f64, f64),
    pub extrapolation_band: f64,
}

impl RegressionModel {
    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    /// Coefficients in the normalized code `u = (N - center) / scale`.
    pub fn coefficients(&self) -> &[f64] {
        &self.poly.coefficients
    }

    pub fn code_center(&self) -> f64 {
        self.poly.center
    }

    pub fn code_scale(&self) -> f64 {
        self.poly.scale
    }

    /// Speed in m/s at code `n`.
    pub fn predict(&self, n: f64) -> Result<f64, CalibError> {
        let (min, max) = self.domain;
        let band = self.extrapolation_band;
        if !(n >= min * (1.0 - band) && n <= max * (1.0 + band)) {
            return Err(CalibError::Extrapolation {
                code: n,
                min,
                max,
                band,
            });
        }
        Ok(self.poly.eval(n))
    }

    /// Writes `degree,code_center,code_scale,c0,...,cD,rmse` and one data row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let d = self.degree();
        let mut header = vec!["degree".to_string(), "code_center".into(), "code_scale".into()];
        header.extend((0..=d).map(|i| format!("c{i}")));
        header.push("rmse".into());
        writeln!(out, "{}", header.join(","))?;
        let mut row = vec![d.to_string(), self.poly.center.to_string(), self.poly.scale.to_string()];
        row.extend(self.poly.coefficients.iter().map(|c| c.to_string()));
        row.push(self.rmse.to_string());
        writeln!(out, "{}", row.join(","))
    }

    /// Reads a model file; the domain is recovered as `center ± scale`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, CalibError> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr
            .headers()
            .map_err(|e| CalibError::Parse(e.to_string()))?
            .clone();
        let rec = rdr
            .records()
            .next()
            .ok_or_else(|| CalibError::Parse("model file has no data row".into()))?
            .map_err(|e| CalibError::Parse(e.to_string()))?;
        let field = |name: &str| -> Result<f64, CalibError> {
            let i = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CalibError::Parse(format!("missing column `{name}`")))?;
            rec[i]
                .trim()
                .parse()
                .map_err(|e| CalibError::Parse(format!("column `{name}`: {e}")))
        };
        let degree = field("degree")? as usize;
        let center = field("code_center")?;
        let scale = field("code_scale")?;
        let coefficients = (0..=degree)
            .map(|i| field(&format!("c{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            poly: NormalizedPoly {
                center,
                scale,
                coefficients,
            },
            rmse: field("rmse")?,
            domain: (center - scale, center + scale),
            extrapolation_band: DEFAULT_EXTRAPOLATION_BAND,
        })
    }
}

/// Least-squares fit of reference speed against mean code.
pub fn fit_speed_vs_code(
    points: &[CalibrationPoint],
    reference: &ReferenceCurve,
    degree: usize,
) -> Result<RegressionModel, CalibError> {
    if degree == 0 {
        return Err(CalibError::Degree);
    }
    let codes: Vec<f64> = points.iter().map(|p| p.code).collect();
    let speeds = points
        .iter()
        .map(|p| reference.speed(p.temperature))
        .collect::<Result<Vec<_>, _>>()?;
    fit_pairs(&codes, &speeds, degree)
}

/// Fits `c = p(N)` directly on (code, speed) pairs.
pub fn fit_pairs(codes: &[f64], speeds: &[f64], degree: usize) -> Result<RegressionModel, CalibError> {
    for i in 0..codes.len() {
        for j in (i + 1)..codes.len() {
            if codes[i] == codes[j] && speeds[i] != speeds[j] {
                return Err(CalibError::Conditioning(format!(
                    "code {} repeated with speeds {} and {} m/s",
                    codes[i], speeds[i], speeds[j]
                )));
            }
        }
    }
    let poly = polyfit::fit(codes, speeds, degree)?;
    let ss: f64 = codes
        .iter()
        .zip(speeds)
        .map(|(&n, &c)| (poly.eval(n) - c).powi(2))
        .sum();
    let rmse = (ss / codes.len() as f64).sqrt();
    let min = codes.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = codes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(RegressionModel {
        poly,
        rmse,
        domain: (min, max),
        extrapolation_band: DEFAULT_EXTRAPOLATION_BAND,
    })
}

/// Δc_i = p(N_i) - c_ref(T_i), paired with T_i.
pub fn residuals(
    model: &RegressionModel,
    points: &[CalibrationPoint],
    reference: &ReferenceCurve,
) -> Result<Vec<(f64, f64)>, CalibError> {
    points
        .iter()
        .map(|p| Ok((p.temperature, model.predict(p.code)? - reference.speed(p.temperature)?)))
        .collect()
}

/// Speed from the channel's own closed form, for comparison with the fit.
pub fn closed_form_speed(code: f64, geom: &ChannelGeometry) -> Result<f64, CalibError> {
    Ok(channel::speed_from_mean_code(code, geom)?)
}

/// Reads a `timestamp,temperature_C,code_N` calibration log.
pub fn read_log<R: Read>(input: R) -> Result<Vec<LogRow>, CalibError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| CalibError::Parse("line 1: empty calibration log".into()))?
        .map_err(|e| CalibError::Parse(format!("line 1: {e}")))?;
    if header.iter().collect::<Vec<_>>() != ["timestamp", "temperature_C", "code_N"] {
        return Err(CalibError::Parse(
            "line 1: expected header `timestamp,temperature_C,code_N`".into(),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CalibError::Parse(format!("line {line}: {e}")))?;
        if rec.len() != 3 {
            return Err(CalibError::Parse(format!("line {line}: expected 3 fields, got {}", rec.len())));
        }
        let bad = |what: &str, e: &dyn std::fmt::Display| {
            CalibError::Parse(format!("line {line}: {what}: {e}"))
        };
        rows.push(LogRow {
            timestamp: rec[0].trim().parse().map_err(|e| bad("timestamp", &e))?,
            temperature: rec[1].trim().parse().map_err(|e| bad("temperature_C", &e))?,
            code: rec[2].trim().parse().map_err(|e| bad("code_N", &e))?,
        });
    }
    if rows.is_empty() {
        return Err(CalibError::Parse("calibration log has no data rows".into()));
    }
    Ok(rows)
}

pub fn write_log<W: Write>(rows: &[LogRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "timestamp,temperature_C,code_N")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.timestamp, r.temperature, r.code)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::velocity_quantization;
    use approx::assert_abs_diff_eq;

    fn reference() -> ReferenceCurve {
        ReferenceCurve::default()
    }

    fn exact_points(geom: &ChannelGeometry, temps: &[f64]) -> Vec<CalibrationPoint> {
        temps
            .iter()
            .map(|&t| CalibrationPoint {
                temperature: t,
                code: 2.0 * geom.base() / (reference().speed(t).unwrap() * geom.timer_resolution),
                replicates: 1,
                code_std: 0.0,
            })
            .collect()
    }

    #[test]
    fn noiseless_protocol() {
        let inst = Instrument::new(ChannelGeometry::default());
        let pts = run_protocol(&inst, &reference(), &DEFAULT_TEMPERATURES, 3, 42).unwrap();
        assert_eq!(pts.len(), 7);
        assert!(pts.iter().all(|p| p.code_std == 0.0 && p.replicates == 3));

        let at20 = pts.iter().find(|p| p.temperature == 20.0).unwrap();
        let c = reference().speed(20.0).unwrap();
        assert_abs_diff_eq!(c, 1482.34, epsilon = 0.01);
        let expected = (2.0 * inst.geometry.base() / (c * inst.geometry.timer_resolution)).floor();
        assert!((at20.code - expected).abs() <= 1.0, "{} vs {}", at20.code, expected);

        assert!(run_protocol(&inst, &reference(), &[], 1, 0).unwrap().is_empty());
        assert!(run_protocol(&inst, &reference(), &[45.0], 1, 0).is_err());
        assert!(run_protocol(&inst, &reference(), &[20.0], 0, 0).is_err());
    }

    #[test]
    fn electronic_delay_cancels() {
        let mut codes = Vec::new();
        for tau in [0.0, 1e-6, 10e-6] {
            let geom = ChannelGeometry {
                electronic_delay: tau,
                ..ChannelGeometry::default()
            };
            codes.push(Instrument::new(geom).measure_code(1482.0, 1).unwrap());
        }
        assert_eq!(codes[0], codes[1]);
        assert_eq!(codes[0], codes[2]);
    }

    #[test]
    fn exact_inverse_law_cubic_residual() {
        // Independent oracle (QR least squares on the same normalized design, run
        // offline in double precision): cubic rmse on the 7-level grid is 8.929e-5 m/s.
        let geom = ChannelGeometry::default();
        let pts = exact_points(&geom, &DEFAULT_TEMPERATURES);
        let cubic = fit_speed_vs_code(&pts, &reference(), 3).unwrap();
        assert_abs_diff_eq!(cubic.rmse, 8.929e-5, epsilon = 0.01e-5);
        // Quintic resolves the inverse law below a micrometre per second.
        let quintic = fit_speed_vs_code(&pts, &reference(), 5).unwrap();
        assert!(quintic.rmse < 1e-6);
        for (_, dc) in residuals(&quintic, &pts, &reference()).unwrap() {
            assert!(dc.abs() < 1e-6);
        }
        for p in &pts {
            assert_abs_diff_eq!(quintic.predict(p.code).unwrap(), reference().speed(p.temperature).unwrap(), epsilon = 1e-6);
        }
    }

    #[test]
    fn underdetermined_and_conflicting() {
        let geom = ChannelGeometry::default();
        let pts = exact_points(&geom, &[4.0, 8.0, 12.0]);
        assert!(matches!(
            fit_speed_vs_code(&pts, &reference(), 3),
            Err(CalibError::Underdetermined { .. })
        ));
        let r = fit_pairs(&[1.0, 1.0, 2.0, 3.0], &[5.0, 6.0, 7.0, 8.0], 1);
        assert!(matches!(r, Err(CalibError::Conditioning(_))));
    }

    #[test]
    fn residual_rms_is_rmse_and_mean_is_zero() {
        let inst = Instrument {
            speed_noise: 0.01,
            ..Instrument::new(ChannelGeometry::default())
        };
        let pts = run_protocol(&inst, &reference(), &DEFAULT_TEMPERATURES, 1, 5).unwrap();
        let model = fit_speed_vs_code(&pts, &reference(), 3).unwrap();
        let res = residuals(&model, &pts, &reference()).unwrap();
        let rms = (res.iter().map(|r| r.1 * r.1).sum::<f64>() / res.len() as f64).sqrt();
        assert_abs_diff_eq!(rms, model.rmse, epsilon = 1e-12);
        let mean = res.iter().map(|r| r.1).sum::<f64>() / res.len() as f64;
        assert!(mean.abs() <= 1e-9 * 1500.0);
    }

    #[test]
    fn held_out_point() {
        let inst = Instrument {
            speed_noise: 0.01,
            ..Instrument::new(ChannelGeometry::default())
        };
        let pts = run_protocol(&inst, &reference(), &DEFAULT_TEMPERATURES, 1, 11).unwrap();
        let model = fit_speed_vs_code(&pts, &reference(), 3).unwrap();
        let held = run_protocol(&inst, &reference(), &[14.0], 1, 12).unwrap();
        let dc = residuals(&model, &held, &reference()).unwrap()[0].1;
        assert!(dc.abs() <= 3.0 * model.rmse, "{dc} vs {}", model.rmse);
    }

    #[test]
    fn predict_domain_and_monotonicity() {
        let geom = ChannelGeometry::default();
        let pts = exact_points(&geom, &DEFAULT_TEMPERATURES);
        let model = fit_speed_vs_code(&pts, &reference(), 3).unwrap();
        let (lo, hi) = model.domain;
        assert!(model.predict(lo * 0.9).is_err());
        assert!(model.predict(hi * 1.05).is_err());
        assert!(model.predict(lo * 0.99).is_ok());
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let c = model.predict(lo + (hi - lo) * i as f64 / 50.0).unwrap();
            assert!(c < prev);
            prev = c;
        }
        let n20 = pts[4].code;
        assert!((model.predict(n20).unwrap() - closed_form_speed(n20, &geom).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn linear_data_recovered() {
        let codes: Vec<f64> = (0..9).map(|i| 3.2e6 + 2.5e4 * i as f64).collect();
        let speeds: Vec<f64> = codes.iter().map(|n| 3000.0 - 4.5e-4 * n).collect();
        let model = fit_pairs(&codes, &speeds, 1).unwrap();
        let raw = model.poly.raw_coefficients();
        assert!(((raw[0] - 3000.0) / 3000.0).abs() < 1e-10);
        assert!(((raw[1] + 4.5e-4) / 4.5e-4).abs() < 1e-10);
    }

    #[test]
    fn least_squares_optimality() {
        let inst = Instrument {
            speed_noise: 0.02,
            ..Instrument::new(ChannelGeometry::default())
        };
        let pts = run_protocol(&inst, &reference(), &DEFAULT_TEMPERATURES, 1, 3).unwrap();
        let model = fit_speed_vs_code(&pts, &reference(), 3).unwrap();
        let ssr = |m: &RegressionModel| -> f64 {
            pts.iter()
                .map(|p| (m.poly.eval(p.code) - reference().speed(p.temperature).unwrap()).powi(2))
                .sum()
        };
        let base = ssr(&model);
        for i in 0..=3 {
            for sign in [-1.0, 1.0] {
                let mut m = model.clone();
                let a = m.poly.coefficients[i];
                m.poly.coefficients[i] = a + sign * 1e-6 * a.abs();
                assert!(ssr(&m) >= base);
            }
        }
    }

    #[test]
    fn code_scaling_invariance() {
        let geom = ChannelGeometry::default();
        let pts = exact_points(&geom, &DEFAULT_TEMPERATURES);
        let model = fit_speed_vs_code(&pts, &reference(), 3).unwrap();
        let scaled: Vec<CalibrationPoint> = pts
            .iter()
            .map(|p| CalibrationPoint {
                code: p.code * 7.5,
                ..*p
            })
            .collect();
        let model2 = fit_speed_vs_code(&scaled, &reference(), 3).unwrap();
        for (p, q) in pts.iter().zip(&scaled) {
            assert_abs_diff_eq!(model.predict(p.code).unwrap(), model2.predict(q.code).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn quantization_bounds_protocol_codes() {
        let geom = ChannelGeometry::default();
        let inst = Instrument::new(geom);
        for t in DEFAULT_TEMPERATURES {
            let c = reference().speed(t).unwrap();
            let code = inst.measure_code(c, 0).unwrap();
            let back = crate::channel::speed_from_code(code, &geom).unwrap();
            assert!((back - c).abs() <= velocity_quantization(&geom, c).unwrap() * 1.01);
        }
    }

    #[test]
    fn model_and_log_files() {
        let inst = Instrument::new(ChannelGeometry::default());
        let rows = run_protocol_log(&inst, &reference(), &[4.0, 16.0, 28.0, 10.0], 2, 9).unwrap();
        let mut buf = Vec::new();
        write_log(&rows, &mut buf).unwrap();
        assert_eq!(read_log(buf.as_slice()).unwrap(), rows);

        let model = fit_speed_vs_code(&aggregate(&rows), &reference(), 2).unwrap();
        let mut mbuf = Vec::new();
        model.write_csv(&mut mbuf).unwrap();
        let text = String::from_utf8(mbuf.clone()).unwrap();
        assert!(text.starts_with("degree,code_center,code_scale,c0,c1,c2,rmse\n2,"));
        let back = RegressionModel::read_csv(mbuf.as_slice()).unwrap();
        assert_eq!(back.coefficients(), model.coefficients());
        assert_eq!(back.domain, model.domain);

        let err = read_log("timestamp,temperature_C,code_N\n1,4,100\n2,x,5\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(read_log("".as_bytes()).is_err());
    }
}
