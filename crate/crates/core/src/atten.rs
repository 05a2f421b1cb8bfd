//! Attenuation from pulse-echo amplitudes and its frequency power law.
//!
//! Attenuation is the fractional amplitude decrease of a plane wave per unit
//! path, in Np/m; the dB/m figure is 8.686 times larger. Across frequency it
//! is summarised as `α(f) = a1 · f^b` with `f` in MHz.

use std::io::Read;

use thiserror::Error;

use crate::channel::{echo_amplitude, ChannelGeometry, WaveformRecord};

/// Neper → decibel conversion factor, 20·log10(e) rounded.
pub const NP_TO_DB: f64 = 8.686;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttenError {
    #[error("received amplitude {amplitude} exceeds lossless level {lossless}: negative attenuation")]
    NegativeAttenuation { amplitude: f64, lossless: f64 },
    #[error("zero received amplitude: attenuation is infinite")]
    InfiniteAttenuation,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("attenuation {0} dB/m at {1} MHz is not positive; log-log fit undefined")]
    NonPositive(f64, f64),
    #[error("power-law fit needs at least 2 distinct frequencies, got {0}")]
    TooFewFrequencies(usize),
    #[error("{0}")]
    Parse(String),
}

/// `α(f) = a1 · f^b`, α in dB/m, f in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuationModel {
    /// Attenuation at 1 MHz, dB/m.
    pub a1: f64,
    pub b: f64,
}

pub fn np_to_db(alpha_np: f64) -> f64 {
    NP_TO_DB * alpha_np
}

pub fn db_to_np(alpha_db: f64) -> f64 {
    alpha_db / NP_TO_DB
}

/// α = -ln(A / (A0·R)) / path, Np/m. `path` is the full round trip.
pub fn estimate_alpha(a0: f64, a: f64, reflection: f64, path: f64) -> Result<f64, AttenError> {
    if !(reflection > 0.0 && reflection <= 1.0) {
        return Err(AttenError::Argument(format!(
            "reflection coefficient must lie in (0, 1], got {reflection}"
        )));
    }
    if !(path > 0.0) || !(a0 > 0.0) {
        return Err(AttenError::Argument(
            "path and reference amplitude must be positive".into(),
        ));
    }
    if a == 0.0 {
        return Err(AttenError::InfiniteAttenuation);
    }
    if !(a > 0.0) {
        return Err(AttenError::Argument(format!("amplitude must be positive, got {a}")));
    }
    let lossless = a0 * reflection;
    if a > lossless {
        return Err(AttenError::NegativeAttenuation {
            amplitude: a,
            lossless,
        });
    }
    Ok(-(a / lossless).ln() / path)
}

/// Attenuation of the liquid from the two echoes of a record.
///
/// The first echo, rescaled by `(1 - R_p)/R_p`, is the reference the second
/// echo would reach over the extra path `2ΔL` in a lossless liquid.
pub fn alpha_from_echoes(
    w: &WaveformRecord,
    geom: &ChannelGeometry,
    t1: f64,
    t2: f64,
) -> Result<f64, AttenError> {
    let a1 = echo_amplitude(w, t1);
    let a2 = echo_amplitude(w, t2);
    let rp = geom.reflection_coeff_partial;
    let a0 = a1 * (1.0 - rp) / rp;
    // Rounding can lift a lossless echo a hair above the reference.
    let lossless = a0 * geom.reflection_coeff_full;
    let a2 = if a2 > lossless && a2 - lossless <= 1e-12 * lossless {
        lossless
    } else {
        a2
    };
    estimate_alpha(a0, a2, geom.reflection_coeff_full, 2.0 * geom.base())
}

/// Least squares on (ln f, ln α).
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<AttenuationModel, AttenError> {
    for &(f, a) in points {
        if !(f > 0.0) {
            return Err(AttenError::Argument(format!("frequency must be > 0, got {f} MHz")));
        }
        if !(a > 0.0) {
            return Err(AttenError::NonPositive(a, f));
        }
    }
    let mut freqs: Vec<f64> = points.iter().map(|p| p.0).collect();
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    freqs.dedup();
    if freqs.len() < 2 {
        return Err(AttenError::TooFewFrequencies(freqs.len()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Ok(AttenuationModel {
        a1: (my - b * mx).exp(),
        b,
    })
}

pub fn eval_power_law(model: &AttenuationModel, f_mhz: f64) -> Result<f64, AttenError> {
    if !(f_mhz > 0.0) {
        return Err(AttenError::Argument(format!(
            "frequency must be > 0, got {f_mhz} MHz"
        )));
    }
    Ok(model.a1 * f_mhz.powf(model.b))
}

/// Reads `freq_MHz,alpha_dB_per_m` rows.
pub fn read_attenuation_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>, AttenError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| AttenError::Parse("line 1: empty attenuation file".into()))?
        .map_err(|e| AttenError::Parse(format!("line 1: {e}")))?;
    if header.iter().collect::<Vec<_>>() != ["freq_MHz", "alpha_dB_per_m"] {
        return Err(AttenError::Parse(
            "line 1: expected header `freq_MHz,alpha_dB_per_m`".into(),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| AttenError::Parse(format!("line {line}: {e}")))?;
        let num = |j: usize| -> Result<f64, AttenError> {
            rec.get(j)
                .ok_or_else(|| AttenError::Parse(format!("line {line}: missing field {}", j + 1)))?
                .trim()
                .parse()
                .map_err(|e| AttenError::Parse(format!("line {line}: {e}")))
        };
        out.push((num(0)?, num(1)?));
    }
    Ok(out)
}
