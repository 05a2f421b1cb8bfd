//! Least-squares polynomials in a centred and scaled abscissa.
//!
//! Raw abscissae (timer codes around 3·10⁶, say) make the Vandermonde matrix
//! hopeless at degree 3 and above. Fitting in `u = (x - center) / scale`,
//! with `u` spanning [-1, 1] over the data, keeps it well conditioned.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("underdetermined: {points} distinct abscissae for degree {degree}")]
    Underdetermined { points: usize, degree: usize },
    #[error("ill-conditioned design: {0}")]
    Conditioning(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPoly {
    pub center: f64,
    pub scale: f64,
    /// Ascending powers of the normalized abscissa.
    pub coefficients: Vec<f64>,
}

impl NormalizedPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.center) / self.scale
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = self.normalize(x);
        self.coefficients.iter().rev().fold(0.0, |acc, &a| acc * u + a)
    }

    /// Coefficients in ascending powers of the raw abscissa.
    pub fn raw_coefficients(&self) -> Vec<f64> {
        // p(u) with u = (x - c)/s; expand each u^j binomially.
        let n = self.coefficients.len();
        let mut raw = vec![0.0; n];
        let (c, s) = (self.center, self.scale);
        for (j, &a) in self.coefficients.iter().enumerate() {
            let f = a / s.powi(j as i32);
            let mut binom = 1.0;
            for (i, r) in raw.iter_mut().enumerate().take(j + 1) {
                // term: binom(j,i) x^i (-c)^(j-i)
                *r += f * binom * (-c).powi((j - i) as i32);
                binom = binom * (j - i) as f64 / (i + 1) as f64;
            }
        }
        raw
    }
}

/// Fits `y ≈ p(x)` of the given degree by least squares (Householder QR).
///
/// Repeated abscissae with different ordinates are allowed here; callers
/// that must reject them check before calling.
pub fn fit(x: &[f64], y: &[f64], degree: usize) -> Result<NormalizedPoly, FitError> {
    assert_eq!(x.len(), y.len());
    let mut distinct: Vec<f64> = x.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite abscissae"));
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(FitError::Underdetermined {
            points: distinct.len(),
            degree,
        });
    }
    let (lo, hi) = (distinct[0], distinct[distinct.len() - 1]);
    let center = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };

    let m = x.len();
    let a = DMatrix::from_fn(m, degree + 1, |i, j| ((x[i] - center) / scale).powi(j as i32));
    let b = DVector::from_column_slice(y);
    let qr = a.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let diag_min = r.diagonal().iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if !(diag_min > 1e-12 * diag_max) {
        return Err(FitError::Conditioning(format!(
            "R diagonal ratio {:.3e}",
            diag_min / diag_max
        )));
    }
    let qtb = qr.q().transpose() * b;
    let coef = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| FitError::Conditioning("singular triangular factor".into()))?;
    Ok(NormalizedPoly {
        center,
        scale,
        coefficients: coef.iter().copied().collect(),
    })
}
