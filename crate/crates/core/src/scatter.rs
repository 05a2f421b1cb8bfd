//! Born-approximation scattering by dilute, randomly placed weak scatterers.
//!
//! Each scatterer radiates an amplitude proportional to `k² (β + q cos φ)`,
//! where β is the compressibility contrast, q the density contrast and φ the
//! angle between incident and scattered wave vectors. With random positions
//! the powers add, so per unit volume
//!
//! ```text
//! D(φ)  = n · k⁴ (β + q cos φ)² / (16π²)        [m⁻¹ sr⁻¹]
//! μ_s   = ∫ D dΩ = n k⁴ (β²/(4π) + q²/(12π))    [m⁻¹]
//! ```
//!
//! The backscatter coefficient is `D(π)`.

use std::f64::consts::PI;

use thiserror::Error;

/// Angular normalization of the differential coefficient.
pub const NORMALIZATION: f64 = 1.0 / (16.0 * PI * PI);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error("inelastic scattering: |k_i| = {ki}, |k_s| = {ks}")]
    Inelastic { ki: f64, ks: f64 },
    #[error("incident wave vector has zero length")]
    ZeroWaveVector,
    #[error("degenerate receiver angles: cos φ1 = cos φ2 = {0}")]
    DegenerateAngles(f64),
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastProfile {
    /// Compressibility contrast β(k).
    pub beta: f64,
    /// Density contrast q(k).
    pub q: f64,
    /// Wavenumber, rad/m.
    pub k: f64,
    /// Relative number density of scatterers.
    pub number_density: f64,
}

impl ContrastProfile {
    pub fn new(beta: f64, q: f64, k: f64) -> Self {
        Self {
            beta,
            q,
            k,
            number_density: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ScatterError> {
        if !(self.k > 0.0) {
            return Err(ScatterError::Argument(format!("k must be > 0, got {}", self.k)));
        }
        if !(self.number_density >= 0.0) {
            return Err(ScatterError::Argument(format!(
                "number density must be >= 0, got {}",
                self.number_density
            )));
        }
        Ok(())
    }

    fn prefactor(&self) -> f64 {
        self.number_density * self.k.powi(4) * NORMALIZATION
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    Midpoint,
    Gauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub scheme: QuadratureScheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_polar: 64,
            n_azimuth: 64,
            scheme: QuadratureScheme::Gauss,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), ScatterError> {
        if self.n_polar < 2 || self.n_azimuth < 1 {
            return Err(ScatterError::Argument(
                "need n_polar >= 2 and n_azimuth >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// cos φ = (k_i · k_s) / |k_i|² for elastic scattering.
pub fn scattering_angle_cos(k_i: [f64; 3], k_s: [f64; 3]) -> Result<f64, ScatterError> {
    let ki2 = dot(k_i, k_i);
    if !(ki2 > 0.0) {
        return Err(ScatterError::ZeroWaveVector);
    }
    let (ki, ks) = (ki2.sqrt(), dot(k_s, k_s).sqrt());
    if (ks - ki).abs() > 1e-9 * ki {
        return Err(ScatterError::Inelastic { ki, ks });
    }
    Ok(dot(k_i, k_s) / ki2)
}

/// Differential scattering coefficient at angle `phi`, m⁻¹ sr⁻¹.
pub fn differential_coefficient(p: &ContrastProfile, phi: f64) -> Result<f64, ScatterError> {
    p.validate()?;
    if !(0.0..=PI).contains(&phi) {
        return Err(ScatterError::Argument(format!("angle {phi} rad outside [0, π]")));
    }
    Ok(differential_at_cos(p, phi.cos()))
}

fn differential_at_cos(p: &ContrastProfile, cos_phi: f64) -> f64 {
    let a = p.beta + p.q * cos_phi;
    p.prefactor() * a * a
}

/// Backscatter coefficient `D(π)`, m⁻¹ sr⁻¹.
pub fn backscatter_coefficient(p: &ContrastProfile) -> Result<f64, ScatterError> {
    p.validate()?;
    Ok(differential_at_cos(p, -1.0))
}

/// Closed-form total coefficient `n k⁴ (β²/(4π) + q²/(12π))`.
pub fn total_coefficient_analytic(p: &ContrastProfile) -> f64 {
    p.number_density * p.k.powi(4) * (p.beta * p.beta / (4.0 * PI) + p.q * p.q / (12.0 * PI))
}

/// Pairwise (cascade) sum with a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Nodes and weights on [-1, 1]: Gauss–Legendre by Newton on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule_on(a: f64, b: f64, n: usize, scheme: QuadratureScheme) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    match scheme {
        QuadratureScheme::Midpoint => {
            let h = (b - a) / n as f64;
            (0..n).map(|i| (a + (i as f64 + 0.5) * h, h)).collect()
        }
        QuadratureScheme::Gauss => {
            let (x, w) = gauss_legendre(n);
            x.iter().zip(&w).map(|(&x, &w)| (mid + half * x, half * w)).collect()
        }
    }
}

/// μ_s = ∫₀^{2π} ∫₀^{π} D(φ) sin φ dφ dψ by product quadrature, m⁻¹.
pub fn total_coefficient(p: &ContrastProfile, quad: &QuadratureSpec) -> Result<f64, ScatterError> {
    p.validate()?;
    quad.validate()?;
    let polar = rule_on(0.0, PI, quad.n_polar, quad.scheme);
    let azimuth = rule_on(0.0, 2.0 * PI, quad.n_azimuth, quad.scheme);
    let terms: Vec<f64> = azimuth
        .iter()
        .flat_map(|&(_, wa)| {
            polar
                .iter()
                .map(move |&(phi, wp)| wa * wp * phi.sin() * differential_at_cos(p, phi.cos()))
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Contrast pairs consistent with two differential measurements at angles φ1, φ2.
///
/// Only |β + q cos φ| is observable, so each angle contributes a sign
/// ambiguity; the result has up to four distinct candidates, closed under
/// overall sign flip.
pub fn invert_contrasts(
    d1: f64,
    phi1: f64,
    d2: f64,
    phi2: f64,
    k: f64,
) -> Result<Vec<(f64, f64)>, ScatterError> {
    if !(d1 >= 0.0) || !(d2 >= 0.0) {
        return Err(ScatterError::Argument("coefficients must be >= 0".into()));
    }
    if !(k > 0.0) {
        return Err(ScatterError::Argument(format!("k must be > 0, got {k}")));
    }
    let (c1, c2) = (phi1.cos(), phi2.cos());
    if phi1 == phi2 || (c1 - c2).abs() <= 1e-12 {
        return Err(ScatterError::DegenerateAngles(c1));
    }
    let scale = 1.0 / (NORMALIZATION * k.powi(4));
    let (s1, s2) = ((d1 * scale).sqrt(), (d2 * scale).sqrt());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(4);
    for (g1, g2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let q = (g1 * s1 - g2 * s2) / (c1 - c2);
        let beta = g1 * s1 - q * c1;
        let cand = (beta + 0.0, q + 0.0);
        let tol = 1e-12 * (s1 + s2).max(1e-300);
        if !out
            .iter()
            .any(|o| (o.0 - cand.0).abs() <= tol && (o.1 - cand.1).abs() <= tol)
        {
            out.push(cand);
        }
    }
    Ok(out)
}
