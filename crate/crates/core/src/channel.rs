//! Virtual dual-reflector pulse time-of-flight channel.
//!
//! A short Gaussian-windowed tone burst leaves the transducer at `t = 0`. The
//! translucent reflector at `L1` returns part of it, the remainder travels on
//! to the full reflector at `L2`. Speed is taken from the echo *pair*:
//!
//! ```text
//! c = 2 (L2 - L1) / (t2 - t1)
//! ```
//!
//! so the electronic delay and any path shared by both echoes cancel. The
//! timer counts whole ticks of `timer_resolution`, giving the integer code `N`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("sample rate {sample_rate} Hz is below 4 x carrier ({carrier} Hz)")]
    Undersampled { sample_rate: f64, carrier: f64 },
    #[error("sound speed {0} m/s outside the simulator range [1000, 2000] m/s")]
    SpeedOutOfRange(f64),
    #[error("attenuation must be non-negative, got {0} Np/m")]
    NegativeAttenuation(f64),
    #[error("threshold must lie in (0, 1), got {0}")]
    BadThreshold(f64),
    #[error("bad segment: {0}")]
    Segment(String),
    #[error("degenerate correlation: segment has zero variance")]
    DegenerateCorrelation,
    #[error("timing code must be positive to convert to speed")]
    ZeroCode,
    #[error("loop period {period} s does not exceed electronic delay {delay} s")]
    LoopPeriod { period: f64, delay: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("expected two echoes, detected {0}")]
    EchoCount(usize),
    #[error("waveform file: {0}")]
    Parse(String),
}

/// Physical and timing description of the two-reflector measuring base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGeometry {
    /// Distance to the translucent reflector, m.
    pub reflector_1_offset: f64,
    /// Distance to the full reflector, m.
    pub reflector_2_offset: f64,
    /// Amplitude reflection coefficient of the full reflector.
    pub reflection_coeff_full: f64,
    /// Fraction of amplitude returned by the translucent reflector.
    pub reflection_coeff_partial: f64,
    /// Carrier frequency, Hz.
    pub carrier_freq: f64,
    /// Timer tick, s.
    pub timer_resolution: f64,
    /// Electronic delay common to both echoes, s.
    pub electronic_delay: f64,
}

impl Default for ChannelGeometry {
    fn default() -> Self {
        Self {
            reflector_1_offset: 0.010,
            reflector_2_offset: 0.035,
            reflection_coeff_full: 0.93,
            reflection_coeff_partial: 0.5,
            carrier_freq: 2.4e6,
            timer_resolution: 1e-11,
            electronic_delay: 0.0,
        }
    }
}

impl ChannelGeometry {
    /// Geometry with the translucent reflector at 10 mm and the given base.
    pub fn with_base(base: f64) -> Self {
        let g = Self::default();
        Self {
            reflector_2_offset: g.reflector_1_offset + base,
            ..g
        }
    }

    /// Measuring base ΔL = L2 - L1, m.
    pub fn base(&self) -> f64 {
        self.reflector_2_offset - self.reflector_1_offset
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let g = |m: &str| Err(ChannelError::Geometry(m.to_string()));
        if !(self.reflector_1_offset > 0.0 && self.reflector_1_offset < self.reflector_2_offset) {
            return g("need 0 < L1 < L2");
        }
        if !(self.reflection_coeff_full > 0.0 && self.reflection_coeff_full <= 1.0) {
            return g("need 0 < R <= 1");
        }
        if !(self.reflection_coeff_partial > 0.0 && self.reflection_coeff_partial < 1.0) {
            return g("need 0 < R_p < 1");
        }
        if !(self.timer_resolution > 0.0) {
            return g("need t_res > 0");
        }
        if !(self.carrier_freq > 0.0) {
            return g("need f0 > 0");
        }
        if !(self.electronic_delay >= 0.0) {
            return g("need electronic delay >= 0");
        }
        Ok(())
    }

    /// Round-trip delays (t1, t2) of the two echoes for speed `c`.
    pub fn echo_delays(&self, c: f64) -> (f64, f64) {
        (
            2.0 * self.reflector_1_offset / c + self.electronic_delay,
            2.0 * self.reflector_2_offset / c + self.electronic_delay,
        )
    }

    /// Peak amplitudes of the two echoes for a unit emitted pulse.
    pub fn echo_amplitudes(&self, alpha_np: f64) -> (f64, f64) {
        let rp = self.reflection_coeff_partial;
        (
            rp * (-2.0 * alpha_np * self.reflector_1_offset).exp(),
            (1.0 - rp) * self.reflection_coeff_full * (-2.0 * alpha_np * self.reflector_2_offset).exp(),
        )
    }
}

/// Emitted tone burst: carrier under a Gaussian envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseDescriptor {
    /// Carrier frequency, Hz.
    pub carrier: f64,
    /// Standard deviation of the Gaussian envelope, s. The burst is
    /// effectively confined to ±3 widths.
    pub envelope_width: f64,
}

impl PulseDescriptor {
    pub const DEFAULT_ENVELOPE_WIDTH: f64 = 0.15e-6;

    pub fn new(carrier: f64) -> Self {
        Self {
            carrier,
            envelope_width: Self::DEFAULT_ENVELOPE_WIDTH,
        }
    }

    /// Acoustic wavelength λ = 2π/k = c/f for speed `c`.
    pub fn wavelength(&self, c: f64) -> f64 {
        c / self.carrier
    }

    /// Angular wavenumber k = ω/c.
    pub fn wavenumber(&self, c: f64) -> f64 {
        2.0 * PI * self.carrier / c
    }

    /// Unit-amplitude burst centred at `t = 0`.
    pub fn shape(&self, t: f64) -> f64 {
        let s = self.envelope_width;
        (-(t * t) / (2.0 * s * s)).exp() * (2.0 * PI * self.carrier * t).cos()
    }
}

/// Sampled echo train.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformRecord {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    pub pulse: PulseDescriptor,
    pub rng_seed: u64,
}

/// Default oversampling relative to the carrier.
pub const DEFAULT_OVERSAMPLING: f64 = 10.0;

/// Settings for [`synthesize_echoes`] beyond the physical inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    pub pulse: PulseDescriptor,
    pub sample_rate: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl SynthesisConfig {
    pub fn for_geometry(geom: &ChannelGeometry) -> Self {
        Self {
            pulse: PulseDescriptor::new(geom.carrier_freq),
            sample_rate: DEFAULT_OVERSAMPLING * geom.carrier_freq,
            noise_std: 0.0,
            seed: 0,
        }
    }
}

/// Generates the two-echo record for sound speed `c` and attenuation `alpha_np`.
pub fn synthesize_echoes(
    geom: &ChannelGeometry,
    c: f64,
    alpha_np: f64,
    cfg: &SynthesisConfig,
) -> Result<WaveformRecord, ChannelError> {
    geom.validate()?;
    if !(1000.0..=2000.0).contains(&c) {
        return Err(ChannelError::SpeedOutOfRange(c));
    }
    if !(alpha_np >= 0.0) {
        return Err(ChannelError::NegativeAttenuation(alpha_np));
    }
    if !(cfg.sample_rate >= 4.0 * cfg.pulse.carrier) {
        return Err(ChannelError::Undersampled {
            sample_rate: cfg.sample_rate,
            carrier: cfg.pulse.carrier,
        });
    }
    if !(cfg.noise_std >= 0.0) || !(cfg.pulse.envelope_width > 0.0) {
        return Err(ChannelError::Argument(
            "noise_std must be >= 0 and envelope width > 0".into(),
        ));
    }

    let (t1, t2) = geom.echo_delays(c);
    let (a1, a2) = geom.echo_amplitudes(alpha_np);
    let duration = t2 + 10.0 * cfg.pulse.envelope_width;
    let n = (duration * cfg.sample_rate).ceil() as usize + 1;

    let mut samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / cfg.sample_rate;
            a1 * cfg.pulse.shape(t - t1) + a2 * cfg.pulse.shape(t - t2)
        })
        .collect();

    if cfg.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let normal = Normal::new(0.0, cfg.noise_std).expect("finite std");
        for s in &mut samples {
            *s += normal.sample(&mut rng);
        }
    }

    Ok(WaveformRecord {
        sample_rate: cfg.sample_rate,
        samples,
        pulse: cfg.pulse,
        rng_seed: cfg.seed,
    })
}

/// Magnitude of the analytic signal (Hilbert envelope).
pub fn envelope(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    // One-sided spectrum: keep DC (and Nyquist for even n), double positives.
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == half) {
            continue;
        } else if k <= (n - 1) / 2 {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    inv.process(&mut buf);
    buf.iter().map(|v| v.norm() / n as f64).collect()
}

/// Echoes located by envelope threshold crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoDetection {
    /// Rising-edge crossing times, ascending, s.
    pub arrivals: Vec<f64>,
    /// Sample index of the envelope maximum of each detected echo.
    pub peak_indices: Vec<usize>,
}

impl EchoDetection {
    /// True when nothing crossed the threshold.
    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }
}

/// First-crossing arrival times of the envelope above `threshold · max`.
///
/// The detector re-arms once the envelope drops below half the threshold.
pub fn detect_tof_threshold(
    w: &WaveformRecord,
    threshold: f64,
) -> Result<EchoDetection, ChannelError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(ChannelError::BadThreshold(threshold));
    }
    let env = envelope(&w.samples);
    let max = env.iter().cloned().fold(0.0, f64::max);
    let mut out = EchoDetection {
        arrivals: Vec::new(),
        peak_indices: Vec::new(),
    };
    if !(max > 0.0) {
        return Ok(out);
    }
    let level = threshold * max;
    let rearm = 0.5 * level;
    let mut armed = true;
    let mut current_peak: Option<usize> = None;
    for i in 0..env.len() {
        if armed && env[i] >= level {
            let t = if i == 0 {
                0.0
            } else {
                let (e0, e1) = (env[i - 1], env[i]);
                (i as f64 - 1.0 + (level - e0) / (e1 - e0)) / w.sample_rate
            };
            out.arrivals.push(t);
            armed = false;
            current_peak = Some(i);
        } else if !armed {
            if let Some(p) = current_peak {
                if env[i] > env[p] {
                    current_peak = Some(i);
                }
            }
            if env[i] < rearm {
                armed = true;
                out.peak_indices.extend(current_peak.take());
            }
        }
    }
    out.peak_indices.extend(current_peak.take());
    Ok(out)
}

fn check_segment(w: &WaveformRecord, seg: &Range<usize>) -> Result<(), ChannelError> {
    if seg.start >= seg.end || seg.end > w.samples.len() {
        return Err(ChannelError::Segment(format!(
            "{}..{} not within 0..{}",
            seg.start,
            seg.end,
            w.samples.len()
        )));
    }
    if seg.len() < 3 {
        return Err(ChannelError::Segment("need at least 3 samples".into()));
    }
    Ok(())
}

fn has_variance(x: &[f64]) -> bool {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().any(|&v| v != mean)
}

/// Integer-lag cross-correlation peak and its value neighbourhood.
fn correlation_peak(x1: &[f64], x2: &[f64]) -> (isize, f64, f64, f64) {
    // r[l] = Σ x1[n] x2[n + l], l in -(len1-1) ..= len2-1
    let lo = -(x1.len() as isize - 1);
    let hi = x2.len() as isize - 1;
    let r = |l: isize| -> f64 {
        let mut acc = 0.0;
        for (n, &a) in x1.iter().enumerate() {
            let m = n as isize + l;
            if m >= 0 && (m as usize) < x2.len() {
                acc += a * x2[m as usize];
            }
        }
        acc
    };
    let mut best = (lo, f64::NEG_INFINITY);
    for l in lo..=hi {
        let v = r(l);
        if v > best.1 {
            best = (l, v);
        }
    }
    let (l, y0) = best;
    let ym = if l > lo { r(l - 1) } else { y0 };
    let yp = if l < hi { r(l + 1) } else { y0 };
    (l, ym, y0, yp)
}

fn parabolic_offset(ym: f64, y0: f64, yp: f64) -> f64 {
    let den = ym - 2.0 * y0 + yp;
    if den.abs() > 0.0 {
        (0.5 * (ym - yp) / den).clamp(-0.5, 0.5)
    } else {
        0.0
    }
}

/// Delay of the echo in `seg2` relative to the echo in `seg1`, s.
///
/// Integer cross-correlation peak refined by a three-point parabola.
pub fn correlate_delay(
    w: &WaveformRecord,
    seg1: Range<usize>,
    seg2: Range<usize>,
) -> Result<f64, ChannelError> {
    let lag = correlate_lag_parabolic(w, &seg1, &seg2)?;
    Ok((seg2.start as f64 - seg1.start as f64 + lag) / w.sample_rate)
}

fn correlate_lag_parabolic(
    w: &WaveformRecord,
    seg1: &Range<usize>,
    seg2: &Range<usize>,
) -> Result<f64, ChannelError> {
    check_segment(w, seg1)?;
    check_segment(w, seg2)?;
    if seg1.start < seg2.end && seg2.start < seg1.end {
        return Err(ChannelError::Segment("segments overlap".into()));
    }
    let x1 = &w.samples[seg1.clone()];
    let x2 = &w.samples[seg2.clone()];
    if !has_variance(x1) || !has_variance(x2) {
        return Err(ChannelError::DegenerateCorrelation);
    }
    let (l, ym, y0, yp) = correlation_peak(x1, x2);
    Ok(l as f64 + parabolic_offset(ym, y0, yp))
}

/// Like [`correlate_delay`], then polishes the parabolic estimate by Newton
/// iteration on the band-limited (Fourier-interpolated) cross-correlation.
///
/// The parabola is biased by a few percent of a sample on a carrier-modulated
/// pulse; the polished estimate is limited by noise, not by the sample grid.
pub fn correlate_delay_refined(
    w: &WaveformRecord,
    seg1: Range<usize>,
    seg2: Range<usize>,
) -> Result<f64, ChannelError> {
    let start = correlate_lag_parabolic(w, &seg1, &seg2)?;
    let x1 = &w.samples[seg1.clone()];
    let x2 = &w.samples[seg2.clone()];
    let m = (x1.len() + x2.len()).next_power_of_two() * 2;

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let spectrum = |x: &[f64]| {
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        fft.process(&mut buf);
        buf
    };
    let s1 = spectrum(x1);
    let s2 = spectrum(x2);
    let cross: Vec<(f64, Complex64)> = s1
        .iter()
        .zip(&s2)
        .enumerate()
        .map(|(k, (a, b))| {
            let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            (2.0 * PI * kk / m as f64, a.conj() * b)
        })
        .collect();

    // R(τ) ∝ Σ Re(C_k e^{iω_k τ}); only the first and second derivatives are needed.
    let derivs = |tau: f64| {
        let (mut d1, mut d2) = (0.0, 0.0);
        for &(om, ck) in &cross {
            let e = ck * Complex64::from_polar(1.0, om * tau);
            d1 += -om * e.im;
            d2 += -om * om * e.re;
        }
        (d1, d2)
    };

    let mut tau = start;
    for _ in 0..20 {
        let (d1, d2) = derivs(tau);
        if !(d2 < 0.0) {
            return Ok((seg2.start as f64 - seg1.start as f64 + start) / w.sample_rate);
        }
        let step = (-d1 / d2).clamp(-0.5, 0.5);
        tau += step;
        if step.abs() < 1e-12 {
            break;
        }
    }
    if (tau - start).abs() > 1.0 {
        tau = start;
    }
    Ok((seg2.start as f64 - seg1.start as f64 + tau) / w.sample_rate)
}

/// Least-squares amplitude of a known burst centred at `delay` seconds.
pub fn echo_amplitude(w: &WaveformRecord, delay: f64) -> f64 {
    let half = 8.0 * w.pulse.envelope_width;
    let lo = ((delay - half) * w.sample_rate).floor().max(0.0) as usize;
    let hi = (((delay + half) * w.sample_rate).ceil() as usize + 1).min(w.samples.len());
    let (mut num, mut den) = (0.0, 0.0);
    for i in lo..hi {
        let g = w.pulse.shape(i as f64 / w.sample_rate - delay);
        num += w.samples[i] * g;
        den += g * g;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Integer count of whole timer ticks in `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimingCode(pub u64);

impl TimingCode {
    pub fn get(self) -> u64 {
        self.0
    }
}

/// N = floor(Δt / t_res).
///
/// Quotients within 1e-9 counts of an integer are taken as that integer, so
/// that exact multiples of the tick survive binary rounding.
pub fn code_from_time(dt: f64, geom: &ChannelGeometry) -> Result<TimingCode, ChannelError> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(ChannelError::Argument(format!(
            "time interval must be finite and >= 0, got {dt}"
        )));
    }
    let x = dt / geom.timer_resolution;
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        x.floor()
    };
    Ok(TimingCode(n as u64))
}

/// c = 2ΔL / (N · t_res).
pub fn speed_from_code(code: TimingCode, geom: &ChannelGeometry) -> Result<f64, ChannelError> {
    speed_from_mean_code(code.0 as f64, geom)
}

/// Speed for a fractional (averaged) code.
pub fn speed_from_mean_code(code: f64, geom: &ChannelGeometry) -> Result<f64, ChannelError> {
    if !(code > 0.0) {
        return Err(ChannelError::ZeroCode);
    }
    Ok(2.0 * geom.base() / (code * geom.timer_resolution))
}

/// Speed step corresponding to one timer tick: δc = c² t_res / (2ΔL).
pub fn velocity_quantization(geom: &ChannelGeometry, c: f64) -> Result<f64, ChannelError> {
    if !(c > 0.0) {
        return Err(ChannelError::Argument(format!("speed must be > 0, got {c}")));
    }
    Ok(c * c * geom.timer_resolution / (2.0 * geom.base()))
}

/// Sing-around speed from the loop repetition frequency.
pub fn singaround_speed(f_loop: f64, path: f64, electronic_delay: f64) -> Result<f64, ChannelError> {
    if !(f_loop > 0.0) || !(path > 0.0) {
        return Err(ChannelError::Argument(
            "loop frequency and path must be positive".into(),
        ));
    }
    let period = 1.0 / f_loop;
    if period <= electronic_delay {
        return Err(ChannelError::LoopPeriod {
            period,
            delay: electronic_delay,
        });
    }
    Ok(2.0 * path / (period - electronic_delay))
}

/// Loop frequency produced by a sing-around circuit, the inverse of [`singaround_speed`].
pub fn singaround_frequency(c: f64, path: f64, electronic_delay: f64) -> f64 {
    1.0 / (2.0 * path / c + electronic_delay)
}

/// Echo gates around the two strongest detected echoes, as sample ranges.
pub fn echo_gates(
    w: &WaveformRecord,
    threshold: f64,
) -> Result<(Range<usize>, Range<usize>), ChannelError> {
    let det = detect_tof_threshold(w, threshold)?;
    if det.peak_indices.len() != 2 {
        return Err(ChannelError::EchoCount(det.peak_indices.len()));
    }
    let half = (8.0 * w.pulse.envelope_width * w.sample_rate).ceil() as usize;
    let gate = |p: usize| p.saturating_sub(half)..(p + half + 1).min(w.samples.len());
    Ok((gate(det.peak_indices[0]), gate(det.peak_indices[1])))
}

/// Writes a waveform fixture: `# sample_rate=.. f0=.. seed=..` then `index,amplitude`.
pub fn write_waveform<W: Write>(w: &WaveformRecord, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# sample_rate={} f0={} seed={}",
        w.sample_rate, w.pulse.carrier, w.rng_seed
    )?;
    writeln!(out, "index,amplitude")?;
    for (i, s) in w.samples.iter().enumerate() {
        writeln!(out, "{i},{s}")?;
    }
    Ok(())
}

/// Reads a waveform fixture written by [`write_waveform`].
pub fn read_waveform<R: BufRead>(input: R) -> Result<WaveformRecord, ChannelError> {
    let mut lines = input.lines();
    let perr = |m: String| ChannelError::Parse(m);
    let header = lines
        .next()
        .ok_or_else(|| perr("empty file".into()))?
        .map_err(|e| perr(e.to_string()))?;
    let meta = header
        .strip_prefix('#')
        .ok_or_else(|| perr("line 1: missing `# sample_rate=...` header".into()))?;
    let (mut fs, mut f0, mut seed) = (None, None, None);
    for kv in meta.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| perr(format!("line 1: bad token `{kv}`")))?;
        match k {
            "sample_rate" => fs = v.parse::<f64>().ok(),
            "f0" => f0 = v.parse::<f64>().ok(),
            "seed" => seed = v.parse::<u64>().ok(),
            _ => {}
        }
    }
    let (fs, f0, seed) = match (fs, f0, seed) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(perr("line 1: need sample_rate, f0 and seed".into())),
    };
    let cols = lines
        .next()
        .ok_or_else(|| perr("missing column header".into()))?
        .map_err(|e| perr(e.to_string()))?;
    if cols.trim() != "index,amplitude" {
        return Err(perr("line 2: expected `index,amplitude`".into()));
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 3;
        let line = line.map_err(|e| perr(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (idx, amp) = line
            .split_once(',')
            .ok_or_else(|| perr(format!("line {lineno}: expected two fields")))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|e| perr(format!("line {lineno}: index: {e}")))?;
        if idx != samples.len() {
            return Err(perr(format!("line {lineno}: index {idx} out of sequence")));
        }
        samples.push(
            amp.trim()
                .parse()
                .map_err(|e| perr(format!("line {lineno}: amplitude: {e}")))?,
        );
    }
    if fs < 4.0 * f0 {
        return Err(ChannelError::Undersampled {
            sample_rate: fs,
            carrier: f0,
        });
    }
    Ok(WaveformRecord {
        sample_rate: fs,
        samples,
        pulse: PulseDescriptor::new(f0),
        rng_seed: seed,
    })
}
