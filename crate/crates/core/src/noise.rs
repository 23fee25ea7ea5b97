//! Speech-shaped, temporally modulated noise maskers.
//!
//! A masker is either loaded from a WAV file (e.g. a published ICRA track) or
//! synthesized: Gaussian noise is shaped towards the long-term speech
//! spectrum and multiplied by a slowly varying positive envelope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::audio::{read_wav, Waveform};
use crate::error::{contract, Result};
use crate::scalar::Real;

/// RMS of a synthesized masker, relative to full scale.
pub const SYNTH_RMS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    ExternalFile,
    Synthesized,
}

/// A masker signal ready to be cut into segments.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSource<T> {
    pub kind: NoiseKind,
    pub waveform: Waveform<T>,
    /// Set for synthesized maskers only.
    pub seed: Option<u64>,
}

/// Wraps a masker WAV file.
pub fn load_masker<T: Real>(bytes: &[u8]) -> Result<NoiseSource<T>> {
    let waveform = read_wav(bytes)?;
    if waveform.is_empty() {
        return Err(contract("masker file contains no samples"));
    }
    Ok(NoiseSource { kind: NoiseKind::ExternalFile, waveform, seed: None })
}

/// Direct-form-I biquad section.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
    x: [f64; 2],
    y: [f64; 2],
}

impl Biquad {
    fn new(b: [f64; 3], a: [f64; 2]) -> Self {
        Self { b, a, x: [0.0; 2], y: [0.0; 2] }
    }

    /// First-order low-pass (−6 dB/octave above `fc`) expressed as a biquad.
    fn lowpass1(fc: f64, fs: f64) -> Self {
        let k = (std::f64::consts::PI * fc / fs).tan();
        let n = 1.0 / (1.0 + k);
        Self::new([k * n, k * n, 0.0], [(k - 1.0) * n, 0.0])
    }

    fn butter_lowpass(fc: f64, fs: f64) -> Self {
        let k = (std::f64::consts::PI * fc / fs).tan();
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let n = 1.0 / (1.0 + k / q + k * k);
        let b0 = k * k * n;
        Self::new([b0, 2.0 * b0, b0], [2.0 * (k * k - 1.0) * n, (1.0 - k / q + k * k) * n])
    }

    fn butter_highpass(fc: f64, fs: f64) -> Self {
        let k = (std::f64::consts::PI * fc / fs).tan();
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let n = 1.0 / (1.0 + k / q + k * k);
        Self::new([n, -2.0 * n, n], [2.0 * (k * k - 1.0) * n, (1.0 - k / q + k * k) * n])
    }

    fn process(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.b[1] * self.x[0] + self.b[2] * self.x[1]
            - self.a[0] * self.y[0]
            - self.a[1] * self.y[1];
        self.x = [x, self.x[0]];
        self.y = [y, self.y[0]];
        y
    }
}

fn run_cascade(stages: &mut [Biquad], x: f64) -> f64 {
    stages.iter_mut().fold(x, |acc, s| s.process(acc))
}

/// Spectral shaping: 100 Hz high-pass, −6 dB/octave tilt above 500 Hz, and
/// a second-order roll-off above 4 kHz.
fn speech_shaping_filter(fs: f64) -> Vec<Biquad> {
    let nyq_guard = 0.45 * fs;
    vec![
        Biquad::butter_highpass(100.0_f64.min(nyq_guard), fs),
        Biquad::lowpass1(500.0_f64.min(nyq_guard), fs),
        Biquad::butter_lowpass(4000.0_f64.min(nyq_guard), fs),
    ]
}

const ENVELOPE_RATE_HZ: f64 = 100.0;
const ENVELOPE_CUTOFF_HZ: f64 = 4.0;
const ENVELOPE_DEPTH: f64 = 0.8;
const WARMUP_S: f64 = 1.0;

/// Positive envelope sampled at the control rate, band-limited below 8 Hz.
fn modulation_envelope(rng: &mut ChaCha8Rng, n_control: usize) -> Vec<f64> {
    let mut lp = [
        Biquad::butter_lowpass(ENVELOPE_CUTOFF_HZ, ENVELOPE_RATE_HZ),
        Biquad::butter_lowpass(ENVELOPE_CUTOFF_HZ, ENVELOPE_RATE_HZ),
    ];
    let warmup = (WARMUP_S * ENVELOPE_RATE_HZ) as usize;
    let raw: Vec<f64> = (0..warmup + n_control)
        .map(|_| run_cascade(&mut lp, rng.sample::<f64, _>(StandardNormal)))
        .skip(warmup)
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / raw.len() as f64;
    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    raw.iter().map(|v| (ENVELOPE_DEPTH * (v - mean) / sd).exp()).collect()
}

/// Generates a deterministic speech-shaped modulated noise masker.
///
/// The output is a pure function of `(duration_s, sample_rate_hz, seed)` and
/// is normalized to an RMS of [`SYNTH_RMS`].
pub fn synthesize_masker<T: Real>(duration_s: f64, sample_rate_hz: u32, seed: u64) -> Result<NoiseSource<T>> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(contract(format!("masker duration must be positive, got {duration_s}")));
    }
    if sample_rate_hz == 0 {
        return Err(contract("sample rate must be positive"));
    }
    let fs = sample_rate_hz as f64;
    let n = ((duration_s * fs).round() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_control = (n as f64 / fs * ENVELOPE_RATE_HZ).ceil() as usize + 2;
    let envelope = modulation_envelope(&mut rng, n_control);

    let mut shaping = speech_shaping_filter(fs);
    let warmup = (WARMUP_S * fs) as usize;
    for _ in 0..warmup {
        run_cascade(&mut shaping, rng.sample::<f64, _>(StandardNormal));
    }
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let shaped = run_cascade(&mut shaping, rng.sample::<f64, _>(StandardNormal));
            let pos = i as f64 / fs * ENVELOPE_RATE_HZ;
            let j = pos.floor() as usize;
            let frac = pos - j as f64;
            let env = envelope[j] * (1.0 - frac) + envelope[j + 1] * frac;
            shaped * env
        })
        .collect();

    // clipping of envelope peaks lowers the level, so rescale until it settles
    let shaped = out.clone();
    let mut gain = 1.0;
    for _ in 0..16 {
        let rms = (out.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        if rms == 0.0 || (rms - SYNTH_RMS).abs() < 1e-9 {
            break;
        }
        gain *= SYNTH_RMS / rms;
        for (o, s) in out.iter_mut().zip(&shaped) {
            *o = (s * gain).clamp(-1.0, 1.0);
        }
    }
    let waveform = Waveform::new(out.into_iter().map(T::of).collect(), sample_rate_hz)?;
    Ok(NoiseSource { kind: NoiseKind::Synthesized, waveform, seed: Some(seed) })
}

/// Returns exactly `n_samples` masker samples starting at offset 0, tiling
/// the masker end-to-end when it is shorter than the request.
pub fn cut_segment<T: Real>(src: &NoiseSource<T>, n_samples: usize) -> Vec<T> {
    cut_segment_at(src, n_samples, 0)
}

/// Like [`cut_segment`] but starting at `offset` (taken modulo the masker length).
pub fn cut_segment_at<T: Real>(src: &NoiseSource<T>, n_samples: usize, offset: usize) -> Vec<T> {
    let masker = src.waveform.samples();
    if masker.is_empty() {
        return vec![T::zero(); n_samples];
    }
    masker.iter().copied().cycle().skip(offset % masker.len()).take(n_samples).collect()
}
