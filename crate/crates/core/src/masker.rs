//! Noise, deletion and reversal masks over waveforms and VQ code sequences.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alignment::{MaskTarget, Position};
use crate::audio::{rms, span_from_seconds, SampleSpan, Waveform};
use crate::error::{contract, Error, Result};
use crate::noise::{cut_segment_at, NoiseSource};
use crate::scalar::Real;

/// Codes per second implied by 300 codes spanning 1.2 s.
pub const DEFAULT_CODE_RATE_HZ: f64 = 250.0;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Discrete VQ phone codes at a fixed frame rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSequence {
    pub codebook_size: u32,
    pub code_rate_hz: f64,
    pub codes: Vec<u32>,
}

impl CodeSequence {
    pub fn new(codes: Vec<u32>, codebook_size: u32, code_rate_hz: f64) -> Result<Self> {
        let seq = Self { codebook_size, code_rate_hz, codes };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.codebook_size == 0 {
            return Err(contract("codebook size must be positive"));
        }
        if !(self.code_rate_hz > 0.0 && self.code_rate_hz.is_finite()) {
            return Err(contract(format!("code rate must be positive, got {}", self.code_rate_hz)));
        }
        if let Some(c) = self.codes.iter().find(|&&c| c >= self.codebook_size) {
            return Err(contract(format!("code {c} outside codebook of size {}", self.codebook_size)));
        }
        Ok(())
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let seq: Self = serde_json::from_slice(bytes)?;
        seq.validate()?;
        Ok(seq)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.codes.len() as f64 / self.code_rate_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskType {
    Noise,
    Delete,
    Reverse,
}

impl MaskType {
    pub const ALL: [MaskType; 3] = [MaskType::Noise, MaskType::Delete, MaskType::Reverse];

    pub fn as_str(self) -> &'static str {
        match self {
            MaskType::Noise => "noise",
            MaskType::Delete => "delete",
            MaskType::Reverse => "reverse",
        }
    }
}

impl fmt::Display for MaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaskType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "noise" => Ok(MaskType::Noise),
            "delete" | "deletion" => Ok(MaskType::Delete),
            "reverse" | "reversal" => Ok(MaskType::Reverse),
            other => Err(Error::Config(format!("unknown mask type {other:?}"))),
        }
    }
}

/// Options for the noise mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseOptions {
    /// Scale the noise segment to the RMS of the speech it replaces.
    pub level_match: bool,
    /// Start offset into the masker / noise-code stream.
    pub offset: usize,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        Self { level_match: true, offset: 0 }
    }
}

/// A fully specified mask for one utterance.
#[derive(Debug, Clone)]
pub struct MaskSpec<T> {
    pub utterance_id: String,
    pub mask_type: MaskType,
    pub target: MaskTarget,
    /// `None` for explicitly indexed targets.
    pub position: Option<Position>,
    /// Waveform masker; only allowed for noise masks.
    pub noise_source: Option<NoiseSource<T>>,
    pub noise_options: NoiseOptions,
    pub code_rate_hz: f64,
    /// Seed recorded in the manifest when randomness was involved.
    pub seed: Option<u64>,
}

impl<T: Real> MaskSpec<T> {
    pub fn new(
        utterance_id: impl Into<String>,
        mask_type: MaskType,
        target: MaskTarget,
        position: Option<Position>,
        noise_source: Option<NoiseSource<T>>,
    ) -> Result<Self> {
        if mask_type != MaskType::Noise && noise_source.is_some() {
            return Err(contract(format!("a {mask_type} mask does not take a noise source")));
        }
        if target.is_empty() || target.span_s.1.partial_cmp(&target.span_s.0) != Some(std::cmp::Ordering::Greater) || target.span_s.0 < 0.0 {
            return Err(contract(format!("mask target {target:?} is empty or ill-ordered")));
        }
        Ok(Self {
            utterance_id: utterance_id.into(),
            mask_type,
            target,
            position,
            noise_source,
            noise_options: NoiseOptions::default(),
            code_rate_hz: DEFAULT_CODE_RATE_HZ,
            seed: None,
        })
    }

    pub fn with_noise_options(mut self, opts: NoiseOptions) -> Self {
        self.noise_options = opts;
        self
    }

    pub fn with_code_rate(mut self, code_rate_hz: f64) -> Self {
        self.code_rate_hz = code_rate_hz;
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn position_label(&self) -> &'static str {
        self.position.map_or("explicit", Position::as_str)
    }
}

/// Audit record written beside every masked output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskManifest {
    pub utterance_id: String,
    pub domain: String,
    pub mask_type: MaskType,
    pub position: String,
    pub word_indices: Range<usize>,
    pub span_s: (f64, f64),
    pub span_samples: Option<(usize, usize)>,
    pub span_codes: (usize, usize),
    pub sample_rate_hz: Option<u32>,
    pub code_rate_hz: f64,
    pub input_length: usize,
    pub output_length: usize,
    pub tool_version: String,
    pub seed: Option<u64>,
}

fn round_micros(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Converts a time span to a code index range with nearest rounding, widened
/// to at least one code.
pub fn span_to_codes(span_s: (f64, f64), code_rate_hz: f64) -> Range<usize> {
    let start = (span_s.0.max(0.0) * code_rate_hz).round() as usize;
    let end = (span_s.1.max(0.0) * code_rate_hz).round() as usize;
    start..end.max(start + 1)
}

fn manifest<T: Real>(spec: &MaskSpec<T>, domain: &str) -> MaskManifest {
    let codes = span_to_codes(spec.target.span_s, spec.code_rate_hz);
    MaskManifest {
        utterance_id: spec.utterance_id.clone(),
        domain: domain.to_string(),
        mask_type: spec.mask_type,
        position: spec.position_label().to_string(),
        word_indices: spec.target.word_indices.clone(),
        span_s: (round_micros(spec.target.span_s.0), round_micros(spec.target.span_s.1)),
        span_samples: None,
        span_codes: (codes.start, codes.end),
        sample_rate_hz: None,
        code_rate_hz: spec.code_rate_hz,
        input_length: 0,
        output_length: 0,
        tool_version: TOOL_VERSION.to_string(),
        seed: spec.seed,
    }
}

/// Applies the mask to a waveform.
pub fn mask_waveform<T: Real>(w: &Waveform<T>, spec: &MaskSpec<T>) -> Result<(Waveform<T>, MaskManifest)> {
    let span = span_from_seconds(w, spec.target.span_s.0, spec.target.span_s.1)?;
    let samples = apply_to_samples(w.samples(), span, spec)?;
    let out = Waveform::new(samples, w.sample_rate_hz())?;
    let mut m = manifest(spec, "wave");
    m.span_samples = Some((span.start_idx, span.end_idx));
    m.sample_rate_hz = Some(w.sample_rate_hz());
    m.input_length = w.len();
    m.output_length = out.len();
    Ok((out, m))
}

fn apply_to_samples<T: Real>(input: &[T], span: SampleSpan, spec: &MaskSpec<T>) -> Result<Vec<T>> {
    let range = span.start_idx..span.end_idx;
    match spec.mask_type {
        MaskType::Reverse => {
            let mut out = input.to_vec();
            out[range].reverse();
            Ok(out)
        }
        MaskType::Delete => {
            let mut out = Vec::with_capacity(input.len() - span.len());
            out.extend_from_slice(&input[..span.start_idx]);
            out.extend_from_slice(&input[span.end_idx..]);
            Ok(out)
        }
        MaskType::Noise => {
            let src = spec
                .noise_source
                .as_ref()
                .ok_or_else(|| contract("noise mask requires a noise source"))?;
            let mut segment = cut_segment_at(src, span.len(), spec.noise_options.offset);
            if spec.noise_options.level_match {
                let speech = rms(&input[range.clone()]);
                let noise = rms(&segment);
                if noise > T::zero() {
                    let gain = speech / noise;
                    for s in &mut segment {
                        *s = (*s * gain).max(-T::one()).min(T::one());
                    }
                }
            }
            let mut out = input.to_vec();
            out[range].copy_from_slice(&segment);
            Ok(out)
        }
    }
}

/// Applies the mask to a code sequence. Noise masks swap in `noise_codes`
/// (tiled or truncated to the span length).
///
/// A span end that overshoots the sequence by a single code (rounding) is
/// clamped; anything further out is an error.
pub fn mask_codes<T: Real>(
    c: &CodeSequence,
    spec: &MaskSpec<T>,
    noise_codes: Option<&CodeSequence>,
) -> Result<(CodeSequence, MaskManifest)> {
    c.validate()?;
    let mut range = span_to_codes(spec.target.span_s, c.code_rate_hz);
    if range.end == c.len() + 1 && range.start < c.len() {
        range.end = c.len();
    }
    if range.end > c.len() {
        return Err(contract(format!("code span {range:?} exceeds sequence of {} codes", c.len())));
    }
    let codes = apply_to_codes(&c.codes, range.clone(), spec, noise_codes, c.codebook_size)?;
    let out = CodeSequence { codebook_size: c.codebook_size, code_rate_hz: c.code_rate_hz, codes };
    let mut m = manifest(spec, "codes");
    m.code_rate_hz = c.code_rate_hz;
    m.span_codes = (range.start, range.end);
    m.input_length = c.len();
    m.output_length = out.len();
    Ok((out, m))
}

fn apply_to_codes<T: Real>(
    input: &[u32],
    range: Range<usize>,
    spec: &MaskSpec<T>,
    noise_codes: Option<&CodeSequence>,
    codebook_size: u32,
) -> Result<Vec<u32>> {
    match spec.mask_type {
        MaskType::Reverse => {
            let mut out = input.to_vec();
            out[range].reverse();
            Ok(out)
        }
        MaskType::Delete => {
            let mut out = input[..range.start].to_vec();
            out.extend_from_slice(&input[range.end..]);
            Ok(out)
        }
        MaskType::Noise => {
            let noise = noise_codes.ok_or_else(|| contract("noise mask in the code domain requires noise codes"))?;
            noise.validate()?;
            if noise.codebook_size != codebook_size {
                return Err(contract(format!(
                    "noise codebook size {} differs from sequence codebook size {codebook_size}",
                    noise.codebook_size
                )));
            }
            if noise.is_empty() {
                return Err(contract("noise code sequence is empty"));
            }
            let offset = spec.noise_options.offset % noise.len();
            let mut out = input.to_vec();
            for (dst, src) in out[range].iter_mut().zip(noise.codes.iter().cycle().skip(offset)) {
                *dst = *src;
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseKind;

    fn target(span_s: (f64, f64)) -> MaskTarget {
        MaskTarget { word_indices: 0..1, span_s }
    }

    fn spec(t: MaskType, span_s: (f64, f64), noise: Option<NoiseSource<f64>>) -> MaskSpec<f64> {
        MaskSpec::new("u1", t, target(span_s), Some(Position::Middle), noise).unwrap()
    }

    // 5 samples at 5 Hz: sample i covers [i/5, (i+1)/5)
    fn five() -> Waveform<f64> {
        Waveform::new(vec![0.1, 0.2, 0.3, 0.4, 0.5], 5).unwrap()
    }

    #[test]
    fn reverse_waveform_span() {
        let (out, m) = mask_waveform(&five(), &spec(MaskType::Reverse, (0.2, 0.8), None)).unwrap();
        assert_eq!(out.samples(), &[0.1, 0.4, 0.3, 0.2, 0.5]);
        assert_eq!(m.span_samples, Some((1, 4)));
        assert_eq!(m.output_length, 5);
    }

    #[test]
    fn delete_waveform_span() {
        let (out, m) = mask_waveform(&five(), &spec(MaskType::Delete, (0.2, 0.8), None)).unwrap();
        assert_eq!(out.samples(), &[0.1, 0.5]);
        assert_eq!(m.output_length, 2);
    }

    #[test]
    fn noise_waveform_span_level_matched() {
        let masker = NoiseSource {
            kind: NoiseKind::ExternalFile,
            waveform: Waveform::new(vec![0.5, -0.5], 5).unwrap(),
            seed: None,
        };
        let s = spec(MaskType::Noise, (0.2, 0.8), Some(masker));
        let (out, _) = mask_waveform(&five(), &s).unwrap();
        let speech_rms = rms(&[0.2, 0.3, 0.4]);
        assert_eq!(out.samples()[0], 0.1);
        assert_eq!(out.samples()[4], 0.5);
        assert!((rms(&out.samples()[1..4]) - speech_rms).abs() < 1e-12);
        assert!((out.samples()[1] - speech_rms).abs() < 1e-12);
        assert!((out.samples()[2] + speech_rms).abs() < 1e-12);

        let raw = s.clone().with_noise_options(NoiseOptions { level_match: false, offset: 0 });
        let (out, _) = mask_waveform(&five(), &raw).unwrap();
        assert_eq!(out.samples(), &[0.1, 0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn noise_without_source_fails() {
        let s = spec(MaskType::Noise, (0.2, 0.8), None);
        assert!(matches!(mask_waveform(&five(), &s), Err(Error::Contract(_))));
    }

    #[test]
    fn source_forbidden_for_other_types() {
        let masker = NoiseSource {
            kind: NoiseKind::ExternalFile,
            waveform: Waveform::new(vec![0.5], 5).unwrap(),
            seed: None,
        };
        assert!(MaskSpec::new("u", MaskType::Delete, target((0.0, 0.2)), None, Some(masker)).is_err());
    }

    #[test]
    fn span_out_of_range() {
        let s = spec(MaskType::Reverse, (0.6, 1.6), None);
        assert!(matches!(mask_waveform(&five(), &s), Err(Error::Contract(_))));
        let c = CodeSequence::new(vec![1, 2, 3], 4, 1.0).unwrap();
        let s = spec(MaskType::Reverse, (1.0, 5.0), None);
        assert!(matches!(mask_codes(&c, &s, None), Err(Error::Contract(_))));
        // one code of rounding overshoot is clamped
        let s = spec(MaskType::Reverse, (1.0, 4.0), None);
        assert_eq!(mask_codes(&c, &s, None).unwrap().0.codes, vec![1, 3, 2]);
    }

    fn codes() -> CodeSequence {
        CodeSequence::new(vec![5, 6, 7, 8], 16, 1.0).unwrap()
    }

    #[test]
    fn code_examples() {
        let noise = CodeSequence::new(vec![9, 9], 16, 1.0).unwrap();
        let (out, m) = mask_codes(&codes(), &spec(MaskType::Noise, (1.0, 3.0), None), Some(&noise)).unwrap();
        assert_eq!(out.codes, vec![5, 9, 9, 8]);
        assert_eq!(m.span_codes, (1, 3));
        let (out, _) = mask_codes(&codes(), &spec(MaskType::Delete, (1.0, 3.0), None), None).unwrap();
        assert_eq!(out.codes, vec![5, 8]);
        let (out, _) = mask_codes(&codes(), &spec(MaskType::Reverse, (1.0, 3.0), None), None).unwrap();
        assert_eq!(out.codes, vec![5, 7, 6, 8]);
    }

    #[test]
    fn noise_codes_tile_and_truncate() {
        let noise = CodeSequence::new(vec![1, 2, 3], 16, 1.0).unwrap();
        let c = CodeSequence::new(vec![0; 8], 16, 1.0).unwrap();
        let (out, _) = mask_codes(&c, &spec(MaskType::Noise, (1.0, 8.0), None), Some(&noise)).unwrap();
        assert_eq!(out.codes, vec![0, 1, 2, 3, 1, 2, 3, 1]);
        let (out, _) = mask_codes(&c, &spec(MaskType::Noise, (3.0, 5.0), None), Some(&noise)).unwrap();
        assert_eq!(out.codes, vec![0, 0, 0, 1, 2, 0, 0, 0]);
    }

    #[test]
    fn codebook_mismatch() {
        let noise = CodeSequence::new(vec![1], 8, 1.0).unwrap();
        let s = spec(MaskType::Noise, (1.0, 3.0), None);
        assert!(matches!(mask_codes(&codes(), &s, Some(&noise)), Err(Error::Contract(_))));
        assert!(matches!(mask_codes(&codes(), &s, None), Err(Error::Contract(_))));
    }

    #[test]
    fn code_span_rounding() {
        assert_eq!(span_to_codes((0.0, 1.2), DEFAULT_CODE_RATE_HZ), 0..300);
        assert_eq!(span_to_codes((0.4, 0.9), DEFAULT_CODE_RATE_HZ), 100..225);
        assert_eq!(span_to_codes((0.5, 0.5), DEFAULT_CODE_RATE_HZ), 125..126);
    }

    #[test]
    fn code_sequence_json() {
        let c = CodeSequence::from_json(br#"{"codebook_size": 4, "code_rate_hz": 250, "codes": [0, 3, 1]}"#).unwrap();
        assert_eq!(c.codes, vec![0, 3, 1]);
        assert!(CodeSequence::from_json(br#"{"codebook_size": 4, "code_rate_hz": 250, "codes": [4]}"#).is_err());
    }

    #[test]
    fn mask_type_names() {
        assert_eq!("reversal".parse::<MaskType>().unwrap(), MaskType::Reverse);
        assert_eq!("Deletion".parse::<MaskType>().unwrap(), MaskType::Delete);
        assert!("bleep".parse::<MaskType>().is_err());
    }
}
