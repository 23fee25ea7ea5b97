//! 16-bit PCM mono WAV I/O and sample-span arithmetic.

use crate::error::{contract, Error, Result};
use crate::scalar::Real;

/// Largest sample value that survives quantization without wrapping.
pub const MAX_SAMPLE: f64 = 1.0 - 1.0 / 32768.0;

/// Mono sample buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T> {
    samples: Vec<T>,
    sample_rate_hz: u32,
}

impl<T: Real> Waveform<T> {
    /// Fails on a zero rate, non-finite samples, or samples outside [-1, 1].
    pub fn new(samples: Vec<T>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(contract("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > T::one()) {
            return Err(contract(format!("sample {i} is {} (must be finite, within [-1, 1])", samples[i])));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn slice(&self, span: SampleSpan) -> &[T] {
        &self.samples[span.start_idx..span.end_idx]
    }
}

/// Half-open sample range `[start_idx, end_idx)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleSpan {
    pub start_idx: usize,
    pub end_idx: usize,
}

impl SampleSpan {
    pub fn new(start_idx: usize, end_idx: usize, host_len: usize) -> Result<Self> {
        if start_idx >= end_idx || end_idx > host_len {
            return Err(contract(format!(
                "span [{start_idx}, {end_idx}) invalid for a buffer of {host_len} samples"
            )));
        }
        Ok(Self { start_idx, end_idx })
    }

    pub fn len(&self) -> usize {
        self.end_idx - self.start_idx
    }

    pub fn is_empty(&self) -> bool {
        self.end_idx <= self.start_idx
    }
}

/// Converts alignment times to a sample span by nearest-sample rounding.
///
/// An end time up to 1 ms past the buffer (aligner rounding) is clamped; a
/// span that rounds to zero samples is widened to one.
pub fn span_from_seconds<T: Real>(w: &Waveform<T>, start_s: f64, end_s: f64) -> Result<SampleSpan> {
    span_for_length(w.len(), w.sample_rate_hz(), start_s, end_s)
}

pub(crate) fn span_for_length(len: usize, rate: u32, start_s: f64, end_s: f64) -> Result<SampleSpan> {
    let duration = len as f64 / rate as f64;
    if !(start_s.is_finite() && end_s.is_finite()) || start_s < 0.0 || end_s <= start_s {
        return Err(contract(format!("invalid time span ({start_s}, {end_s})")));
    }
    if end_s > duration + 1e-3 {
        return Err(contract(format!("span end {end_s} s exceeds waveform duration {duration} s")));
    }
    let rate = rate as f64;
    let mut start_idx = ((start_s * rate).round() as usize).min(len);
    let mut end_idx = ((end_s * rate).round() as usize).min(len);
    if start_idx >= end_idx {
        if start_idx < len {
            end_idx = start_idx + 1;
        } else if len > 0 {
            start_idx = len - 1;
            end_idx = len;
        }
    }
    SampleSpan::new(start_idx, end_idx, len)
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

const WAVE_FORMAT_PCM: u16 = 0x0001;
const WAVE_FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Decodes a RIFF/WAVE file holding 16-bit signed PCM mono audio.
pub fn read_wav<T: Real>(bytes: &[u8]) -> Result<Waveform<T>> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("not a RIFF/WAVE file".into()));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).filter(|&e| e <= bytes.len());
        match id {
            b"fmt " => {
                let end = body_end.ok_or_else(|| Error::Format("truncated fmt chunk".into()))?;
                let body = &bytes[body_start..end];
                if body.len() < 16 {
                    return Err(Error::Format("fmt chunk shorter than 16 bytes".into()));
                }
                let mut tag = u16_at(body, 0);
                if tag == WAVE_FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(Error::Format("truncated WAVE_FORMAT_EXTENSIBLE header".into()));
                    }
                    tag = u16_at(body, 24);
                }
                fmt = Some((tag, u16_at(body, 2), u32_at(body, 4), u16_at(body, 14)));
            }
            b"data" => {
                let end = body_end.ok_or_else(|| {
                    Error::Format(format!(
                        "truncated data chunk: header declares {size} bytes, {} present",
                        bytes.len() - body_start
                    ))
                })?;
                data = Some(&bytes[body_start..end]);
                break;
            }
            _ => {}
        }
        pos = body_start + size + (size & 1);
    }
    let (tag, channels, rate, bits) = fmt.ok_or_else(|| Error::Format("missing fmt chunk".into()))?;
    if tag != WAVE_FORMAT_PCM {
        return Err(Error::Format(format!("codec tag {tag:#06x} is not integer PCM")));
    }
    if channels != 1 {
        return Err(Error::Format(format!("{channels} channels; only mono is supported")));
    }
    if bits != 16 {
        return Err(Error::Format(format!("{bits}-bit samples; only 16-bit is supported")));
    }
    if rate == 0 {
        return Err(Error::Format("sample rate is zero".into()));
    }
    let data = data.ok_or_else(|| Error::Format("missing data chunk".into()))?;
    if data.len() % 2 != 0 {
        return Err(Error::Format("data chunk length is odd for 16-bit samples".into()));
    }
    let scale = T::of(32768.0);
    let samples = data
        .chunks_exact(2)
        .map(|c| T::of(i16::from_le_bytes([c[0], c[1]]) as f64) / scale)
        .collect();
    Waveform::new(samples, rate)
}

/// Quantizes one sample: clamp to [-1, 1 - 2^-15], scale by 32768, round
/// half away from zero.
pub fn quantize<T: Real>(x: T) -> i16 {
    let clamped = x.as_f64().clamp(-1.0, MAX_SAMPLE);
    (clamped * 32768.0).round() as i16
}

/// Encodes a waveform as a canonical 44-byte-header 16-bit PCM mono WAV.
pub fn write_wav<T: Real>(w: &Waveform<T>) -> Vec<u8> {
    let data_len = (w.len() * 2) as u32;
    let rate = w.sample_rate_hz();
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&WAVE_FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in w.samples() {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    out
}

/// Returns the payload of the first `data` chunk, if any.
pub fn data_chunk(bytes: &[u8]) -> Option<&[u8]> {
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let size = u32_at(bytes, pos + 4) as usize;
        if &bytes[pos..pos + 4] == b"data" {
            return bytes.get(pos + 8..pos + 8 + size);
        }
        pos += 8 + size + (size & 1);
    }
    None
}

/// Root-mean-square level of a sample slice (zero for an empty slice).
pub fn rms<T: Real>(samples: &[T]) -> T {
    if samples.is_empty() {
        return T::zero();
    }
    let sum: T = samples.iter().map(|&s| s * s).sum();
    (sum / T::of_usize(samples.len())).sqrt()
}
