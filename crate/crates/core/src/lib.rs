//! Word-level content masking for speech.
//!
//! Words located by forced alignment are concealed with one of three masks
//! (speech-shaped noise, deletion, time reversal) either in the waveform or
//! in a sequence of discrete VQ phone codes. The crate also carries the
//! evaluation side: WER with failure filtering, paired t-tests and
//! log-domain KDE for ASR, and trial enumeration, cosine scoring and EER
//! for speaker verification.
//!
//! Signal and score types are generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar for everyday use.

pub mod alignment;
pub mod audio;
pub mod error;
pub mod masker;
pub mod metrics;
pub mod noise;
pub mod pipeline;
pub mod scalar;
pub mod selection;
pub mod trials;

pub use alignment::{
    masked_reference, parse_textgrid, select_target, serialize_textgrid, AlignedUtterance, MaskTarget,
    ParseOptions, Position, WordInterval,
};
pub use audio::{read_wav, span_from_seconds, write_wav, SampleSpan};
pub use error::{Error, Result};
pub use masker::{mask_codes, mask_waveform, span_to_codes, CodeSequence, MaskManifest, MaskType, NoiseOptions};
pub use metrics::{failure_filter, kde_log_wer, paired_t_test, wer, Normalization, TranscriptPair};
pub use noise::{cut_segment, load_masker, synthesize_masker, NoiseKind};
pub use scalar::Real;
pub use selection::{compute_stats, filter_eligible, Criteria, UtteranceStats};
pub use trials::{cosine_score, eer, enumerate_trials, Trial, TrialMode};

pub type Waveform = audio::Waveform<f32>;
pub type Waveform64 = audio::Waveform<f64>;
pub type NoiseSource = noise::NoiseSource<f32>;
pub type NoiseSource64 = noise::NoiseSource<f64>;
pub type MaskSpec = masker::MaskSpec<f32>;
pub type MaskSpec64 = masker::MaskSpec<f64>;
pub type WerResult = metrics::WerResult<f64>;
pub type KdeCurve = metrics::KdeCurve<f64>;
pub type KdeEstimate = metrics::KdeEstimate<f64>;
pub type PairedTestResult = metrics::PairedTestResult<f64>;
pub type Embedding = trials::Embedding<f32>;
pub type Embedding64 = trials::Embedding<f64>;
pub type EerResult = trials::EerResult<f64>;
pub type ScoredTrial = trials::ScoredTrial<f64>;
