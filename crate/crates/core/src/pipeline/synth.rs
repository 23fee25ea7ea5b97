//! A seeded synthetic corpus plus simulated recognizer and speaker-embedding
//! outputs, used to exercise the whole pipeline without neural models.
//!
//! Words are Hann-windowed tone pairs whose pitch depends on the word and
//! the speaker; code sequences are random indices at the code rate.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{Domain, ExperimentConfig};
use super::corpus::TranscriptLine;
use super::eval::{HypothesisLine, UNMASKED};
use super::grid::ReferenceLine;
use super::io::{write_atomic, write_json, write_jsonl};
use super::seeds::derive_seed;
use crate::alignment::{serialize_textgrid, AlignedUtterance, WordInterval, DEFAULT_SIL_TOKEN};
use crate::audio::{write_wav, Waveform};
use crate::error::Result;
use crate::masker::{CodeSequence, MaskType, DEFAULT_CODE_RATE_HZ};
use crate::trials::Embedding;

const VOCABULARY: [&str; 24] = [
    "please", "call", "stella", "ask", "her", "to", "bring", "these", "things", "with", "from", "the", "store",
    "six", "spoons", "of", "fresh", "snow", "peas", "five", "thick", "slabs", "blue", "cheese",
];

pub const CODEBOOK_SIZE: u32 = 256;
pub const EMBEDDING_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    /// Number of eligible utterances for each speaker.
    pub utterances_per_speaker: Vec<usize>,
    /// Add one short, fast utterance that fails the selection criteria.
    pub include_ineligible: bool,
    pub sample_rate_hz: u32,
    pub noise_codes_len: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            utterances_per_speaker: vec![3; 9],
            include_ineligible: true,
            sample_rate_hz: 16_000,
            noise_codes_len: 2_500,
            seed: 0,
        }
    }
}

/// Paths of a written synthetic corpus.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub root: PathBuf,
    pub textgrid_dir: PathBuf,
    pub audio_dir: PathBuf,
    pub codes_dir: PathBuf,
    pub transcripts: PathBuf,
    pub noise_codes: PathBuf,
    pub utterances: Vec<AlignedUtterance>,
}

impl SynthCorpus {
    /// A full-grid config over this corpus writing to `output_dir`.
    pub fn config(&self, output_dir: impl Into<PathBuf>, seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(&self.textgrid_dir, output_dir);
        cfg.audio_dir = Some(self.audio_dir.clone());
        cfg.codes_dir = Some(self.codes_dir.clone());
        cfg.transcripts = Some(self.transcripts.clone());
        cfg.noise_codes = Some(self.noise_codes.clone());
        cfg.seed = seed;
        cfg
    }
}

pub fn speaker_name(i: usize) -> String {
    format!("spk{:02}", i + 1)
}

/// Utterance ids and speakers without writing anything.
pub fn utterance_ids(per_speaker: &[usize]) -> Vec<(String, String)> {
    per_speaker
        .iter()
        .enumerate()
        .flat_map(|(s, &n)| {
            let spk = speaker_name(s);
            (0..n).map(move |u| (format!("{spk}_{:03}", u + 1), spk.clone()))
        })
        .collect()
}

fn word_frequency(word: &str) -> f64 {
    let i = VOCABULARY.iter().position(|w| *w == word).unwrap_or(0);
    220.0 + 35.0 * i as f64
}

fn build_alignment(id: &str, speaker: &str, words: &[&str], rng: &mut ChaCha8Rng, fast: bool) -> AlignedUtterance {
    let mut t = 0.0;
    let mut intervals = Vec::new();
    let mut push = |label: &str, dur: f64, t: &mut f64| {
        let end = ((*t + dur) * 1000.0).round() / 1000.0;
        intervals.push(WordInterval { label: label.to_string(), start_s: *t, end_s: end, is_sil: label == DEFAULT_SIL_TOKEN });
        *t = end;
    };
    let lead = if fast { 0.05 } else { rng.random_range(0.15..0.3) };
    push(DEFAULT_SIL_TOKEN, lead, &mut t);
    for (i, w) in words.iter().enumerate() {
        let dur = if fast { 0.16 } else { rng.random_range(0.28..0.42) };
        push(w, dur, &mut t);
        if i + 1 < words.len() && !fast && rng.random_bool(0.5) {
            let gap = rng.random_range(0.05..0.15);
            push(DEFAULT_SIL_TOKEN, gap, &mut t);
        }
    }
    push(DEFAULT_SIL_TOKEN, if fast { 0.05 } else { rng.random_range(0.15..0.3) }, &mut t);
    AlignedUtterance {
        utterance_id: id.to_string(),
        speaker_id: speaker.to_string(),
        words: intervals,
        total_duration_s: t,
    }
}

fn render(utt: &AlignedUtterance, pitch: f64, rate: u32, rng: &mut ChaCha8Rng) -> Result<Waveform<f32>> {
    let fs = rate as f64;
    let n = (utt.total_duration_s * fs).round() as usize;
    let floor = Normal::new(0.0, 0.002).expect("valid");
    let mut x: Vec<f64> = (0..n).map(|_| floor.sample(rng)).collect();
    for w in utt.non_sil_words() {
        let f0 = word_frequency(&w.label) * pitch;
        let a = (w.start_s * fs).round() as usize;
        let b = ((w.end_s * fs).round() as usize).min(n);
        let len = (b - a) as f64;
        for (k, v) in x[a..b].iter_mut().enumerate() {
            let t = k as f64 / fs;
            let win = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / len).cos();
            let tone = (2.0 * std::f64::consts::PI * f0 * t).sin() + 0.4 * (2.0 * std::f64::consts::PI * 2.0 * f0 * t).sin();
            *v += 0.25 * win * tone;
        }
    }
    Waveform::new(x.into_iter().map(|v| v.clamp(-1.0, 1.0) as f32).collect(), rate)
}

fn random_codes(n: usize, rng: &mut ChaCha8Rng) -> Result<CodeSequence> {
    CodeSequence::new((0..n).map(|_| rng.random_range(0..CODEBOOK_SIZE)).collect(), CODEBOOK_SIZE, DEFAULT_CODE_RATE_HZ)
}

/// Writes TextGrids, WAVs, code sequences, transcripts and a noise-code
/// stream under `root`.
pub fn synth_corpus(root: &Path, opts: &SynthOptions) -> Result<SynthCorpus> {
    let corpus = SynthCorpus {
        root: root.to_path_buf(),
        textgrid_dir: root.join("textgrids"),
        audio_dir: root.join("audio"),
        codes_dir: root.join("codes"),
        transcripts: root.join("transcripts.jsonl"),
        noise_codes: root.join("noise_codes.json"),
        utterances: Vec::new(),
    };
    let mut ids: Vec<(String, String, bool)> =
        utterance_ids(&opts.utterances_per_speaker).into_iter().map(|(u, s)| (u, s, false)).collect();
    if opts.include_ineligible && !opts.utterances_per_speaker.is_empty() {
        let spk = speaker_name(0);
        ids.push((format!("{spk}_900"), spk, true));
    }

    let mut utterances = Vec::new();
    let mut transcripts = Vec::new();
    for (id, spk, fast) in &ids {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, &["utterance", id]));
        let n_words = if *fast { 5 } else { rng.random_range(7..=10) };
        let words: Vec<&str> = (0..n_words).map(|_| VOCABULARY[rng.random_range(0..VOCABULARY.len())]).collect();
        let utt = build_alignment(id, spk, &words, &mut rng, *fast);
        let pitch = 0.8 + 0.05 * speaker_index(spk) as f64;
        let wave = render(&utt, pitch, opts.sample_rate_hz, &mut rng)?;
        let codes = random_codes((utt.total_duration_s * DEFAULT_CODE_RATE_HZ).round() as usize, &mut rng)?;

        write_atomic(&corpus.textgrid_dir.join(format!("{id}.TextGrid")), serialize_textgrid(&utt).as_bytes())?;
        write_atomic(&corpus.audio_dir.join(format!("{id}.wav")), &write_wav(&wave))?;
        write_json(&corpus.codes_dir.join(format!("{id}.json")), &codes)?;
        transcripts.push(TranscriptLine { utterance_id: id.clone(), text: words.join(" ") });
        utterances.push(utt);
    }
    write_jsonl(&corpus.transcripts, &transcripts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, &["noise-codes"]));
    write_json(&corpus.noise_codes, &random_codes(opts.noise_codes_len, &mut rng)?)?;
    Ok(SynthCorpus { utterances, ..corpus })
}

fn speaker_index(spk: &str) -> usize {
    spk.trim_start_matches("spk").parse::<usize>().unwrap_or(1).saturating_sub(1)
}

/// Stand-in recognizer with a fixed error profile per condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedAsr {
    pub name: &'static str,
    pub base_error: f64,
    /// Probability of a runaway repetition that the failure filter catches.
    pub failure_rate: f64,
}

pub const SIMULATED_ASR: [SimulatedAsr; 2] = [
    SimulatedAsr { name: "sim-asr-a", base_error: 0.04, failure_rate: 0.03 },
    SimulatedAsr { name: "sim-asr-b", base_error: 0.10, failure_rate: 0.06 },
];

fn condition_error(domain: &str, mask_type: &str) -> f64 {
    let d = if domain == Domain::Codes.as_str() { 0.06 } else { 0.0 };
    let m = match mask_type {
        "noise" => 0.05,
        "delete" => 0.02,
        "reverse" => 0.08,
        _ => 0.0,
    };
    d + m
}

impl SimulatedAsr {
    /// Hypotheses for a cell's references. Masks other than deletion leave
    /// a chance of a hallucinated word where the masked word was.
    pub fn transcribe(&self, refs: &[ReferenceLine], domain: &str, mask_type: &str, position: &str, seed: u64) -> Vec<HypothesisLine> {
        let p = self.base_error + condition_error(domain, mask_type);
        refs.iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    seed,
                    &["asr", self.name, domain, mask_type, position, &r.utterance_id],
                ));
                let mut words: Vec<String> = r
                    .text
                    .split_whitespace()
                    .map(|w| {
                        if rng.random_bool(p) {
                            VOCABULARY[rng.random_range(0..VOCABULARY.len())].to_string()
                        } else {
                            w.to_string()
                        }
                    })
                    .collect();
                if mask_type != UNMASKED && mask_type != MaskType::Delete.as_str() && rng.random_bool(0.3) {
                    let at = rng.random_range(0..=words.len());
                    words.insert(at, "uh".to_string());
                }
                let mut text = words.join(" ");
                if rng.random_bool(self.failure_rate) {
                    text = std::iter::repeat_n(text.as_str(), 4).collect::<Vec<_>>().join(" ");
                }
                HypothesisLine { utterance_id: r.utterance_id.clone(), text }
            })
            .collect()
    }
}

/// Stand-in speaker-embedding extractor: a speaker centroid plus
/// utterance-level noise, plus extra noise that grows with the masking
/// condition.
#[derive(Debug, Clone)]
pub struct SimulatedEmbedder {
    pub seed: u64,
}

fn condition_spread(domain: &str, mask_type: &str, position: &str) -> f64 {
    let d = if domain == Domain::Codes.as_str() { 0.6 } else { 0.0 };
    let m = match mask_type {
        "noise" => 0.5,
        "delete" => 0.3,
        "reverse" => 0.7,
        _ => 0.0,
    };
    let p = if position == "middle" { 0.1 } else { 0.0 };
    d + m + p
}

fn gaussian_vector(seed: u64, sd: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, sd).expect("valid");
    (0..EMBEDDING_DIM).map(|_| n.sample(&mut rng)).collect()
}

impl SimulatedEmbedder {
    pub fn embed(&self, utterance_id: &str, speaker_id: &str, domain: &str, mask_type: &str, position: &str) -> Embedding<f64> {
        let centroid = gaussian_vector(derive_seed(self.seed, &["speaker", speaker_id]), 1.0);
        let own = gaussian_vector(derive_seed(self.seed, &["utterance", utterance_id]), 1.0);
        let spread = condition_spread(domain, mask_type, position);
        let cond = gaussian_vector(derive_seed(self.seed, &["condition", domain, mask_type, position, utterance_id]), 1.0);
        let vector = centroid.iter().zip(&own).zip(&cond).map(|((c, o), e)| c + o + spread * e).collect();
        Embedding { utterance_id: utterance_id.to_string(), speaker_id: speaker_id.to_string(), vector }
    }

    /// Enrollment embeddings: unmasked original speech.
    pub fn enroll(&self, ids: &[(String, String)]) -> Vec<Embedding<f64>> {
        ids.iter().map(|(u, s)| self.embed(u, s, Domain::Wave.as_str(), UNMASKED, UNMASKED)).collect()
    }
}
