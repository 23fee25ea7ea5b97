//! The masking grid: every eligible utterance × mask type × position × domain.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{Domain, ExperimentConfig};
use super::corpus::{load_corpus, CorpusEntry, Failure};
use super::io::{read_file, write_atomic, write_csv, write_json, write_jsonl};
use super::seeds::derive_seed;
use crate::alignment::{masked_reference, select_target, Position};
use crate::audio::{read_wav, write_wav, Waveform};
use crate::error::{contract, Error, Result};
use crate::masker::{mask_codes, mask_waveform, CodeSequence, MaskManifest, MaskSpec, MaskType, NoiseOptions};
use crate::noise::{load_masker, synthesize_masker, NoiseSource};
use crate::selection::{compute_stats, filter_eligible, UtteranceStats};

/// Reference transcript line written for each grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub utterance_id: String,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct GridOutcome {
    pub stats: Vec<UtteranceStats>,
    pub eligible: Vec<String>,
    pub manifests: Vec<MaskManifest>,
    pub failures: Vec<Failure>,
}

impl GridOutcome {
    pub fn all_failed(&self) -> bool {
        self.manifests.is_empty() && !self.failures.is_empty()
    }
}

pub fn cell_dir(root: &Path, domain: Domain, mask_type: MaskType, position: Position) -> PathBuf {
    root.join(domain.as_str()).join(mask_type.as_str()).join(position.as_str())
}

pub fn reference_path(out: &Path, domain: Domain, mask_type: MaskType, position: Position) -> PathBuf {
    out.join("references")
        .join(domain.as_str())
        .join(mask_type.as_str())
        .join(format!("{}.jsonl", position.as_str()))
}

pub fn original_reference_path(out: &Path) -> PathBuf {
    out.join("references").join("original.jsonl")
}

/// Computes selection stats for a loaded corpus and returns the eligible ids.
pub fn select(cfg: &ExperimentConfig, entries: &[CorpusEntry]) -> (Vec<UtteranceStats>, Vec<String>, Vec<Failure>) {
    let mut stats = Vec::new();
    let mut failures = Vec::new();
    for e in entries {
        match compute_stats(&e.alignment, e.codes.as_ref(), cfg.duration_basis, cfg.code_rate_hz) {
            Ok(s) => stats.push(s),
            Err(err) => failures.push(Failure::new(e.utterance_id(), "stats", err)),
        }
    }
    let eligible = if cfg.apply_selection {
        filter_eligible(&stats, &cfg.criteria()).into_iter().map(|s| s.utterance_id).collect()
    } else {
        stats.iter().map(|s| s.utterance_id.clone()).collect()
    };
    (stats, eligible, failures)
}

/// Writes `selection.csv` and `eligible.txt` (one id per line) into `dir`.
pub fn write_selection(dir: &Path, stats: &[UtteranceStats], eligible: &[String]) -> Result<()> {
    write_csv(&dir.join("selection.csv"), stats)?;
    let text: String = eligible.iter().map(|e| format!("{e}\n")).collect();
    write_atomic(&dir.join("eligible.txt"), text.as_bytes())
}

fn masker_source(cfg: &ExperimentConfig, entries: &[CorpusEntry]) -> Result<Option<(NoiseSource<f32>, Option<u64>)>> {
    if !cfg.types.contains(&MaskType::Noise) || !cfg.domains.contains(&Domain::Wave) {
        return Ok(None);
    }
    if let Some(path) = &cfg.masker_file {
        return Ok(Some((load_masker(&read_file(path)?)?, None)));
    }
    let rate = match entries.iter().find_map(|e| e.audio_path.as_ref()) {
        Some(p) => read_wav::<f32>(&read_file(p)?)?.sample_rate_hz(),
        None => 16_000,
    };
    let seed = cfg.masker_seed.unwrap_or_else(|| derive_seed(cfg.seed, &["masker"]));
    Ok(Some((synthesize_masker(cfg.masker_duration_s, rate, seed)?, Some(seed))))
}

/// Runs the configured grid, writing masked artifacts, manifests, masked
/// reference transcripts and selection stats under `cfg.output_dir`.
///
/// Per-utterance failures are recorded in the outcome and skipped.
pub fn run_mask_grid(cfg: &ExperimentConfig) -> Result<GridOutcome> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    let (entries, mut failures) = load_corpus(cfg)?;
    let (stats, eligible, stat_failures) = select(cfg, &entries);
    failures.extend(stat_failures);
    write_selection(&out.join("reports"), &stats, &eligible)?;
    if eligible.is_empty() {
        write_failures(out, &failures)?;
        return Err(Error::Selection("no utterances passed the eligibility filter".into()));
    }
    info!("{} of {} utterances eligible", eligible.len(), entries.len());

    let masker = masker_source(cfg, &entries)?;
    let noise_codes = match (&cfg.noise_codes, cfg.domains.contains(&Domain::Codes)) {
        (Some(p), true) => Some(CodeSequence::from_json(&read_file(p)?)?),
        _ => None,
    };

    let by_id: BTreeMap<&str, &CorpusEntry> = entries.iter().map(|e| (e.utterance_id(), e)).collect();
    let mut manifests = Vec::new();
    let mut references: BTreeMap<(Domain, MaskType, Position), Vec<ReferenceLine>> = BTreeMap::new();
    let mut originals = Vec::new();

    for id in &eligible {
        let entry = by_id[id.as_str()];
        originals.push(ReferenceLine { utterance_id: id.clone(), text: entry.transcript.join(" ") });
        let waveform = if cfg.domains.contains(&Domain::Wave) {
            match load_audio(entry) {
                Ok(w) => Some(w),
                Err(e) => {
                    failures.push(Failure::new(id, "audio", e));
                    None
                }
            }
        } else {
            None
        };
        for &domain in &cfg.domains {
            for &mask_type in &cfg.types {
                for &position in &cfg.positions {
                    let result = mask_one(
                        cfg,
                        entry,
                        domain,
                        mask_type,
                        position,
                        waveform.as_ref(),
                        masker.as_ref(),
                        noise_codes.as_ref(),
                    );
                    match result {
                        Ok((manifest, reference)) => {
                            references
                                .entry((domain, mask_type, position))
                                .or_default()
                                .push(ReferenceLine { utterance_id: id.clone(), text: reference.join(" ") });
                            manifests.push(manifest);
                        }
                        Err(e) => {
                            if !(domain == Domain::Wave && waveform.is_none()) {
                                failures.push(Failure::new(id, &format!("mask/{domain}/{mask_type}/{position}"), e));
                            }
                        }
                    }
                }
            }
        }
    }

    write_jsonl(&original_reference_path(out), &originals)?;
    for &domain in &cfg.domains {
        for &mask_type in &cfg.types {
            for &position in &cfg.positions {
                let rows = references.remove(&(domain, mask_type, position)).unwrap_or_default();
                write_jsonl(&reference_path(out, domain, mask_type, position), &rows)?;
            }
        }
    }
    failures.sort();
    write_failures(out, &failures)?;
    for f in &failures {
        warn!("{}: {}: {}", f.utterance_id, f.stage, f.message);
    }
    Ok(GridOutcome { stats, eligible, manifests, failures })
}

fn write_failures(out: &Path, failures: &[Failure]) -> Result<()> {
    let path = out.join("reports").join("failures.csv");
    if failures.is_empty() {
        return write_atomic(&path, b"utterance_id,stage,message\n");
    }
    write_csv(&path, failures)
}

fn load_audio(entry: &CorpusEntry) -> Result<Waveform<f32>> {
    let path = entry.audio_path.as_ref().ok_or_else(|| contract("no audio path"))?;
    read_wav(&read_file(path)?)
}

#[allow(clippy::too_many_arguments)]
fn mask_one(
    cfg: &ExperimentConfig,
    entry: &CorpusEntry,
    domain: Domain,
    mask_type: MaskType,
    position: Position,
    waveform: Option<&Waveform<f32>>,
    masker: Option<&(NoiseSource<f32>, Option<u64>)>,
    noise_codes: Option<&CodeSequence>,
) -> Result<(MaskManifest, Vec<String>)> {
    let id = entry.utterance_id();
    let target = select_target(&entry.alignment, position, cfg.n_words)?;
    let reference = masked_reference(&entry.transcript, &target)?;

    let noise_len = match domain {
        Domain::Wave => masker.map(|m| m.0.waveform.len()),
        Domain::Codes => noise_codes.map(CodeSequence::len),
    };
    let offset = match (cfg.random_offset, noise_len) {
        (true, Some(n)) if n > 0 => (derive_seed(cfg.seed, &["offset", domain.as_str(), id]) % n as u64) as usize,
        _ => 0,
    };
    let noise_source = match (mask_type, domain) {
        (MaskType::Noise, Domain::Wave) => masker.map(|m| m.0.clone()),
        _ => None,
    };
    let seed = match mask_type {
        MaskType::Noise if cfg.random_offset => Some(cfg.seed),
        MaskType::Noise if domain == Domain::Wave => masker.and_then(|m| m.1),
        _ => None,
    };
    let spec = MaskSpec::new(id, mask_type, target, Some(position), noise_source)?
        .with_noise_options(NoiseOptions { level_match: cfg.level_match, offset })
        .with_code_rate(cfg.code_rate_hz)
        .with_seed(seed);

    let cell = cell_dir(&cfg.output_dir.join("masked"), domain, mask_type, position);
    let manifest = match domain {
        Domain::Wave => {
            let w = waveform.ok_or_else(|| contract("waveform unavailable"))?;
            if let Some((m, _)) = masker.filter(|_| mask_type == MaskType::Noise) {
                if m.waveform.sample_rate_hz() != w.sample_rate_hz() {
                    return Err(contract(format!(
                        "masker rate {} Hz differs from utterance rate {} Hz",
                        m.waveform.sample_rate_hz(),
                        w.sample_rate_hz()
                    )));
                }
            }
            let (masked, manifest) = mask_waveform(w, &spec)?;
            write_atomic(&cell.join(format!("{id}.wav")), &write_wav(&masked))?;
            manifest
        }
        Domain::Codes => {
            let codes = entry.codes.as_ref().ok_or_else(|| contract("code sequence unavailable"))?;
            let (masked, manifest) = mask_codes(codes, &spec, noise_codes)?;
            write_json(&cell.join(format!("{id}.json")), &masked)?;
            manifest
        }
    };
    let manifest_dir = cell_dir(&cfg.output_dir.join("manifests"), domain, mask_type, position);
    write_json(&manifest_dir.join(format!("{id}.json")), &manifest)?;
    Ok((manifest, reference))
}
