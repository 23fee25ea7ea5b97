//! Scoring stages that sit after the external recognizer and speaker
//! embedding extractor.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::corpus::Failure;
use super::grid::ReferenceLine;
use super::io::{read_csv, read_jsonl, write_csv, write_json};
use crate::error::{contract, Result};
use crate::metrics::{wer, Normalization, TranscriptPair};
use crate::trials::{eer, enumerate_trials_by_id, score_trials, Embedding, EerResult, ScoredTrial, TrialMode};

/// Mask-type / position label of the unmasked condition.
pub const UNMASKED: &str = "none";

/// One recognizer output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisLine {
    pub utterance_id: String,
    pub text: String,
}

/// Which grid cell a batch of results belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellLabel {
    pub system: String,
    pub domain: String,
    pub mask_type: String,
    pub position: String,
}

impl CellLabel {
    pub fn new(system: &str, domain: &str, mask_type: &str, position: &str) -> Self {
        Self {
            system: system.to_string(),
            domain: domain.to_string(),
            mask_type: mask_type.to_string(),
            position: position.to_string(),
        }
    }

    pub fn is_unmasked(&self) -> bool {
        self.mask_type == UNMASKED
    }
}

/// Per-pair WER row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WerRow {
    pub utterance_id: String,
    pub system: String,
    pub domain: String,
    pub mask_type: String,
    pub position: String,
    pub n_ref: usize,
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub wer: f64,
    pub filtered: bool,
    pub ref_chars: usize,
    pub hyp_chars: usize,
}

impl WerRow {
    pub fn label(&self) -> CellLabel {
        CellLabel::new(&self.system, &self.domain, &self.mask_type, &self.position)
    }
}

/// Scores hypotheses against references, pairing by utterance id in
/// reference order. References without a hypothesis are reported as failures.
pub fn eval_wer(
    references: &[ReferenceLine],
    hypotheses: &[HypothesisLine],
    label: &CellLabel,
    norm: &Normalization,
) -> (Vec<WerRow>, Vec<Failure>) {
    let hyps: BTreeMap<&str, &str> = hypotheses.iter().map(|h| (h.utterance_id.as_str(), h.text.as_str())).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in references {
        let Some(hyp) = hyps.get(r.utterance_id.as_str()) else {
            failures.push(Failure::new(&r.utterance_id, "eval-wer", "no hypothesis"));
            continue;
        };
        let pair = TranscriptPair::from_text(r.utterance_id.clone(), &r.text, hyp, norm);
        match wer::<f64>(&pair) {
            Ok(w) => rows.push(WerRow {
                utterance_id: r.utterance_id.clone(),
                system: label.system.clone(),
                domain: label.domain.clone(),
                mask_type: label.mask_type.clone(),
                position: label.position.clone(),
                n_ref: w.n_ref,
                substitutions: w.substitutions,
                deletions: w.deletions,
                insertions: w.insertions,
                wer: w.wer,
                filtered: w.filtered,
                ref_chars: pair.raw_reference_chars,
                hyp_chars: pair.raw_hypothesis_chars,
            }),
            Err(e) => failures.push(Failure::new(&r.utterance_id, "eval-wer", e)),
        }
    }
    (rows, failures)
}

/// Path of the per-pair CSV for a cell under `root`.
pub fn wer_csv_path(root: &Path, label: &CellLabel) -> std::path::PathBuf {
    root.join(&label.system).join(&label.domain).join(format!("{}_{}.csv", label.mask_type, label.position))
}

/// File-level wrapper: reads references and hypotheses JSONL, writes the
/// per-pair CSV.
pub fn eval_wer_files(
    references: &Path,
    hypotheses: &Path,
    label: &CellLabel,
    out_csv: &Path,
) -> Result<(Vec<WerRow>, Vec<Failure>)> {
    let refs: Vec<ReferenceLine> = read_jsonl(references)?;
    let hyps: Vec<HypothesisLine> = read_jsonl(hypotheses)?;
    let (rows, failures) = eval_wer(&refs, &hyps, label, &Normalization::default());
    write_csv(out_csv, &rows)?;
    Ok((rows, failures))
}

pub fn read_wer_rows(path: &Path) -> Result<Vec<WerRow>> {
    read_csv(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsvSummary {
    pub n_target: usize,
    pub n_nontarget: usize,
    pub eer: f64,
    pub threshold: f64,
}

/// Enumerates trials over the test set, scores them with enrollment
/// embeddings from `enroll` and computes the EER.
///
/// Only utterances present in both sets take part.
pub fn eval_asv(
    enroll: &[Embedding<f64>],
    test: &[Embedding<f64>],
    mode: TrialMode,
) -> Result<(Vec<ScoredTrial<f64>>, AsvSummary)> {
    let enrolled: BTreeMap<&str, &str> =
        enroll.iter().map(|e| (e.utterance_id.as_str(), e.speaker_id.as_str())).collect();
    for t in test {
        if let Some(s) = enrolled.get(t.utterance_id.as_str()) {
            if *s != t.speaker_id {
                return Err(contract(format!("utterance {} has conflicting speaker ids", t.utterance_id)));
            }
        }
    }
    let items = test
        .iter()
        .filter(|t| enrolled.contains_key(t.utterance_id.as_str()))
        .map(|t| (t.utterance_id.as_str(), t.speaker_id.as_str()));
    let trials = enumerate_trials_by_id(items, mode)?;
    let scored = score_trials(&trials, enroll, test)?;
    let pairs: Vec<(f64, bool)> = scored.iter().map(|s| (s.score, s.is_target())).collect();
    let EerResult { eer: e, threshold } = eer(&pairs)?;
    let n_target = pairs.iter().filter(|p| p.1).count();
    Ok((scored, AsvSummary { n_target, n_nontarget: pairs.len() - n_target, eer: e, threshold }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrialRow<'a> {
    enroll_id: &'a str,
    test_id: &'a str,
    label: &'a str,
}

/// File-level wrapper: writes `trials.csv`, `scores.csv` and `eer.json`
/// into `out_dir`.
pub fn eval_asv_files(enroll: &Path, test: &Path, mode: TrialMode, out_dir: &Path) -> Result<AsvSummary> {
    let e: Vec<Embedding<f64>> = read_jsonl(enroll)?;
    let t: Vec<Embedding<f64>> = read_jsonl(test)?;
    let (scored, summary) = eval_asv(&e, &t, mode)?;
    let trials: Vec<TrialRow> = scored
        .iter()
        .map(|s| TrialRow { enroll_id: &s.enroll_id, test_id: &s.test_id, label: &s.label })
        .collect();
    write_csv(&out_dir.join("trials.csv"), &trials)?;
    write_csv(&out_dir.join("scores.csv"), &scored)?;
    write_json(&out_dir.join("eer.json"), &summary)?;
    Ok(summary)
}
