//! Word error rate and the catastrophic-failure filter.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::scalar::Real;

/// Hypotheses longer than the reference by more than this many characters
/// are treated as recognizer failures and left out of aggregates.
pub const MAX_EXTRA_HYPOTHESIS_CHARS: i64 = 30;

/// Text normalization applied before tokenization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalization {
    pub lowercase: bool,
    /// Remove everything except letters, digits, apostrophes and whitespace.
    pub strip_punctuation: bool,
}

impl Default for Normalization {
    fn default() -> Self {
        Self { lowercase: true, strip_punctuation: true }
    }
}

impl Normalization {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut cleaned = String::with_capacity(text.len());
        for c in text.chars() {
            if self.strip_punctuation && !(c.is_alphanumeric() || c == '\'' || c.is_whitespace()) {
                cleaned.push(' ');
                continue;
            }
            if self.lowercase {
                cleaned.extend(c.to_lowercase());
            } else {
                cleaned.push(c);
            }
        }
        cleaned
            .split_whitespace()
            .map(|t| if self.strip_punctuation { t.trim_matches('\'') } else { t })
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    }
}

/// A reference/hypothesis pair for one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptPair {
    pub utterance_id: String,
    pub reference: Vec<String>,
    pub hypothesis: Vec<String>,
    /// Character counts of the raw strings, whitespace included.
    pub raw_reference_chars: usize,
    pub raw_hypothesis_chars: usize,
}

impl TranscriptPair {
    pub fn from_text(utterance_id: impl Into<String>, reference: &str, hypothesis: &str, norm: &Normalization) -> Self {
        Self {
            utterance_id: utterance_id.into(),
            reference: norm.tokenize(reference),
            hypothesis: norm.tokenize(hypothesis),
            raw_reference_chars: reference.chars().count(),
            raw_hypothesis_chars: hypothesis.chars().count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerResult<T> {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub n_ref: usize,
    pub wer: T,
    pub filtered: bool,
}

impl<T> WerResult<T> {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }
}

/// Edit operation counts from a minimum-edit-distance alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub hits: usize,
}

impl EditCounts {
    pub fn distance(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }
}

/// Aligns `hyp` against `reference` with unit costs.
///
/// Backtrace prefers match/substitution, then insertion, then deletion when
/// several predecessors tie.
pub fn align<S: PartialEq>(reference: &[S], hyp: &[S]) -> EditCounts {
    let n = reference.len();
    let m = hyp.len();
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for (j, v) in d[..w].iter_mut().enumerate() {
        *v = j;
    }
    for i in 1..=n {
        d[i * w] = i;
        for j in 1..=m {
            let cost = usize::from(reference[i - 1] != hyp[j - 1]);
            let diag = d[(i - 1) * w + j - 1] + cost;
            let ins = d[i * w + j - 1] + 1;
            let del = d[(i - 1) * w + j] + 1;
            d[i * w + j] = diag.min(ins).min(del);
        }
    }

    let mut counts = EditCounts::default();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hyp[j - 1];
            if d[(i - 1) * w + j - 1] + usize::from(!same) == here {
                if same {
                    counts.hits += 1;
                } else {
                    counts.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && d[i * w + j - 1] + 1 == here {
            counts.insertions += 1;
            j -= 1;
        } else {
            counts.deletions += 1;
            i -= 1;
        }
    }
    counts
}

/// Scores one pair. `filtered` is set by [`failure_filter`].
pub fn wer<T: Real>(pair: &TranscriptPair) -> Result<WerResult<T>> {
    if pair.reference.is_empty() {
        return Err(contract(format!("utterance {}: empty reference", pair.utterance_id)));
    }
    let c = align(&pair.reference, &pair.hypothesis);
    let n_ref = pair.reference.len();
    Ok(WerResult {
        substitutions: c.substitutions,
        deletions: c.deletions,
        insertions: c.insertions,
        n_ref,
        wer: T::of_usize(c.distance()) / T::of_usize(n_ref),
        filtered: failure_filter(pair),
    })
}

/// True when the raw hypothesis exceeds the raw reference by more than
/// [`MAX_EXTRA_HYPOTHESIS_CHARS`] characters.
pub fn failure_filter(pair: &TranscriptPair) -> bool {
    pair.raw_hypothesis_chars as i64 - pair.raw_reference_chars as i64 > MAX_EXTRA_HYPOTHESIS_CHARS
}
