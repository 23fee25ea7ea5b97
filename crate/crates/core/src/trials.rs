//! Speaker-verification trials: enumeration, cosine scoring and EER.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding<T> {
    pub utterance_id: String,
    pub speaker_id: String,
    pub vector: Vec<T>,
}

impl<T: Real> Embedding<T> {
    pub fn validate(&self) -> Result<()> {
        if self.vector.is_empty() {
            return Err(contract(format!("embedding {} is empty", self.utterance_id)));
        }
        if self.vector.iter().any(|v| !v.is_finite()) {
            return Err(contract(format!("embedding {} has non-finite entries", self.utterance_id)));
        }
        if norm(&self.vector) == T::zero() {
            return Err(contract(format!("embedding {} has zero norm", self.utterance_id)));
        }
        Ok(())
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Trial {
    pub enroll_id: String,
    pub test_id: String,
    pub is_target: bool,
}

/// Whether a pair of utterances is compared once or in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialMode {
    /// Each unordered pair once, enrolled under the smaller id: n(n−1)/2 trials.
    #[default]
    Unordered,
    /// Every (enroll, test) pair with enroll ≠ test: n(n−1) trials. Natural
    /// when enrollment and test come from different sets.
    Ordered,
}

/// Enumerates trials from `(utterance_id, speaker_id)` pairs, sorted by
/// `(enroll_id, test_id)`.
pub fn enumerate_trials_by_id<'a, I>(items: I, mode: TrialMode) -> Result<Vec<Trial>>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut speakers: BTreeMap<&str, &str> = BTreeMap::new();
    for (utt, spk) in items {
        if speakers.insert(utt, spk).is_some() {
            return Err(contract(format!("duplicate utterance id {utt:?}")));
        }
    }
    if speakers.len() < 2 {
        return Err(contract("trial enumeration needs at least two utterances"));
    }
    let ids: Vec<(&str, &str)> = speakers.into_iter().collect();
    let mut trials = Vec::new();
    for (i, &(a, sa)) in ids.iter().enumerate() {
        for (j, &(b, sb)) in ids.iter().enumerate() {
            let keep = match mode {
                TrialMode::Unordered => i < j,
                TrialMode::Ordered => i != j,
            };
            if keep {
                trials.push(Trial { enroll_id: a.to_string(), test_id: b.to_string(), is_target: sa == sb });
            }
        }
    }
    Ok(trials)
}

/// All unordered pairs of `embeddings`, each emitted once with the
/// lexicographically smaller id as enrollment.
pub fn enumerate_trials<T>(embeddings: &[Embedding<T>]) -> Result<Vec<Trial>> {
    enumerate_trials_by_id(
        embeddings.iter().map(|e| (e.utterance_id.as_str(), e.speaker_id.as_str())),
        TrialMode::Unordered,
    )
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine_score<T: Real>(a: &Embedding<T>, b: &Embedding<T>) -> Result<T> {
    cosine(&a.vector, &b.vector)
}

pub fn cosine<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(contract(format!("embedding dimensions differ ({} vs {})", a.len(), b.len())));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == T::zero() || nb == T::zero() {
        return Err(contract("cosine similarity of a zero-norm vector"));
    }
    let dot: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    Ok((dot / (na * nb)).max(-T::one()).min(T::one()))
}

/// A scored trial, as written to the scores CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrial<T> {
    pub enroll_id: String,
    pub test_id: String,
    /// `target` or `nontarget`.
    pub label: String,
    pub score: T,
}

impl<T> ScoredTrial<T> {
    pub fn is_target(&self) -> bool {
        self.label == "target"
    }
}

pub fn label_str(is_target: bool) -> &'static str {
    if is_target {
        "target"
    } else {
        "nontarget"
    }
}

/// Scores each trial with enrollment embeddings from `enroll` and test
/// embeddings from `test` (which may be the same set).
pub fn score_trials<T: Real>(
    trials: &[Trial],
    enroll: &[Embedding<T>],
    test: &[Embedding<T>],
) -> Result<Vec<ScoredTrial<T>>> {
    let index = |set: &[Embedding<T>]| -> Result<BTreeMap<String, usize>> {
        let dim = set.first().map_or(0, |e| e.vector.len());
        let mut m = BTreeMap::new();
        for (i, e) in set.iter().enumerate() {
            e.validate()?;
            if e.vector.len() != dim {
                return Err(contract(format!("embedding {} has dimension {}, expected {dim}", e.utterance_id, e.vector.len())));
            }
            m.insert(e.utterance_id.clone(), i);
        }
        Ok(m)
    };
    let ei = index(enroll)?;
    let ti = index(test)?;
    trials
        .iter()
        .map(|t| {
            let e = ei.get(&t.enroll_id).ok_or_else(|| contract(format!("no enrollment embedding for {}", t.enroll_id)))?;
            let s = ti.get(&t.test_id).ok_or_else(|| contract(format!("no test embedding for {}", t.test_id)))?;
            Ok(ScoredTrial {
                enroll_id: t.enroll_id.clone(),
                test_id: t.test_id.clone(),
                label: label_str(t.is_target).to_string(),
                score: cosine_score(&enroll[*e], &test[*s])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerResult<T> {
    pub eer: T,
    /// Score threshold at the FAR/FRR crossing.
    pub threshold: T,
}

/// Equal error rate from `(score, is_target)` pairs.
///
/// Thresholds are swept over the lowest score, the midpoints between
/// consecutive distinct scores, and a point above the highest score.
/// FRR(t) is the fraction of targets scoring below t and FAR(t) the
/// fraction of non-targets scoring at or above t. The EER is the linear
/// interpolation of the FAR/FRR crossing between the two bracketing
/// thresholds.
pub fn eer<T: Real>(scores: &[(T, bool)]) -> Result<EerResult<T>> {
    if scores.iter().any(|(s, _)| !s.is_finite()) {
        return Err(contract("scores must be finite"));
    }
    let n_tgt = scores.iter().filter(|(_, t)| *t).count();
    let n_non = scores.len() - n_tgt;
    if n_tgt == 0 || n_non == 0 {
        return Err(contract(format!("EER needs both classes ({n_tgt} target, {n_non} non-target scores)")));
    }
    let mut sorted: Vec<(T, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));

    let tgt_total = T::of_usize(n_tgt);
    let non_total = T::of_usize(n_non);
    // state at the lowest threshold: nothing rejected
    let mut tgt_below = 0usize;
    let mut non_below = 0usize;
    let rates = |tb: usize, nb: usize| (T::of_usize(tb) / tgt_total, T::of_usize(n_non - nb) / non_total);
    let (mut prev_frr, mut prev_far) = rates(0, 0);
    let mut prev_thr = sorted[0].0;

    let mut i = 0;
    while i < sorted.len() {
        let value = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == value {
            if sorted[i].1 {
                tgt_below += 1;
            } else {
                non_below += 1;
            }
            i += 1;
        }
        let thr = match sorted.get(i) {
            Some(next) => (value + next.0) * T::of(0.5),
            None => value + (value.abs().max(T::one())),
        };
        let (frr, far) = rates(tgt_below, non_below);
        if frr >= far {
            let d_prev = prev_far - prev_frr;
            let d_here = far - frr;
            let alpha = if d_prev - d_here > T::zero() { d_prev / (d_prev - d_here) } else { T::one() };
            let eer = prev_frr + alpha * (frr - prev_frr);
            let threshold = prev_thr + alpha * (thr - prev_thr);
            return Ok(EerResult { eer, threshold });
        }
        prev_frr = frr;
        prev_far = far;
        prev_thr = thr;
    }
    unreachable!("FRR reaches 1 and FAR reaches 0 at the top threshold")
}

/// Counts of target and non-target trials.
pub fn trial_counts(trials: &[Trial]) -> (usize, usize) {
    let t = trials.iter().filter(|t| t.is_target).count();
    (t, trials.len() - t)
}
