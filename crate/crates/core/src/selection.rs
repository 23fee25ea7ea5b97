//! Per-utterance statistics and the evaluation eligibility filter.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::alignment::AlignedUtterance;
use crate::error::{contract, Result};
use crate::masker::CodeSequence;

/// Which stretch of the recording counts as "duration" for speaking rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DurationBasis {
    /// Full audio length, including leading and trailing silence.
    #[default]
    Total,
    /// First non-silence word start to last non-silence word end.
    Speech,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceStats {
    pub utterance_id: String,
    pub speaker_id: String,
    #[serde(rename = "n_words")]
    pub n_words_nonsil: usize,
    pub duration_s: f64,
    #[serde(rename = "rate_wps")]
    pub speaking_rate_wps: f64,
    pub n_codes: usize,
}

/// Computes word count, duration and speaking rate.
///
/// `n_codes` is the length of `codes` when given; otherwise the number of
/// codes the full audio would occupy at `code_rate_hz`.
pub fn compute_stats(
    utt: &AlignedUtterance,
    codes: Option<&CodeSequence>,
    basis: DurationBasis,
    code_rate_hz: f64,
) -> Result<UtteranceStats> {
    if utt.words.is_empty() {
        return Err(contract(format!("utterance {} has no intervals", utt.utterance_id)));
    }
    let n_words_nonsil = utt.non_sil_count();
    let duration_s = match basis {
        DurationBasis::Total => utt.total_duration_s,
        DurationBasis::Speech => utt.speech_extent_s().map_or(0.0, |(s, e)| e - s),
    };
    let speaking_rate_wps = if n_words_nonsil == 0 {
        0.0
    } else if duration_s > 0.0 {
        n_words_nonsil as f64 / duration_s
    } else {
        return Err(contract(format!("utterance {} has zero duration", utt.utterance_id)));
    };
    let n_codes = match codes {
        Some(c) => c.len(),
        None => (utt.total_duration_s * code_rate_hz).round() as usize,
    };
    Ok(UtteranceStats {
        utterance_id: utt.utterance_id.clone(),
        speaker_id: utt.speaker_id.clone(),
        n_words_nonsil,
        duration_s,
        speaking_rate_wps,
        n_codes,
    })
}

/// How the speaking-rate criterion is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateAggregation {
    #[default]
    PerUtterance,
    /// Compare the speaker's mean per-utterance rate instead.
    PerSpeaker,
}

/// Eligibility thresholds. Defaults: rate < 5.0 wps, codes > 300, words >= 7.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    /// Exclusive upper bound on speaking rate.
    pub max_rate_wps: f64,
    /// Exclusive lower bound on code count.
    pub min_codes: usize,
    /// Inclusive lower bound on non-silence words.
    pub min_words: usize,
    pub aggregation: RateAggregation,
}

impl Default for Criteria {
    fn default() -> Self {
        Self { max_rate_wps: 5.0, min_codes: 300, min_words: 7, aggregation: RateAggregation::PerUtterance }
    }
}

/// Keeps the utterances meeting all three criteria, in input order.
pub fn filter_eligible(stats: &[UtteranceStats], criteria: &Criteria) -> Vec<UtteranceStats> {
    let speaker_rate: BTreeMap<&str, f64> = match criteria.aggregation {
        RateAggregation::PerUtterance => BTreeMap::new(),
        RateAggregation::PerSpeaker => {
            let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
            for s in stats {
                let e = acc.entry(s.speaker_id.as_str()).or_default();
                e.0 += s.speaking_rate_wps;
                e.1 += 1;
            }
            acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
        }
    };
    let mut seen = std::collections::HashSet::new();
    stats
        .iter()
        .filter(|s| {
            let rate = speaker_rate.get(s.speaker_id.as_str()).copied().unwrap_or(s.speaking_rate_wps);
            rate < criteria.max_rate_wps && s.n_codes > criteria.min_codes && s.n_words_nonsil >= criteria.min_words
        })
        .filter(|s| seen.insert(s.utterance_id.clone()))
        .cloned()
        .collect()
}

/// Writes stats as CSV with header `utterance_id,speaker_id,n_words,duration_s,rate_wps,n_codes`.
pub fn write_stats_csv<W: Write>(stats: &[UtteranceStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in stats {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: std::io::Read>(input: R) -> Result<Vec<UtteranceStats>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::WordInterval;
    use proptest::prelude::*;

    fn utt(labels: &[&str], total: f64) -> AlignedUtterance {
        let step = total / labels.len() as f64;
        let words = labels
            .iter()
            .enumerate()
            .map(|(i, l)| WordInterval {
                label: l.to_string(),
                start_s: i as f64 * step,
                end_s: (i + 1) as f64 * step,
                is_sil: *l == "SIL",
            })
            .collect();
        AlignedUtterance::new("p1_001", "p1", words, total).unwrap()
    }

    fn st(rate: f64, codes: usize, words: usize) -> UtteranceStats {
        UtteranceStats {
            utterance_id: format!("u{rate}_{codes}_{words}"),
            speaker_id: "s".into(),
            n_words_nonsil: words,
            duration_s: 1.0,
            speaking_rate_wps: rate,
            n_codes: codes,
        }
    }

    #[test]
    fn seven_words_two_sil() {
        let u = utt(&["SIL", "a", "b", "c", "d", "e", "f", "g", "SIL"], 2.0);
        let s = compute_stats(&u, None, DurationBasis::Total, 250.0).unwrap();
        assert_eq!(s.n_words_nonsil, 7);
        assert_eq!(s.speaking_rate_wps, 3.5);
        assert_eq!(s.n_codes, 500);
        let c = CodeSequence::new(vec![0; 480], 4, 250.0).unwrap();
        assert_eq!(compute_stats(&u, Some(&c), DurationBasis::Total, 250.0).unwrap().n_codes, 480);
    }

    #[test]
    fn speech_basis_excludes_edges() {
        let u = utt(&["SIL", "a", "b", "SIL"], 2.0);
        let s = compute_stats(&u, None, DurationBasis::Speech, 250.0).unwrap();
        assert_eq!(s.duration_s, 1.0);
        assert_eq!(s.speaking_rate_wps, 2.0);
    }

    #[test]
    fn all_silence() {
        let u = utt(&["SIL", "SIL"], 1.0);
        let s = compute_stats(&u, None, DurationBasis::Total, 250.0).unwrap();
        assert_eq!(s.n_words_nonsil, 0);
        assert_eq!(s.speaking_rate_wps, 0.0);
        assert_eq!(compute_stats(&u, None, DurationBasis::Speech, 250.0).unwrap().speaking_rate_wps, 0.0);
    }

    #[test]
    fn boundaries() {
        let c = Criteria::default();
        assert_eq!(filter_eligible(&[st(3.5, 400, 7)], &c).len(), 1);
        assert!(filter_eligible(&[st(5.0, 400, 7)], &c).is_empty());
        assert!(filter_eligible(&[st(3.5, 300, 7)], &c).is_empty());
        assert!(filter_eligible(&[st(3.5, 400, 6)], &c).is_empty());
    }

    #[test]
    fn per_speaker_rate() {
        let mut fast = st(6.0, 400, 7);
        fast.utterance_id = "fast".into();
        let mut slow = st(3.0, 400, 7);
        slow.utterance_id = "slow".into();
        let both = [fast, slow];
        let per_utt = filter_eligible(&both, &Criteria::default());
        assert_eq!(per_utt.len(), 1);
        let c = Criteria { aggregation: RateAggregation::PerSpeaker, ..Default::default() };
        // speaker mean 4.5 < 5: both kept
        assert_eq!(filter_eligible(&both, &c).len(), 2);
    }

    #[test]
    fn duplicates_dropped_order_kept() {
        let a = st(1.0, 400, 8);
        let b = st(2.0, 400, 8);
        let out = filter_eligible(&[b.clone(), a.clone(), b.clone()], &Criteria::default());
        assert_eq!(out, vec![b, a]);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_stats_csv(&[st(3.5, 400, 7)], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("utterance_id,speaker_id,n_words,duration_s,rate_wps,n_codes\n"));
        assert_eq!(read_stats_csv(&buf[..]).unwrap(), vec![st(3.5, 400, 7)]);
    }

    proptest! {
        #[test]
        fn relaxing_never_removes(
            rows in prop::collection::vec((0.5f64..8.0, 100usize..600, 1usize..15), 1..40),
            dr in 0.0f64..2.0, dc in 0usize..100, dw in 0usize..4,
        ) {
            let stats: Vec<_> = rows.iter().enumerate().map(|(i, &(r, c, w))| {
                let mut s = st(r, c, w);
                s.utterance_id = format!("u{i}");
                s
            }).collect();
            let strict = Criteria::default();
            let loose = Criteria {
                max_rate_wps: strict.max_rate_wps + dr,
                min_codes: strict.min_codes.saturating_sub(dc),
                min_words: strict.min_words.saturating_sub(dw),
                ..strict
            };
            let kept = filter_eligible(&stats, &strict);
            let kept_loose = filter_eligible(&stats, &loose);
            for s in &kept {
                prop_assert!(kept_loose.contains(s));
            }
        }
    }
}
