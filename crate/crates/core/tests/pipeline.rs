mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use common::brute_force_eer;
use wordmask::alignment::Position;
use wordmask::masker::{MaskManifest, MaskType};
use wordmask::pipeline::eval::{WerRow, UNMASKED};
use wordmask::pipeline::io::{files_with_extension, write_csv};
use wordmask::pipeline::report::{asv_cell_dir, report_eer, report_wer, GridSpec};
use wordmask::pipeline::synth::{synth_corpus, SynthOptions};
use wordmask::pipeline::{run_demo, run_mask_grid, Domain};
use wordmask::trials::{label_str, ScoredTrial};
use wordmask::Error;

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn two_utterance_corpus(dir: &Path) -> wordmask::pipeline::synth::SynthCorpus {
    let opts = SynthOptions { utterances_per_speaker: vec![1, 1], include_ineligible: false, ..Default::default() };
    synth_corpus(dir, &opts).unwrap()
}

#[test]
fn wave_grid_counts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = two_utterance_corpus(&dir.path().join("corpus"));
    let mut cfg = corpus.config(dir.path().join("out"), 1);
    cfg.domains = vec![Domain::Wave];
    let outcome = run_mask_grid(&cfg).unwrap();
    assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
    assert_eq!(outcome.manifests.len(), 18);
    assert_eq!(files_with_extension(&cfg.output_dir.join("masked"), "wav").unwrap().len(), 18);
    assert_eq!(files_with_extension(&cfg.output_dir.join("manifests"), "json").unwrap().len(), 18);
}

#[test]
fn manifest_spans_match_the_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = two_utterance_corpus(&dir.path().join("corpus"));
    let cfg = corpus.config(dir.path().join("out"), 3);
    let outcome = run_mask_grid(&cfg).unwrap();
    assert_eq!(outcome.manifests.len(), 36);
    for u in &corpus.utterances {
        let words: Vec<_> = u.words.iter().filter(|w| w.label != "SIL").collect();
        let k = words.len();
        for (pos, idx) in [("start", 0), ("middle", (k - 1) / 2), ("end", k - 1)] {
            let expect_s = (words[idx].start_s, words[idx].end_s);
            for m in outcome.manifests.iter().filter(|m| m.utterance_id == u.utterance_id && m.position == pos) {
                assert_eq!(m.word_indices, idx..idx + 1);
                assert!((m.span_s.0 - expect_s.0).abs() < 1e-9 && (m.span_s.1 - expect_s.1).abs() < 1e-9);
                match m.domain.as_str() {
                    "wave" => {
                        let sr = m.sample_rate_hz.unwrap() as f64;
                        let (a, b) = m.span_samples.unwrap();
                        assert_eq!(a, (expect_s.0 * sr).round() as usize);
                        assert_eq!(b, (expect_s.1 * sr).round() as usize);
                    }
                    _ => {
                        assert_eq!(m.span_codes.0, (expect_s.0 * 250.0).round() as usize);
                        assert_eq!(m.span_codes.1, (expect_s.1 * 250.0).round() as usize);
                    }
                }
                if m.mask_type == MaskType::Delete {
                    assert_eq!(m.output_length, m.input_length - (m.span_codes.1 - m.span_codes.0).max(
                        m.span_samples.map_or(0, |(a, b)| b - a)));
                }
            }
        }
        // the masked-reference file drops exactly the target word
        let refs = std::fs::read_to_string(cfg.output_dir.join("references/wave/delete/start.jsonl")).unwrap();
        let line = refs.lines().find(|l| l.contains(&u.utterance_id)).unwrap();
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let expect: Vec<&str> = words[1..].iter().map(|w| w.label.as_str()).collect();
        assert_eq!(v["text"], expect.join(" "));
    }
    let m: MaskManifest = serde_json::from_slice(
        &std::fs::read(cfg.output_dir.join("manifests/codes/reverse/end").join(format!("{}.json", corpus.utterances[0].utterance_id)))
            .unwrap(),
    )
    .unwrap();
    assert_eq!(m.mask_type, MaskType::Reverse);
}

#[test]
fn grid_is_deterministic_given_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = two_utterance_corpus(&dir.path().join("corpus"));
    let a = corpus.config(dir.path().join("a"), 9);
    let b = corpus.config(dir.path().join("b"), 9);
    run_mask_grid(&a).unwrap();
    run_mask_grid(&b).unwrap();
    assert_eq!(tree(&a.output_dir), tree(&b.output_dir));
}

#[test]
fn per_utterance_failures_are_recorded_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = two_utterance_corpus(&dir.path().join("corpus"));
    let victim = &corpus.utterances[1].utterance_id;
    std::fs::write(corpus.textgrid_dir.join(format!("{victim}.TextGrid")), "not a textgrid").unwrap();
    let cfg = corpus.config(dir.path().join("out"), 0);
    let outcome = run_mask_grid(&cfg).unwrap();
    assert_eq!(outcome.manifests.len(), 18);
    assert!(outcome.failures.iter().any(|f| &f.utterance_id == victim));
    let csv = std::fs::read_to_string(cfg.output_dir.join("reports/failures.csv")).unwrap();
    assert!(csv.contains(victim.as_str()));

    let first = &corpus.utterances[0].utterance_id;
    std::fs::write(corpus.textgrid_dir.join(format!("{first}.TextGrid")), "garbage").unwrap();
    assert!(matches!(run_mask_grid(&cfg), Err(Error::Selection(_))));
}

#[test]
fn invalid_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = two_utterance_corpus(&dir.path().join("corpus"));
    let mut cfg = corpus.config(dir.path().join("out"), 0);
    cfg.audio_dir = Some(dir.path().join("missing"));
    assert!(matches!(run_mask_grid(&cfg), Err(Error::Config(_))));
    cfg.audio_dir = Some(corpus.audio_dir.clone());
    cfg.positions.clear();
    assert!(matches!(run_mask_grid(&cfg), Err(Error::Config(_))));
}

fn wer_row(utt: &str, domain: &str, t: &str, p: &str, wer: f64, filtered: bool) -> WerRow {
    WerRow {
        utterance_id: utt.into(),
        system: "asr".into(),
        domain: domain.into(),
        mask_type: t.into(),
        position: p.into(),
        n_ref: 10,
        substitutions: (wer * 10.0).round() as usize,
        deletions: 0,
        insertions: 0,
        wer,
        filtered,
        ref_chars: 40,
        hyp_chars: if filtered { 90 } else { 40 },
    }
}

#[test]
fn wer_report_reproduces_a_hand_built_table() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec { domains: vec![Domain::Wave], types: vec![MaskType::Noise, MaskType::Delete], positions: vec![Position::Start, Position::End] };
    let rows = vec![
        wer_row("u1", "wave", UNMASKED, UNMASKED, 0.10, false),
        wer_row("u2", "wave", UNMASKED, UNMASKED, 0.30, false),
        wer_row("u1", "wave", "noise", "start", 0.20, false),
        wer_row("u2", "wave", "noise", "start", 0.40, false),
        wer_row("u1", "wave", "noise", "end", 0.50, false),
        wer_row("u2", "wave", "noise", "end", 3.00, true),
        wer_row("u1", "wave", "delete", "start", 4.00, true),
    ];
    write_csv(&dir.path().join("asr/wave/part.csv"), &rows).unwrap();
    let r = report_wer(dir.path(), &grid).unwrap();
    // noise pooled: (0.2 + 0.4 + 0.5) / 3; delete: everything filtered
    let expected = "\
| ASR system | Original / Original Speech | Original / Noise | Original / Deletion |
| --- | --- | --- | --- |
| asr | 20.00 | 36.67 | n/a (1 excluded) |
";
    assert_eq!(r.markdown(), expected);
    let end = r.table.cell("asr", "wave", "noise", "end").unwrap();
    assert_eq!((end.value_pct, end.n, end.n_excluded), (Some(50.0), 1, 1));
    let missing = r.table.cell("asr", "wave", "delete", "end").unwrap();
    assert_eq!((missing.value_pct, missing.n, missing.n_excluded), (None, 0, 0));
    r.table.check_complete(&grid).unwrap();
    assert_eq!(r.table.cells.iter().filter(|c| c.position != "all").count(), 5);
}

fn write_scores(root: &Path, domain: Domain, col: (&str, &str), scores: &[(f64, bool)]) {
    let rows: Vec<ScoredTrial<f64>> = scores
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| ScoredTrial { enroll_id: format!("e{i}"), test_id: format!("t{i}"), label: label_str(t).into(), score: s })
        .collect();
    write_csv(&asv_cell_dir(root, domain, col).join("scores.csv"), &rows).unwrap();
}

fn each_cell(grid: &GridSpec, mut f: impl FnMut(Domain, &str, &str, usize)) {
    let mut i = 0;
    for &d in &grid.domains {
        for (t, p) in grid.columns() {
            f(d, &t, &p, i);
            i += 1;
        }
    }
}

#[test]
fn eer_report_fixtures() {
    let grid = GridSpec::full();
    let sep: Vec<(f64, bool)> = (0..20).map(|i| (i as f64, i >= 10)).collect();
    let same: Vec<(f64, bool)> = (0..20).flat_map(|i| [(i as f64, true), (i as f64, false)]).collect();

    for (fixture, expect) in [(&sep, 0.0), (&same, 50.0)] {
        let dir = tempfile::tempdir().unwrap();
        each_cell(&grid, |d, t, p, _| write_scores(dir.path(), d, (t, p), fixture));
        let r = report_eer(dir.path(), &grid).unwrap();
        assert_eq!(r.table.cells.len(), 20);
        assert!(r.table.cells.iter().all(|c| c.value_pct == Some(expect)));
        r.table.check_complete(&grid).unwrap();
        let md = r.markdown();
        assert!(md.starts_with("| Condition | None | Start Noise | Start Deletion | Start Reversal | Middle Noise"));
        assert_eq!(md.lines().count(), 4);
    }

    let dir = tempfile::tempdir().unwrap();
    let mut expected = Vec::new();
    each_cell(&grid, |d, t, p, i| {
        let s: Vec<(f64, bool)> = (0..40).map(|k| ((((k * 7 + i * 13) % 17) as f64) * 0.1 + if k % 3 == 0 { 0.4 } else { 0.0 }, k % 3 == 0)).collect();
        expected.push(100.0 * brute_force_eer(&s));
        write_scores(dir.path(), d, (t, p), &s);
    });
    // one single-class cell
    write_scores(dir.path(), Domain::Codes, ("reverse", "end"), &[(0.1, true), (0.2, true)]);
    let r = report_eer(dir.path(), &grid).unwrap();
    for (c, e) in r.table.cells.iter().zip(&expected) {
        if (c.domain.as_str(), c.mask_type.as_str(), c.position.as_str()) == ("codes", "reverse", "end") {
            assert!(c.value_pct.is_none() && c.error.is_some());
        } else {
            assert!((c.value_pct.unwrap() - e).abs() < 1e-9);
        }
    }
}

#[test]
fn demo_is_fast_complete_and_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    let a = run_demo(&dir.path().join("a"), 7).unwrap();
    assert!(t0.elapsed().as_secs() < 60);
    run_demo(&dir.path().join("b"), 7).unwrap();
    assert_eq!(tree(&dir.path().join("a")), tree(&dir.path().join("b")));

    assert_eq!(a.grid.eligible.len(), 27);
    assert!(a.grid.stats.len() == 28 && a.grid.failures.is_empty());
    assert_eq!(a.grid.manifests.len(), 27 * 18);
    let reports = dir.path().join("a/run/reports");
    for f in ["wer_table.md", "eer_table.md", "kde_wave.svg", "kde_codes.svg", "wer_ttests.csv"] {
        assert!(reports.join(f).exists(), "{f}");
    }
    a.wer.table.check_complete(&GridSpec::full()).unwrap();
    a.eer.table.check_complete(&GridSpec::full()).unwrap();
}
