//! End-to-end run on the synthetic corpus with simulated recognizers and
//! speaker embeddings.

use std::path::Path;

use log::info;

use super::config::{Domain, ExperimentConfig};
use super::eval::{eval_asv_files, eval_wer_files, wer_csv_path, CellLabel, UNMASKED};
use super::grid::{original_reference_path, reference_path, run_mask_grid, GridOutcome, ReferenceLine};
use super::io::{read_jsonl, write_jsonl};
use super::kde::write_kde_reports;
use super::report::{asv_cell_dir, report_eer, report_wer, EerReport, GridSpec, WerReport};
use super::synth::{synth_corpus, SimulatedEmbedder, SynthOptions, SIMULATED_ASR};
use crate::error::Result;
use crate::metrics::DEFAULT_GRID_SIZE;
use crate::trials::TrialMode;

#[derive(Debug, Clone)]
pub struct DemoSummary {
    pub grid: GridOutcome,
    pub wer: WerReport,
    pub eer: EerReport,
}

/// Writes the synthetic corpus to `out/corpus` and the full experiment to
/// `out/run`. Every output is a function of `seed` alone.
pub fn run_demo(out: &Path, seed: u64) -> Result<DemoSummary> {
    let corpus = synth_corpus(&out.join("corpus"), &SynthOptions { seed, ..Default::default() })?;
    let run = out.join("run");
    let cfg = corpus.config(&run, seed);
    run_experiment(&cfg)
}

/// Masks, simulates the external stages, scores and reports for `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<DemoSummary> {
    let run = &cfg.output_dir;
    let outcome = run_mask_grid(cfg)?;
    info!("masked {} cells", outcome.manifests.len());
    let grid = GridSpec::from_config(cfg);

    // cells: unmasked per domain, then every configured mask
    let mut cells: Vec<(Domain, String, String)> = Vec::new();
    for &d in &grid.domains {
        for (t, p) in grid.columns() {
            cells.push((d, t, p));
        }
    }

    let wer_dir = run.join("results").join("wer");
    for asr in &SIMULATED_ASR {
        for (d, t, p) in &cells {
            let refs_path =
                if t == UNMASKED { original_reference_path(run) } else { reference_path(run, *d, t.parse()?, p.parse()?) };
            let refs: Vec<ReferenceLine> = read_jsonl(&refs_path)?;
            let hyps = asr.transcribe(&refs, d.as_str(), t, p, cfg.seed);
            let hyp_path = run.join("asr").join(asr.name).join(d.as_str()).join(format!("{t}_{p}.jsonl"));
            write_jsonl(&hyp_path, &hyps)?;
            let label = CellLabel::new(asr.name, d.as_str(), t, p);
            eval_wer_files(&refs_path, &hyp_path, &label, &wer_csv_path(&wer_dir, &label))?;
        }
    }

    let speakers: std::collections::BTreeMap<&str, &str> =
        outcome.stats.iter().map(|s| (s.utterance_id.as_str(), s.speaker_id.as_str())).collect();
    let ids: Vec<(String, String)> =
        outcome.eligible.iter().map(|u| (u.clone(), speakers[u.as_str()].to_string())).collect();
    let embedder = SimulatedEmbedder { seed: cfg.seed };
    let emb_dir = run.join("embeddings");
    let enroll_path = emb_dir.join("enroll.jsonl");
    write_jsonl(&enroll_path, &embedder.enroll(&ids))?;
    let asv_dir = run.join("results").join("asv");
    for (d, t, p) in &cells {
        let test: Vec<_> = ids.iter().map(|(u, s)| embedder.embed(u, s, d.as_str(), t, p)).collect();
        let rel = asv_cell_dir(Path::new(""), *d, (t, p));
        let test_path = emb_dir.join(&rel).with_extension("jsonl");
        write_jsonl(&test_path, &test)?;
        eval_asv_files(&enroll_path, &test_path, TrialMode::Ordered, &asv_dir.join(&rel))?;
    }

    let reports = run.join("reports");
    let wer = report_wer(&wer_dir, &grid)?;
    wer.write(&reports)?;
    let eer = report_eer(&asv_dir, &grid)?;
    eer.write(&reports)?;
    let rows: Vec<_> = super::io::files_with_extension(&wer_dir, "csv")?
        .iter()
        .map(|p| super::eval::read_wer_rows(p))
        .collect::<Result<Vec<_>>>()?
        .concat();
    write_kde_reports(&rows, &grid, None, DEFAULT_GRID_SIZE, &reports)?;
    Ok(DemoSummary { grid: outcome, wer, eer })
}
