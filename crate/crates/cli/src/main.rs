use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, warn};
use wordmask::alignment::Position;
use wordmask::masker::MaskType;
use wordmask::pipeline::corpus::load_corpus;
use wordmask::pipeline::eval::{eval_asv_files, eval_wer_files, read_wer_rows, CellLabel};
use wordmask::pipeline::grid::{run_mask_grid, select, write_selection};
use wordmask::pipeline::io::files_with_extension;
use wordmask::pipeline::kde::write_kde_reports;
use wordmask::pipeline::report::{report_eer, report_wer, GridSpec};
use wordmask::pipeline::synth::{synth_corpus, SynthOptions};
use wordmask::pipeline::{run_demo, Domain, ExperimentConfig};
use wordmask::trials::TrialMode;
use wordmask::Error;

#[derive(Parser)]
#[command(name = "wordmask", version, about = "Word-level speech content masking and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute selection statistics and the eligible utterance list.
    Select(ConfigArgs),
    /// Run the masking grid.
    Mask(ConfigArgs),
    /// Score recognizer hypotheses for one grid cell.
    EvalWer(EvalWerArgs),
    /// Enumerate, score and evaluate speaker-verification trials.
    EvalAsv(EvalAsvArgs),
    /// Log-domain WER density curves per domain.
    Kde(KdeArgs),
    /// Aggregate WER and/or EER results into tables.
    Report(ReportArgs),
    /// Write the synthetic corpus.
    SynthCorpus(SynthArgs),
    /// Synthetic corpus through every stage with simulated recognizers.
    Demo(DemoArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file; the flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    textgrid_dir: Option<PathBuf>,
    #[arg(long)]
    audio_dir: Option<PathBuf>,
    #[arg(long)]
    codes_dir: Option<PathBuf>,
    #[arg(long)]
    transcripts: Option<PathBuf>,
    #[arg(long)]
    noise_codes: Option<PathBuf>,
    #[arg(long)]
    masker_file: Option<PathBuf>,
    #[arg(long)]
    masker_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "type", value_delimiter = ',')]
    types: Vec<MaskType>,
    #[arg(long = "position", value_delimiter = ',')]
    positions: Vec<Position>,
    #[arg(long = "domain", value_delimiter = ',')]
    domains: Vec<Domain>,
    #[arg(long)]
    n_words: Option<usize>,
    /// Keep every utterance regardless of the selection criteria.
    #[arg(long)]
    no_selection: bool,
}

impl ConfigArgs {
    fn resolve(self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match (&self.config, &self.textgrid_dir) {
            (Some(p), _) => ExperimentConfig::load(p)?,
            (None, Some(tg)) => ExperimentConfig::new(tg, "out"),
            (None, None) => return Err(Error::Config("either --config or --textgrid-dir is required".into())),
        };
        let set = |dst: &mut Option<PathBuf>, v: Option<PathBuf>| {
            if v.is_some() {
                *dst = v;
            }
        };
        if let Some(tg) = self.textgrid_dir {
            cfg.textgrid_dir = tg;
        }
        set(&mut cfg.audio_dir, self.audio_dir);
        set(&mut cfg.codes_dir, self.codes_dir);
        set(&mut cfg.transcripts, self.transcripts);
        set(&mut cfg.noise_codes, self.noise_codes);
        set(&mut cfg.masker_file, self.masker_file);
        if self.masker_seed.is_some() {
            cfg.masker_seed = self.masker_seed;
        }
        if let Some(o) = self.output_dir {
            cfg.output_dir = o;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if !self.types.is_empty() {
            cfg.types = self.types;
        }
        if !self.positions.is_empty() {
            cfg.positions = self.positions;
        }
        if !self.domains.is_empty() {
            cfg.domains = self.domains;
        }
        if let Some(n) = self.n_words {
            cfg.n_words = n;
        }
        if self.no_selection {
            cfg.apply_selection = false;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long = "type", value_delimiter = ',')]
    types: Vec<MaskType>,
    #[arg(long = "position", value_delimiter = ',')]
    positions: Vec<Position>,
    #[arg(long = "domain", value_delimiter = ',')]
    domains: Vec<Domain>,
}

impl GridArgs {
    fn spec(self) -> GridSpec {
        let mut g = GridSpec::full();
        if !self.types.is_empty() {
            g.types = self.types;
        }
        if !self.positions.is_empty() {
            g.positions = self.positions;
        }
        if !self.domains.is_empty() {
            g.domains = self.domains;
        }
        g
    }
}

#[derive(Args)]
struct EvalWerArgs {
    /// JSONL of `{utterance_id, text}` reference transcripts.
    #[arg(long)]
    references: PathBuf,
    /// JSONL of `{utterance_id, text}` recognizer outputs.
    #[arg(long)]
    hypotheses: PathBuf,
    #[arg(long)]
    system: String,
    #[arg(long)]
    domain: Domain,
    /// Mask type, or `none` for unmasked speech.
    #[arg(long = "type", default_value = "none")]
    mask_type: String,
    #[arg(long, default_value = "none")]
    position: String,
    /// Output CSV of per-pair rows.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalAsvArgs {
    /// JSONL of enrollment embeddings `{utterance_id, speaker_id, vector}`.
    #[arg(long)]
    enroll: PathBuf,
    /// JSONL of test embeddings; defaults to the enrollment set.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Ordered)]
    mode: ModeArg,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Ordered,
    Unordered,
}

#[derive(Args)]
struct KdeArgs {
    /// Directory of per-pair WER CSVs (searched recursively).
    #[arg(long)]
    wer_dir: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Restrict to one recognizer.
    #[arg(long)]
    system: Option<String>,
    #[arg(long, default_value_t = wordmask::metrics::DEFAULT_GRID_SIZE)]
    grid_size: usize,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    wer_dir: Option<PathBuf>,
    /// Root of `{domain}/none/scores.csv` and `{domain}/{type}/{position}/scores.csv`.
    #[arg(long)]
    asv_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 9)]
    speakers: usize,
    #[arg(long, default_value_t = 3)]
    per_speaker: usize,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Exit status: 0 clean, 1 partial failure, 2 configuration error.
fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

fn run(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Select(args) => {
            let cfg = args.resolve()?;
            cfg.validate()?;
            let (entries, mut failures) = load_corpus(&cfg)?;
            let (stats, eligible, f) = select(&cfg, &entries);
            failures.extend(f);
            write_selection(&cfg.output_dir.join("reports"), &stats, &eligible)?;
            println!("{} of {} utterances eligible", eligible.len(), stats.len());
            report_failures(&failures);
            Ok(u8::from(!failures.is_empty()))
        }
        Command::Mask(args) => {
            let cfg = args.resolve()?;
            let outcome = run_mask_grid(&cfg)?;
            println!("{} masked outputs for {} utterances", outcome.manifests.len(), outcome.eligible.len());
            report_failures(&outcome.failures);
            Ok(u8::from(!outcome.failures.is_empty()))
        }
        Command::EvalWer(a) => {
            let label = CellLabel::new(&a.system, a.domain.as_str(), &a.mask_type, &a.position);
            let (rows, failures) = eval_wer_files(&a.references, &a.hypotheses, &label, &a.out)?;
            let kept: Vec<f64> = rows.iter().filter(|r| !r.filtered).map(|r| r.wer).collect();
            if kept.is_empty() {
                println!("{} pairs, all excluded", rows.len());
            } else {
                let mean = 100.0 * kept.iter().sum::<f64>() / kept.len() as f64;
                println!("{} pairs, {} excluded, WER {mean:.2}%", rows.len(), rows.len() - kept.len());
            }
            report_failures(&failures);
            Ok(u8::from(!failures.is_empty()))
        }
        Command::EvalAsv(a) => {
            let mode = match a.mode {
                ModeArg::Ordered => TrialMode::Ordered,
                ModeArg::Unordered => TrialMode::Unordered,
            };
            let test = a.test.unwrap_or_else(|| a.enroll.clone());
            let s = eval_asv_files(&a.enroll, &test, mode, &a.out_dir)?;
            println!("{} target, {} non-target trials, EER {:.2}%", s.n_target, s.n_nontarget, 100.0 * s.eer);
            Ok(0)
        }
        Command::Kde(a) => {
            let mut rows = Vec::new();
            for p in files_with_extension(&a.wer_dir, "csv")? {
                rows.extend(read_wer_rows(&p)?);
            }
            let grid = a.grid.spec();
            let out = write_kde_reports(&rows, &grid, a.system.as_deref(), a.grid_size, &a.out_dir)?;
            let mut partial = false;
            for (d, conds) in &out {
                for c in conds {
                    if let Some(e) = &c.error {
                        warn!("{d}/{}: {e}", c.mask_type);
                        partial = true;
                    }
                }
            }
            Ok(u8::from(partial))
        }
        Command::Report(a) => {
            if a.wer_dir.is_none() && a.asv_dir.is_none() {
                return Err(Error::Config("give --wer-dir and/or --asv-dir".into()));
            }
            let grid = a.grid.spec();
            let mut partial = false;
            if let Some(dir) = &a.wer_dir {
                let r = report_wer(dir, &grid)?;
                r.write(&a.out_dir)?;
                print!("{}", r.markdown());
                partial |= r.table.cells.iter().any(|c| c.error.is_some());
            }
            if let Some(dir) = &a.asv_dir {
                let r = report_eer(dir, &grid)?;
                r.write(&a.out_dir)?;
                print!("{}", r.markdown());
                partial |= r.table.cells.iter().any(|c| c.error.is_some());
            }
            Ok(u8::from(partial))
        }
        Command::SynthCorpus(a) => {
            let opts = SynthOptions { utterances_per_speaker: vec![a.per_speaker; a.speakers], seed: a.seed, ..Default::default() };
            let c = synth_corpus(&a.out, &opts)?;
            println!("{} utterances written to {}", c.utterances.len(), a.out.display());
            Ok(0)
        }
        Command::Demo(a) => {
            let s = run_demo(&a.out, a.seed)?;
            print!("{}\n{}", s.wer.markdown(), s.eer.markdown());
            report_failures(&s.grid.failures);
            Ok(u8::from(!s.grid.failures.is_empty()))
        }
    }
}

fn report_failures(failures: &[wordmask::pipeline::corpus::Failure]) {
    for f in failures {
        warn!("{} [{}]: {}", f.utterance_id, f.stage, f.message);
    }
    if !failures.is_empty() {
        eprintln!("{} failures recorded", failures.len());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
