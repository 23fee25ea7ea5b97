//! Loading a corpus laid out as `{textgrid_dir}/{id}.TextGrid`,
//! `{audio_dir}/{id}.wav`, `{codes_dir}/{id}.json`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::io::{file_stem, files_with_extension, read_file, read_jsonl};
use crate::alignment::{parse_textgrid, speaker_from_utterance_id, AlignedUtterance, ParseOptions};
use crate::error::Result;
use crate::masker::CodeSequence;

/// One line of the transcripts file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub utterance_id: String,
    pub text: String,
}

/// A per-utterance problem that was recorded and skipped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Failure {
    pub utterance_id: String,
    pub stage: String,
    pub message: String,
}

impl Failure {
    pub fn new(utterance_id: &str, stage: &str, message: impl ToString) -> Self {
        Self { utterance_id: utterance_id.to_string(), stage: stage.to_string(), message: message.to_string() }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub alignment: AlignedUtterance,
    /// One token per non-silence word.
    pub transcript: Vec<String>,
    pub audio_path: Option<PathBuf>,
    pub codes: Option<CodeSequence>,
}

impl CorpusEntry {
    pub fn utterance_id(&self) -> &str {
        &self.alignment.utterance_id
    }
}

/// Loads every utterance that has a TextGrid, sorted by id.
pub fn load_corpus(cfg: &ExperimentConfig) -> Result<(Vec<CorpusEntry>, Vec<Failure>)> {
    let opts = ParseOptions { sil_token: cfg.sil_token.clone(), ..Default::default() };
    let transcripts: BTreeMap<String, String> = match &cfg.transcripts {
        Some(p) => read_jsonl::<TranscriptLine>(p)?.into_iter().map(|t| (t.utterance_id, t.text)).collect(),
        None => BTreeMap::new(),
    };
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for path in files_with_extension(&cfg.textgrid_dir, "TextGrid")? {
        let id = file_stem(&path);
        match load_entry(cfg, &opts, &transcripts, &id, &path) {
            Ok(e) => entries.push(e),
            Err(e) => failures.push(Failure::new(&id, "load", e)),
        }
    }
    Ok((entries, failures))
}

fn load_entry(
    cfg: &ExperimentConfig,
    opts: &ParseOptions,
    transcripts: &BTreeMap<String, String>,
    id: &str,
    path: &std::path::Path,
) -> Result<CorpusEntry> {
    let mut alignment = parse_textgrid(&read_file(path)?, opts)?;
    alignment.utterance_id = id.to_string();
    alignment.speaker_id = speaker_from_utterance_id(id).to_string();

    let transcript = match transcripts.get(id) {
        Some(text) => {
            let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
            let k = alignment.non_sil_count();
            if tokens.len() != k {
                return Err(crate::error::Error::Contract(format!(
                    "transcript has {} tokens but the alignment has {k} words",
                    tokens.len()
                )));
            }
            tokens
        }
        None => alignment.transcript_tokens(),
    };
    let audio_path = match &cfg.audio_dir {
        Some(dir) => {
            let p = dir.join(format!("{id}.wav"));
            if !p.exists() {
                return Err(crate::error::Error::Contract(format!("missing audio {}", p.display())));
            }
            Some(p)
        }
        None => None,
    };
    let codes = match &cfg.codes_dir {
        Some(dir) => Some(CodeSequence::from_json(&read_file(&dir.join(format!("{id}.json")))?)?),
        None => None,
    };
    Ok(CorpusEntry { alignment, transcript, audio_path, codes })
}
