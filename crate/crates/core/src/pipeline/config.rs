//! Experiment configuration: a flat TOML key/value file plus overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alignment::{Position, DEFAULT_SIL_TOKEN};
use crate::error::{Error, Result};
use crate::masker::{MaskType, DEFAULT_CODE_RATE_HZ};
use crate::selection::{Criteria, DurationBasis, RateAggregation};

/// Masking substrate: natural waveform or VQ code sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Wave,
    Codes,
}

impl Domain {
    pub const ALL: [Domain; 2] = [Domain::Wave, Domain::Codes];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Wave => "wave",
            Domain::Codes => "codes",
        }
    }

    /// Row label used in the report tables.
    pub fn condition(self) -> &'static str {
        match self {
            Domain::Wave => "Original",
            Domain::Codes => "VQ-VAE",
        }
    }

    pub fn artifact_extension(self) -> &'static str {
        match self {
            Domain::Wave => "wav",
            Domain::Codes => "json",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wave" | "waveform" | "original" => Ok(Domain::Wave),
            "codes" | "code" | "vq" | "vq-vae" => Ok(Domain::Codes),
            other => Err(Error::Config(format!("unknown domain {other:?}"))),
        }
    }
}

fn default_types() -> Vec<MaskType> {
    MaskType::ALL.to_vec()
}
fn default_positions() -> Vec<Position> {
    Position::ALL.to_vec()
}
fn default_domains() -> Vec<Domain> {
    Domain::ALL.to_vec()
}
fn default_n_words() -> usize {
    1
}
fn default_code_rate() -> f64 {
    DEFAULT_CODE_RATE_HZ
}
fn default_sil() -> String {
    DEFAULT_SIL_TOKEN.to_string()
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}
fn default_masker_duration() -> f64 {
    10.0
}
fn default_max_rate() -> f64 {
    5.0
}
fn default_min_codes() -> usize {
    300
}
fn default_min_words() -> usize {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub textgrid_dir: PathBuf,
    #[serde(default)]
    pub audio_dir: Option<PathBuf>,
    #[serde(default)]
    pub codes_dir: Option<PathBuf>,
    /// JSONL of `{ "utterance_id", "text" }`; alignment labels are used when absent.
    #[serde(default)]
    pub transcripts: Option<PathBuf>,
    /// Noise-only code sequence for code-domain noise masks.
    #[serde(default)]
    pub noise_codes: Option<PathBuf>,
    #[serde(default)]
    pub masker_file: Option<PathBuf>,
    #[serde(default)]
    pub masker_seed: Option<u64>,
    #[serde(default = "default_masker_duration")]
    pub masker_duration_s: f64,
    #[serde(default = "default_true")]
    pub level_match: bool,
    /// Start noise segments at a seed-derived offset instead of 0.
    #[serde(default)]
    pub random_offset: bool,

    #[serde(default = "default_types")]
    pub types: Vec<MaskType>,
    #[serde(default = "default_positions")]
    pub positions: Vec<Position>,
    #[serde(default = "default_domains")]
    pub domains: Vec<Domain>,
    #[serde(default = "default_n_words")]
    pub n_words: usize,

    #[serde(default = "default_code_rate")]
    pub code_rate_hz: f64,
    #[serde(default = "default_sil")]
    pub sil_token: String,

    #[serde(default = "default_true")]
    pub apply_selection: bool,
    #[serde(default = "default_max_rate")]
    pub max_rate_wps: f64,
    #[serde(default = "default_min_codes")]
    pub min_codes: usize,
    #[serde(default = "default_min_words")]
    pub min_words: usize,
    #[serde(default)]
    pub per_speaker_rate: bool,
    #[serde(default)]
    pub duration_basis: DurationBasis,

    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    /// Minimal config with every optional field at its default.
    pub fn new(textgrid_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            textgrid_dir: textgrid_dir.into(),
            audio_dir: None,
            codes_dir: None,
            transcripts: None,
            noise_codes: None,
            masker_file: None,
            masker_seed: None,
            masker_duration_s: default_masker_duration(),
            level_match: true,
            random_offset: false,
            types: default_types(),
            positions: default_positions(),
            domains: default_domains(),
            n_words: 1,
            code_rate_hz: DEFAULT_CODE_RATE_HZ,
            sil_token: default_sil(),
            apply_selection: true,
            max_rate_wps: default_max_rate(),
            min_codes: default_min_codes(),
            min_words: default_min_words(),
            per_speaker_rate: false,
            duration_basis: DurationBasis::Total,
            output_dir: output_dir.into(),
            seed: 0,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.textgrid_dir);
        fix(&mut self.output_dir);
        for p in [
            &mut self.audio_dir,
            &mut self.codes_dir,
            &mut self.transcripts,
            &mut self.noise_codes,
            &mut self.masker_file,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn criteria(&self) -> Criteria {
        Criteria {
            max_rate_wps: self.max_rate_wps,
            min_codes: self.min_codes,
            min_words: self.min_words,
            aggregation: if self.per_speaker_rate { RateAggregation::PerSpeaker } else { RateAggregation::PerUtterance },
        }
    }

    /// Checks that the grid is non-empty and every referenced path exists.
    pub fn validate(&self) -> Result<()> {
        if self.types.is_empty() || self.positions.is_empty() || self.domains.is_empty() {
            return Err(Error::Config("mask grid is empty".into()));
        }
        if self.n_words == 0 {
            return Err(Error::Config("n_words must be at least 1".into()));
        }
        if self.code_rate_hz.is_nan() || self.code_rate_hz <= 0.0 {
            return Err(Error::Config("code_rate_hz must be positive".into()));
        }
        if self.masker_duration_s.is_nan() || self.masker_duration_s <= 0.0 {
            return Err(Error::Config("masker_duration_s must be positive".into()));
        }
        let must_exist = |p: &Path, what: &str| -> Result<()> {
            if p.exists() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} {} does not exist", p.display())))
            }
        };
        must_exist(&self.textgrid_dir, "textgrid_dir")?;
        let wave = self.domains.contains(&Domain::Wave);
        let codes = self.domains.contains(&Domain::Codes);
        match (&self.audio_dir, wave) {
            (Some(p), _) => must_exist(p, "audio_dir")?,
            (None, true) => return Err(Error::Config("the wave domain needs audio_dir".into())),
            _ => {}
        }
        match (&self.codes_dir, codes) {
            (Some(p), _) => must_exist(p, "codes_dir")?,
            (None, true) => return Err(Error::Config("the codes domain needs codes_dir".into())),
            _ => {}
        }
        match (&self.noise_codes, codes && self.types.contains(&MaskType::Noise)) {
            (Some(p), _) => must_exist(p, "noise_codes")?,
            (None, true) => return Err(Error::Config("code-domain noise masks need noise_codes".into())),
            _ => {}
        }
        for (p, what) in [(&self.transcripts, "transcripts"), (&self.masker_file, "masker_file")] {
            if let Some(p) = p {
                must_exist(p, what)?;
            }
        }
        Ok(())
    }
}
