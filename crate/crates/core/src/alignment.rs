//! Forced-alignment word tiers and mask-target resolution.
//!
//! Alignments come from Praat TextGrid files as written by the Montreal
//! Forced Aligner. Only the word tier is read. Silence intervals are kept in
//! the interval list (flagged with `is_sil`) so that timing is preserved, but
//! every word index used for masking refers to the list of non-silence words.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Silence label emitted by the aligner.
pub const DEFAULT_SIL_TOKEN: &str = "SIL";

/// Tolerance used when checking that consecutive intervals do not overlap.
pub const OVERLAP_TOLERANCE_S: f64 = 1e-3;

/// One labelled interval of the word tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordInterval {
    pub label: String,
    #[serde(with = "micros")]
    pub start_s: f64,
    #[serde(with = "micros")]
    pub end_s: f64,
    pub is_sil: bool,
}

impl WordInterval {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// The word tier of a single utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedUtterance {
    pub utterance_id: String,
    pub speaker_id: String,
    #[serde(rename = "intervals")]
    pub words: Vec<WordInterval>,
    #[serde(with = "micros")]
    pub total_duration_s: f64,
}

impl AlignedUtterance {
    /// Builds an utterance and checks ordering, positivity and coverage.
    pub fn new(
        utterance_id: impl Into<String>,
        speaker_id: impl Into<String>,
        words: Vec<WordInterval>,
        total_duration_s: f64,
    ) -> Result<Self> {
        let utt = Self {
            utterance_id: utterance_id.into(),
            speaker_id: speaker_id.into(),
            words,
            total_duration_s,
        };
        utt.validate()?;
        Ok(utt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.words.is_empty() {
            return Err(Error::Structure("word tier has no intervals".into()));
        }
        for (i, w) in self.words.iter().enumerate() {
            if w.label.is_empty() {
                return Err(contract(format!("interval {i} has an empty label")));
            }
            if !(w.start_s >= 0.0 && w.end_s > w.start_s) {
                return Err(contract(format!(
                    "interval {i} ({:?}) has invalid bounds [{}, {}]",
                    w.label, w.start_s, w.end_s
                )));
            }
        }
        for (i, pair) in self.words.windows(2).enumerate() {
            if pair[0].end_s > pair[1].start_s + OVERLAP_TOLERANCE_S {
                return Err(contract(format!(
                    "intervals {i} and {} overlap or are out of order",
                    i + 1
                )));
            }
        }
        let last_end = self.words.last().map_or(0.0, |w| w.end_s);
        if self.total_duration_s + OVERLAP_TOLERANCE_S < last_end {
            return Err(contract(format!(
                "total duration {} is shorter than the last interval end {last_end}",
                self.total_duration_s
            )));
        }
        Ok(())
    }

    /// Non-silence words in temporal order.
    pub fn non_sil_words(&self) -> Vec<&WordInterval> {
        self.words.iter().filter(|w| !w.is_sil).collect()
    }

    pub fn non_sil_count(&self) -> usize {
        self.words.iter().filter(|w| !w.is_sil).count()
    }

    /// Labels of the non-silence words, usable as a fallback transcript.
    pub fn transcript_tokens(&self) -> Vec<String> {
        self.words
            .iter()
            .filter(|w| !w.is_sil)
            .map(|w| w.label.clone())
            .collect()
    }

    /// Time from the first to the last non-silence word; `None` when the
    /// utterance is all silence.
    pub fn speech_extent_s(&self) -> Option<(f64, f64)> {
        let words = self.non_sil_words();
        Some((words.first()?.start_s, words.last()?.end_s))
    }
}

/// Contiguous run of non-silence words chosen for masking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskTarget {
    pub word_indices: Range<usize>,
    #[serde(with = "micros_pair")]
    pub span_s: (f64, f64),
}

impl MaskTarget {
    pub fn len(&self) -> usize {
        self.word_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.word_indices.contains(&index)
    }
}

/// Where in the utterance the mask is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Start,
    Middle,
    End,
}

impl Position {
    pub const ALL: [Position; 3] = [Position::Start, Position::Middle, Position::End];

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Start => "start",
            Position::Middle => "middle",
            Position::End => "end",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "start" => Ok(Position::Start),
            "middle" => Ok(Position::Middle),
            "end" => Ok(Position::End),
            other => Err(Error::Config(format!("unknown mask position {other:?}"))),
        }
    }
}

/// Picks `n_words` consecutive non-silence words at `position`.
///
/// `Middle` centres the run on index `(k - 1) / 2` of the `k` non-silence
/// words, placing the extra word after the centre when `n_words` is even.
pub fn select_target(utt: &AlignedUtterance, position: Position, n_words: usize) -> Result<MaskTarget> {
    if n_words == 0 {
        return Err(Error::Selection("n_words must be at least 1".into()));
    }
    let k = utt.non_sil_count();
    if k < n_words {
        return Err(Error::Selection(format!(
            "utterance {} has {k} non-silence words, {n_words} requested",
            utt.utterance_id
        )));
    }
    let start = match position {
        Position::Start => 0,
        Position::End => k - n_words,
        Position::Middle => {
            let centre = (k - 1) / 2;
            centre.saturating_sub((n_words - 1) / 2).min(k - n_words)
        }
    };
    target_from_indices(utt, start..start + n_words)
}

/// Builds a target from an explicit range of non-silence word indices.
pub fn target_from_indices(utt: &AlignedUtterance, word_indices: Range<usize>) -> Result<MaskTarget> {
    let words = utt.non_sil_words();
    if word_indices.is_empty() || word_indices.end > words.len() {
        return Err(Error::Selection(format!(
            "word range {word_indices:?} invalid for {} non-silence words",
            words.len()
        )));
    }
    let span_s = (
        words[word_indices.start].start_s,
        words[word_indices.end - 1].end_s,
    );
    Ok(MaskTarget { word_indices, span_s })
}

/// Removes the targeted tokens from a transcript whose tokens correspond
/// one-to-one with the non-silence words of the alignment.
pub fn masked_reference<S: AsRef<str>>(transcript: &[S], target: &MaskTarget) -> Result<Vec<String>> {
    if target.is_empty() || target.word_indices.end > transcript.len() {
        return Err(contract(format!(
            "target {:?} out of range for a {}-token transcript",
            target.word_indices,
            transcript.len()
        )));
    }
    Ok(transcript
        .iter()
        .enumerate()
        .filter(|(i, _)| !target.contains(*i))
        .map(|(_, t)| t.as_ref().to_string())
        .collect())
}

/// Options for [`parse_textgrid`].
#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Label treated as silence. Compared case-sensitively.
    pub sil_token: String,
    /// Tier names accepted as the word tier (compared case-insensitively).
    pub word_tier_names: Vec<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            sil_token: DEFAULT_SIL_TOKEN.to_string(),
            word_tier_names: vec!["words".into(), "word".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Str(String),
    Flag(String),
}

#[derive(Debug)]
struct Token {
    value: Value,
    line: usize,
}

/// Splits a TextGrid into its value tokens: numbers, strings and `<flags>`.
///
/// Keys, `=`, `:` and bracketed item indices are dropped, so the long and
/// short text formats reduce to the same token stream.
fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '!' => {
                // comment to end of line
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '"' => {
                let start_line = line;
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            if chars.peek() == Some(&'"') {
                                chars.next();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            s.push(ch);
                        }
                        None => {
                            return Err(Error::Parse {
                                line: start_line,
                                message: "unterminated string".into(),
                            })
                        }
                    }
                }
                tokens.push(Token { value: Value::Str(s), line: start_line });
            }
            '[' => {
                for c in chars.by_ref() {
                    if c == ']' {
                        break;
                    }
                    if c == '\n' {
                        return Err(Error::Parse { line, message: "unclosed '['".into() });
                    }
                }
            }
            '<' => {
                let mut s = String::new();
                chars.next();
                loop {
                    match chars.next() {
                        Some('>') => break,
                        Some('\n') | None => {
                            return Err(Error::Parse { line, message: "unclosed '<' flag".into() })
                        }
                        Some(ch) => s.push(ch),
                    }
                }
                tokens.push(Token { value: Value::Flag(s), line });
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+') {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let n: f64 = s.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid number {s:?}"),
                })?;
                tokens.push(Token { value: Value::Num(n), line });
            }
            c if c.is_alphabetic() || c == '_' => {
                // key name: skip identifier characters
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        chars.next();
                    } else {
                        break;
                    }
                }
            }
            '=' | ':' | '?' | '\u{feff}' => {
                chars.next();
            }
            other => {
                return Err(Error::Parse { line, message: format!("unexpected character {other:?}") });
            }
        }
    }
    Ok(tokens)
}

struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Cursor {
    fn line(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.last_line, |t| t.line)
    }

    fn next(&mut self, what: &str) -> Result<(Value, usize)> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok((t.value.clone(), t.line))
            }
            None => Err(Error::Parse {
                line: self.last_line,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }

    fn num(&mut self, what: &str) -> Result<f64> {
        match self.next(what)? {
            (Value::Num(n), _) => Ok(n),
            (other, line) => Err(Error::Parse { line, message: format!("expected {what}, found {other:?}") }),
        }
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let line = self.line();
        let n = self.num(what)?;
        if n < 0.0 || n.fract() != 0.0 {
            return Err(Error::Parse { line, message: format!("{what} must be a non-negative integer, got {n}") });
        }
        Ok(n as usize)
    }

    fn string(&mut self, what: &str) -> Result<String> {
        match self.next(what)? {
            (Value::Str(s), _) => Ok(s),
            (other, line) => Err(Error::Parse { line, message: format!("expected {what}, found {other:?}") }),
        }
    }
}

/// Parses a Praat TextGrid and returns its word tier.
///
/// Empty interval labels (the aligner's unlabelled gaps) are read as the
/// silence token. The returned utterance has empty ids; callers set them.
pub fn parse_textgrid(bytes: &[u8], opts: &ParseOptions) -> Result<AlignedUtterance> {
    let text = decode_text(bytes)?;
    let tokens = tokenize(&text)?;
    let last_line = tokens.last().map_or(1, |t| t.line);
    let mut cur = Cursor { tokens, pos: 0, last_line };

    let file_type = cur.string("file type")?;
    if file_type != "ooTextFile" {
        return Err(Error::Parse { line: 1, message: format!("not a Praat text file (File type = {file_type:?})") });
    }
    let class = cur.string("object class")?;
    if class != "TextGrid" {
        return Err(Error::Parse { line: 2, message: format!("object class is {class:?}, expected \"TextGrid\"") });
    }
    let _xmin = cur.num("xmin")?;
    let xmax = cur.num("xmax")?;
    let n_tiers = match cur.next("tiers flag")? {
        (Value::Flag(f), _) if f == "exists" => cur.count("tier count")?,
        (Value::Flag(_), _) => 0,
        (other, line) => return Err(Error::Parse { line, message: format!("expected <exists>, found {other:?}") }),
    };

    let mut word_tier = None;
    for _ in 0..n_tiers {
        let tier_line = cur.line();
        let tier_class = cur.string("tier class")?;
        let name = cur.string("tier name")?;
        let _ = cur.num("tier xmin")?;
        let _ = cur.num("tier xmax")?;
        let n = cur.count("interval count")?;
        match tier_class.as_str() {
            "IntervalTier" => {
                let mut intervals = Vec::with_capacity(n);
                for _ in 0..n {
                    let line = cur.line();
                    let start = cur.num("interval xmin")?;
                    let end = cur.num("interval xmax")?;
                    let label = cur.string("interval text")?;
                    intervals.push((start, end, label, line));
                }
                let is_words = opts.word_tier_names.iter().any(|t| t.eq_ignore_ascii_case(&name));
                if is_words && word_tier.is_none() {
                    word_tier = Some(intervals);
                }
            }
            "TextTier" => {
                for _ in 0..n {
                    let _ = cur.num("point time")?;
                    let _ = cur.string("point mark")?;
                }
            }
            other => {
                return Err(Error::Parse { line: tier_line, message: format!("unknown tier class {other:?}") });
            }
        }
    }

    let raw = word_tier.ok_or_else(|| Error::Structure("no word tier found".into()))?;
    if raw.is_empty() {
        return Err(Error::Structure("word tier has no intervals".into()));
    }
    let mut words = Vec::with_capacity(raw.len());
    for (start, end, label, line) in raw {
        if end <= start {
            return Err(Error::Parse { line, message: format!("interval [{start}, {end}] has non-positive length") });
        }
        let label = label.trim();
        let label = if label.is_empty() { opts.sil_token.clone() } else { label.to_string() };
        let is_sil = label == opts.sil_token;
        words.push(WordInterval { label, start_s: start, end_s: end, is_sil });
    }
    words.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    AlignedUtterance::new(String::new(), String::new(), words, xmax)
}

fn decode_text(bytes: &[u8]) -> Result<String> {
    // Praat also writes UTF-16 with a BOM.
    if bytes.len() >= 2 && (bytes[..2] == [0xFF, 0xFE] || bytes[..2] == [0xFE, 0xFF]) {
        let le = bytes[0] == 0xFF;
        let units: Vec<u16> = bytes[2..]
            .chunks_exact(2)
            .map(|c| if le { u16::from_le_bytes([c[0], c[1]]) } else { u16::from_be_bytes([c[0], c[1]]) })
            .collect();
        return String::from_utf16(&units).map_err(|_| Error::Parse { line: 1, message: "invalid UTF-16".into() });
    }
    String::from_utf8(bytes.to_vec()).map_err(|e| {
        let upto = &bytes[..e.utf8_error().valid_up_to()];
        let line = 1 + upto.iter().filter(|&&b| b == b'\n').count();
        Error::Parse { line, message: "invalid UTF-8".into() }
    })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Writes the utterance as a long-format TextGrid with a single `words` tier.
pub fn serialize_textgrid(utt: &AlignedUtterance) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let xmin = 0.0_f64;
    let xmax = utt.total_duration_s;
    let _ = writeln!(out, "File type = \"ooTextFile\"");
    let _ = writeln!(out, "Object class = \"TextGrid\"");
    let _ = writeln!(out);
    let _ = writeln!(out, "xmin = {xmin} ");
    let _ = writeln!(out, "xmax = {xmax} ");
    let _ = writeln!(out, "tiers? <exists> ");
    let _ = writeln!(out, "size = 1 ");
    let _ = writeln!(out, "item []: ");
    let _ = writeln!(out, "    item [1]:");
    let _ = writeln!(out, "        class = \"IntervalTier\" ");
    let _ = writeln!(out, "        name = \"words\" ");
    let _ = writeln!(out, "        xmin = {xmin} ");
    let _ = writeln!(out, "        xmax = {xmax} ");
    let _ = writeln!(out, "        intervals: size = {} ", utt.words.len());
    for (i, w) in utt.words.iter().enumerate() {
        let _ = writeln!(out, "        intervals [{}]:", i + 1);
        let _ = writeln!(out, "            xmin = {} ", w.start_s);
        let _ = writeln!(out, "            xmax = {} ", w.end_s);
        let _ = writeln!(out, "            text = {} ", quote(&w.label));
    }
    out
}

/// VCTK-style speaker id: the part of the utterance id before the first `_`.
pub fn speaker_from_utterance_id(utterance_id: &str) -> &str {
    utterance_id.split('_').next().unwrap_or(utterance_id)
}

fn round_micros(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

mod micros {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::round_micros(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }
}

mod micros_pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (super::round_micros(x.0), super::round_micros(x.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        <(f64, f64)>::deserialize(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tg(intervals: &[(f64, f64, &str)], xmax: f64) -> String {
        let words: Vec<WordInterval> = intervals
            .iter()
            .map(|&(s, e, l)| WordInterval { label: l.into(), start_s: s, end_s: e, is_sil: l == "SIL" })
            .collect();
        serialize_textgrid(&AlignedUtterance { utterance_id: String::new(), speaker_id: String::new(), words, total_duration_s: xmax })
    }

    fn seven_words() -> AlignedUtterance {
        let labels = ["SIL", "please", "call", "stella", "ask", "her", "SIL", "to", "bring", "SIL"];
        let mut t = 0.0;
        let mut words = Vec::new();
        for l in labels {
            let d = if l == "SIL" { 0.2 } else { 0.3 };
            words.push(WordInterval { label: l.into(), start_s: t, end_s: t + d, is_sil: l == "SIL" });
            t += d;
        }
        AlignedUtterance::new("p225_001", "p225", words, t).unwrap()
    }

    #[test]
    fn parses_three_interval_grid() {
        let text = tg(&[(0.0, 0.4, "SIL"), (0.4, 0.9, "please"), (0.9, 1.5, "call")], 1.5);
        let utt = parse_textgrid(text.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(utt.words.len(), 3);
        assert!(utt.words[0].is_sil);
        assert!(!utt.words[1].is_sil);
        assert_eq!(utt.words[2].label, "call");
        assert_eq!(utt.total_duration_s, 1.5);
    }

    #[test]
    fn zero_intervals_is_structural_error() {
        let text = tg(&[], 1.0);
        let err = parse_textgrid(text.as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
    }

    #[test]
    fn missing_word_tier_is_structural_error() {
        let text = tg(&[(0.0, 1.0, "a")], 1.0).replace("\"words\"", "\"phones\"");
        let err = parse_textgrid(text.as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
    }

    #[test]
    fn malformed_number_reports_line() {
        let text = tg(&[(0.0, 0.5, "a"), (0.5, 1.0, "b")], 1.0).replacen("xmax = 1 ", "xmax = 1x2 ", 1);
        match parse_textgrid(text.as_bytes(), &ParseOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let text = tg(&[(0.0, 0.5, "a"), (0.5, 1.0, "b")], 1.0);
        let cut = &text[..text.len() - 30];
        assert!(matches!(parse_textgrid(cut.as_bytes(), &ParseOptions::default()), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_labels_become_silence() {
        let text = tg(&[(0.0, 0.3, "SIL"), (0.3, 0.8, "hi")], 0.8).replace("\"SIL\"", "\"\"");
        let utt = parse_textgrid(text.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(utt.words[0].label, "SIL");
        assert!(utt.words[0].is_sil);
    }

    #[test]
    fn silence_match_is_case_sensitive() {
        let text = tg(&[(0.0, 0.3, "sil"), (0.3, 0.8, "hi")], 0.8);
        let utt = parse_textgrid(text.as_bytes(), &ParseOptions::default()).unwrap();
        assert!(!utt.words[0].is_sil);
        let opts = ParseOptions { sil_token: "sil".into(), ..Default::default() };
        assert!(parse_textgrid(text.as_bytes(), &opts).unwrap().words[0].is_sil);
    }

    #[test]
    fn short_format_and_escaped_quotes() {
        let text = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n1.2\n<exists>\n2\n\
                    \"TextTier\"\n\"events\"\n0\n1.2\n1\n0.5\n\"click\"\n\
                    \"IntervalTier\"\n\"words\"\n0\n1.2\n2\n0\n0.6\n\"say \"\"hi\"\"\"\n0.6\n1.2\n\"SIL\"\n";
        let utt = parse_textgrid(text.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(utt.words[0].label, "say \"hi\"");
        assert!(utt.words[1].is_sil);
    }

    #[test]
    fn fixture_round_trip() {
        let utt = seven_words();
        let text = serialize_textgrid(&utt);
        let back = parse_textgrid(text.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(back.words.len(), utt.words.len());
        for (a, b) in utt.words.iter().zip(&back.words) {
            assert_eq!(a.label, b.label);
            assert!((a.start_s - b.start_s).abs() < 1e-3);
            assert!((a.end_s - b.end_s).abs() < 1e-3);
        }
    }

    #[test]
    fn overlapping_intervals_rejected() {
        let text = tg(&[(0.0, 0.6, "a"), (0.5, 1.0, "b")], 1.0);
        assert!(matches!(parse_textgrid(text.as_bytes(), &ParseOptions::default()), Err(Error::Contract(_))));
    }

    #[test]
    fn select_positions_on_seven_words() {
        let utt = seven_words();
        assert_eq!(utt.non_sil_count(), 7);
        assert_eq!(select_target(&utt, Position::Middle, 1).unwrap().word_indices, 3..4);
        assert_eq!(select_target(&utt, Position::Start, 2).unwrap().word_indices, 0..2);
        assert_eq!(select_target(&utt, Position::End, 1).unwrap().word_indices, 6..7);
        assert_eq!(select_target(&utt, Position::Middle, 3).unwrap().word_indices, 2..5);
        assert_eq!(select_target(&utt, Position::Middle, 7).unwrap().word_indices, 0..7);
    }

    #[test]
    fn span_covers_selected_words_only() {
        let utt = seven_words();
        let t = select_target(&utt, Position::Middle, 1).unwrap();
        let w = utt.non_sil_words()[3];
        assert_eq!(w.label, "ask");
        assert_eq!(t.span_s, (w.start_s, w.end_s));
        // "her" is followed by a silence that must not be swallowed
        let t = target_from_indices(&utt, 4..6).unwrap();
        assert_eq!(t.span_s.0, utt.non_sil_words()[4].start_s);
        assert_eq!(t.span_s.1, utt.non_sil_words()[5].end_s);
    }

    #[test]
    fn too_few_words() {
        let utt = seven_words();
        assert!(matches!(select_target(&utt, Position::Start, 8), Err(Error::Selection(_))));
        assert!(matches!(select_target(&utt, Position::Start, 0), Err(Error::Selection(_))));
    }

    #[test]
    fn masked_reference_examples() {
        let t = MaskTarget { word_indices: 1..2, span_s: (0.0, 1.0) };
        assert_eq!(masked_reference(&["please", "call", "stella"], &t).unwrap(), vec!["please", "stella"]);
        let t = MaskTarget { word_indices: 0..2, span_s: (0.0, 1.0) };
        assert!(masked_reference(&["a", "b"], &t).unwrap().is_empty());
        let t = MaskTarget { word_indices: 2..4, span_s: (0.0, 1.0) };
        assert!(matches!(masked_reference(&["a", "b"], &t), Err(Error::Contract(_))));
    }

    #[test]
    fn masked_reference_middle_of_fixture() {
        let utt = seven_words();
        let tokens = utt.transcript_tokens();
        let t = select_target(&utt, Position::Middle, 1).unwrap();
        let out = masked_reference(&tokens, &t).unwrap();
        let expected: Vec<String> =
            tokens.iter().enumerate().filter(|(i, _)| *i != 3).map(|(_, s)| s.clone()).collect();
        assert_eq!(out.len(), 6);
        assert_eq!(out, expected);
    }

    #[test]
    fn json_uses_six_decimals() {
        let mut utt = seven_words();
        utt.words[1].start_s = 0.123_456_789;
        let json = serde_json::to_string(&utt).unwrap();
        assert!(json.contains("0.123457"), "{json}");
        assert!(json.contains("\"intervals\""));
        let target = MaskTarget { word_indices: 2..3, span_s: (0.1000004, 0.2) };
        let json = serde_json::to_string(&target).unwrap();
        assert!(json.contains("[0.1,0.2]"), "{json}");
    }

    #[test]
    fn speaker_prefix() {
        assert_eq!(speaker_from_utterance_id("p225_001"), "p225");
        assert_eq!(speaker_from_utterance_id("solo"), "solo");
    }
}
