//! Small text formats: scorer weight files, seed lexicons and the CSV
//! tables exchanged between stages.

use std::collections::BTreeSet;
use std::path::Path;

use cyborg_core::scoring::{ReferenceWeights, FEATURE_NAMES};
use cyborg_core::stance::SeedLexicon;
use cyborg_core::{AgentClass, FlipStats};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

/// The shipped reference scorer weights.
pub const REFERENCE_WEIGHTS: &str = include_str!("../weights/reference.txt");

const VACCINE_LEXICON: &str = include_str!("../data/lexicon_vaccine.txt");
const ELECTIONS_LEXICON: &str = include_str!("../data/lexicon_elections.txt");

pub const BUILTIN_LEXICONS: [&str; 2] = ["vaccine", "elections"];

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{file}: line {line}: {message}")]
    Line { file: String, line: usize, message: String },
    #[error("{file}: {message}")]
    File { file: String, message: String },
    #[error("cannot read {file}: {source}")]
    Io { file: String, source: std::io::Error },
    #[error("{file}: {source}")]
    Csv { file: String, source: csv::Error },
}

fn line_error(file: &str, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Line { file: file.to_string(), line, message: message.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses `key = value` lines; `#` starts a comment. Every feature and
/// `bias` must appear exactly once.
pub fn parse_weights(file: &str, text: &str) -> Result<ReferenceWeights, FormatError> {
    let mut weights = ReferenceWeights::zeros();
    let mut seen = BTreeSet::new();
    for (n, line) in content_lines(text) {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| line_error(file, n, "expected key = value"))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| line_error(file, n, format!("{key}: not a number: {}", value.trim())))?;
        if !value.is_finite() {
            return Err(line_error(file, n, format!("{key}: weight must be finite")));
        }
        weights.set(key, value).map_err(|_| line_error(file, n, format!("unknown key {key}")))?;
        if !seen.insert(key.to_string()) {
            return Err(line_error(file, n, format!("duplicate key {key}")));
        }
    }
    let missing: Vec<&str> =
        std::iter::once("bias").chain(FEATURE_NAMES).filter(|k| !seen.contains(*k)).collect();
    if !missing.is_empty() {
        return Err(FormatError::File { file: file.to_string(), message: format!("missing keys: {}", missing.join(", ")) });
    }
    Ok(weights)
}

pub fn format_weights(weights: &ReferenceWeights) -> String {
    weights.entries().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Parses a lexicon: `[pro]` and `[anti]` section headers followed by one
/// hashtag per line. A line starting with `# ` is a comment; `#tag` is a
/// hashtag.
pub fn parse_lexicon(name: &str, text: &str) -> Result<SeedLexicon, FormatError> {
    let mut pro = Vec::new();
    let mut anti = Vec::new();
    let mut section: Option<&mut Vec<String>> = None;
    for (n, line) in content_lines(text) {
        let comment = line.strip_prefix('#').is_some_and(|rest| rest.is_empty() || rest.starts_with(char::is_whitespace));
        if comment {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "[pro]" => section = Some(&mut pro),
            "[anti]" => section = Some(&mut anti),
            s if s.starts_with('[') => return Err(line_error(name, n, format!("unknown section {line}"))),
            _ => match section.as_mut() {
                Some(v) => v.push(line.to_string()),
                None => return Err(line_error(name, n, "hashtag before any [pro]/[anti] section")),
            },
        }
    }
    SeedLexicon::new(name, pro, anti).map_err(|e| FormatError::File { file: name.to_string(), message: e.to_string() })
}

pub fn builtin_lexicon(name: &str) -> Option<SeedLexicon> {
    let text = match name {
        "vaccine" => VACCINE_LEXICON,
        "elections" => ELECTIONS_LEXICON,
        _ => return None,
    };
    Some(parse_lexicon(name, text).expect("bundled lexicons are valid"))
}

/// A built-in lexicon name or a path to a lexicon file.
pub fn load_lexicon(spec: &str) -> Result<SeedLexicon, FormatError> {
    if let Some(lex) = builtin_lexicon(spec) {
        return Ok(lex);
    }
    let text = std::fs::read_to_string(spec).map_err(|source| FormatError::Io { file: spec.to_string(), source })?;
    let name = Path::new(spec).file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
    parse_lexicon(name, &text)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FormatError> {
    let file = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|source| FormatError::Csv { file: file.clone(), source })?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|source| FormatError::Csv { file, source })
}

/// Serializes rows with a header. The header is written even for no rows.
pub fn csv_string<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspensionRow {
    pub agent_id: String,
    pub suspended: bool,
}

pub const SUSPENSION_HEADER: [&str; 2] = ["agent_id", "suspended"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub agent_id: String,
    pub class: String,
    pub true_flips: u32,
    pub true_mean_delta: f64,
}

pub const GROUND_TRUTH_HEADER: [&str; 4] = ["agent_id", "class", "true_flips", "true_mean_delta"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyScoreRow {
    pub agent_id: String,
    pub day: String,
    pub probability: f64,
    pub scorer_id: String,
}

pub const DAILY_SCORE_HEADER: [&str; 4] = ["agent_id", "day", "probability", "scorer_id"];

/// External scores may leave out the scorer column.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ExternalScoreRow {
    pub agent_id: String,
    pub day: String,
    pub probability: f64,
    #[serde(default)]
    pub scorer_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipRow {
    pub agent_id: String,
    pub n_flips: u32,
    pub n_b2h: u32,
    pub n_h2b: u32,
    pub mean_abs_delta: f64,
    pub score_stddev: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

pub const FLIP_STATS_HEADER: [&str; 6] = ["agent_id", "n_flips", "n_b2h", "n_h2b", "mean_abs_delta", "score_stddev"];
pub const FLIPS_HEADER: [&str; 7] =
    ["agent_id", "n_flips", "n_b2h", "n_h2b", "mean_abs_delta", "score_stddev", "class"];

impl FlipRow {
    pub fn new(stats: &FlipStats, class: Option<AgentClass>) -> Self {
        FlipRow {
            agent_id: stats.agent_id.clone(),
            n_flips: stats.n_flips,
            n_b2h: stats.n_bot_to_human,
            n_h2b: stats.n_human_to_bot,
            mean_abs_delta: stats.mean_abs_delta,
            score_stddev: stats.score_stddev,
            class: class.map(|c| c.as_str().to_string()),
        }
    }

    pub fn stats(&self) -> FlipStats {
        FlipStats {
            agent_id: self.agent_id.clone(),
            n_flips: self.n_flips,
            n_bot_to_human: self.n_b2h,
            n_human_to_bot: self.n_h2b,
            mean_abs_delta: self.mean_abs_delta,
            score_stddev: self.score_stddev,
        }
    }

    pub fn agent_class(&self) -> Option<AgentClass> {
        self.class.as_deref().and_then(AgentClass::parse)
    }
}
