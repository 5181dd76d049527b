//! Labeled short-text datasets: loading, tokenization, padding and
//! inter-annotator agreement.

mod kappa;
mod tokenize;
mod vocab;

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kappa::{cohen_kappa, load_annotations, parse_annotations, AnnotationPair, Agreement};
pub use tokenize::{is_sentinel, tokenize, URL_TOKEN, USER_TOKEN};
pub use vocab::{pad, PaddedSequence, Vocabulary, PAD, PAD_INDEX, UNK, UNK_INDEX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disease {
    Alzheimers,
    HeartAttack,
    Parkinsons,
    Cancer,
    Depression,
    Stroke,
    Other,
}

impl Disease {
    pub const ALL: [Disease; 7] = [
        Disease::Alzheimers,
        Disease::HeartAttack,
        Disease::Parkinsons,
        Disease::Cancer,
        Disease::Depression,
        Disease::Stroke,
        Disease::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Disease::Alzheimers => "alzheimers",
            Disease::HeartAttack => "heart_attack",
            Disease::Parkinsons => "parkinsons",
            Disease::Cancer => "cancer",
            Disease::Depression => "depression",
            Disease::Stroke => "stroke",
            Disease::Other => "other",
        }
    }
}

impl fmt::Display for Disease {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Disease {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Disease::ALL
            .iter()
            .copied()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown disease `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "PHM")]
    Phm,
    #[serde(rename = "NonPHM")]
    NonPhm,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Phm => "PHM",
            Label::NonPhm => "NonPHM",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Phm
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "PHM" => Ok(Label::Phm),
            "NonPHM" => Ok(Label::NonPhm),
            _ => Err(format!("unknown label `{s}`")),
        }
    }
}

/// Sense in which a symptom word is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Usage {
    Figurative,
    Literal,
}

impl Usage {
    pub fn as_str(self) -> &'static str {
        match self {
            Usage::Figurative => "figurative",
            Usage::Literal => "literal",
        }
    }

    pub fn flipped(self) -> Usage {
        match self {
            Usage::Figurative => Usage::Literal,
            Usage::Literal => Usage::Figurative,
        }
    }
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Usage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "figurative" => Ok(Usage::Figurative),
            "literal" => Ok(Usage::Literal),
            _ => Err(format!("unknown usage label `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub disease: Disease,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub label: Label,
    /// Positions in `tokens` holding a symptom keyword.
    pub symptom_indices: Vec<usize>,
}

impl Document {
    pub fn new(id: impl Into<String>, disease: Disease, raw_text: impl Into<String>, label: Label) -> Self {
        let raw_text = raw_text.into();
        Document {
            id: id.into(),
            disease,
            tokens: tokenize(&raw_text),
            raw_text,
            label,
            symptom_indices: Vec::new(),
        }
    }

    /// Records every token position whose token is one of `keywords`.
    pub fn mark_symptoms(&mut self, keywords: &HashSet<String>) {
        self.symptom_indices = self
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| keywords.contains(t.as_str()))
            .map(|(i, _)| i)
            .collect();
    }
}

pub fn parse_dataset(text: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(line_no, format!("expected 4 fields, found {}", fields.len())));
        }
        let disease = fields[1].parse().map_err(|e: String| Error::parse(line_no, e))?;
        let label = fields[3].parse().map_err(|e: String| Error::parse(line_no, e))?;
        docs.push(Document::new(fields[0], disease, fields[2], label));
    }
    Ok(docs)
}

/// Reads the 4-column TSV layout `id, disease, text, label`.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text).map_err(|e| e.in_file(path))
}

pub fn write_dataset<W: Write>(docs: &[Document], mut out: W) -> Result<()> {
    for doc in docs {
        for (field, value) in [("id", &doc.id), ("text", &doc.raw_text)] {
            if value.contains(['\t', '\n', '\r']) {
                return Err(Error::invalid(format!(
                    "document {}: {field} contains a tab or newline",
                    doc.id
                )));
            }
        }
        writeln!(out, "{}\t{}\t{}\t{}", doc.id, doc.disease, doc.raw_text, doc.label)
            .map_err(|e| Error::io("<dataset>", e))?;
    }
    Ok(())
}

/// Drops documents whose text tokenizes to nothing.
pub fn discard_garbled(docs: Vec<Document>) -> Vec<Document> {
    docs.into_iter().filter(|d| !d.tokens.is_empty()).collect()
}

/// Reads a one-entry-per-line word list; `#` starts a comment.
pub fn load_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

pub fn parse_word_list(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .filter(|l| seen.insert(l.clone()))
        .collect()
}
