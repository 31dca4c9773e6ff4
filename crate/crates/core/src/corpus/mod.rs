//! Corpus construction: heading-derived references, quality filters,
//! concatenated documents, JSONL storage.

mod concat;
mod filters;
mod headings;
mod jsonl;

pub use concat::{make_concatenated, make_concatenated_batch, ConcatOptions};
pub use filters::{apply_filters, filter_report_csv, FilterDecision, FilterReason, FilterRules};
pub use headings::{parse_headings, HeadedBlock, HeadingFormat};
pub use jsonl::{parse_jsonl, read_jsonl, to_jsonl, write_jsonl};

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::text::{split_sentences, Document, Segmentation, SentenceIndex, TextError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: field {field:?}: {message}")]
    SchemaViolation {
        line: usize,
        field: String,
        message: String,
    },
    #[error("article has no heading-delimited section with body text")]
    NoSections,
    #[error("pool offers {available} usable source documents, {needed} needed")]
    InsufficientPool { needed: usize, available: usize },
    #[error(transparent)]
    Text(#[from] TextError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Human,
    Wiki,
    Conc,
    Synthetic,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Human => "human",
            Source::Wiki => "wiki",
            Source::Conc => "conc",
            Source::Synthetic => "synthetic",
        })
    }
}

impl std::str::FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Source::Human),
            "wiki" => Ok(Source::Wiki),
            "conc" => Ok(Source::Conc),
            "synthetic" => Ok(Source::Synthetic),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusDocument {
    pub id: String,
    pub source: Source,
    pub text: String,
    pub reference: Segmentation,
    pub meta: Map<String, Value>,
}

impl CorpusDocument {
    /// Checks the reference against the sentence splitter.
    pub fn new(
        id: impl Into<String>,
        source: Source,
        text: impl Into<String>,
        reference: Segmentation,
        meta: Map<String, Value>,
    ) -> Result<Self, TextError> {
        let text = text.into();
        split_sentences(&text)?.check_segmentation(&reference)?;
        Ok(Self {
            id: id.into(),
            source,
            text,
            reference,
            meta,
        })
    }

    pub fn sentences(&self) -> SentenceIndex {
        split_sentences(&self.text).expect("validated at construction")
    }

    pub fn segment_texts(&self) -> Vec<&str> {
        let idx = self.sentences();
        self.reference
            .segment_ranges()
            .into_iter()
            .map(|r| &self.text[idx.byte_range(r).expect("validated at construction")])
            .collect()
    }

    pub fn to_document(&self) -> Document {
        Document {
            id: self.id.clone(),
            text: self.text.clone(),
            reference: Some(self.reference.clone()),
        }
    }

    pub fn category(&self) -> Option<&str> {
        self.meta.get("category").and_then(Value::as_str)
    }
}

/// Joins non-empty parts with a blank line and puts a boundary at every
/// seam. Returns the text and the reference.
pub(crate) fn assemble<S: AsRef<str>>(parts: &[S]) -> Result<(String, Segmentation), TextError> {
    let mut text = String::new();
    let mut seams = Vec::new();
    for part in parts {
        let p = part.as_ref().trim();
        if p.is_empty() {
            continue;
        }
        if !text.is_empty() {
            text.push_str("\n\n");
            seams.push(text.len());
        }
        text.push_str(p);
    }
    let idx = split_sentences(&text)?;
    let boundaries = seams
        .iter()
        .map(|&offset| idx.spans().iter().filter(|s| s.start < offset).count())
        .collect();
    let seg = Segmentation::new(idx.count(), boundaries)?;
    Ok((text, seg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestOptions {
    /// Heading levels, counted from the top level present, that start a new
    /// segment. Deeper headings are removed without creating a boundary.
    pub depth: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { depth: 1 }
    }
}

/// Removes headings and records a boundary where each top-level section
/// begins. A single leading heading above everything else is taken as the
/// article title.
pub fn ingest_headed(
    id: impl Into<String>,
    source: Source,
    blocks: &[HeadedBlock],
    opts: &IngestOptions,
) -> Result<CorpusDocument, CorpusError> {
    let min = blocks
        .iter()
        .filter_map(|b| b.level)
        .min()
        .ok_or(CorpusError::NoSections)?;
    let is_title = blocks[0].level == Some(min)
        && blocks.iter().filter(|b| b.level == Some(min)).count() == 1
        && blocks.iter().any(|b| b.level.is_some_and(|l| l > min));
    let title = is_title.then(|| blocks[0].title.clone());
    let top = if is_title {
        blocks[1..].iter().filter_map(|b| b.level).min().unwrap()
    } else {
        min
    };
    let cutoff = top + opts.depth.max(1) - 1;

    let mut sections: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, b) in blocks.iter().enumerate() {
        let starts_section = matches!(b.level, Some(l) if l <= cutoff) && !(i == 0 && is_title);
        if starts_section && !current.trim().is_empty() {
            sections.push(std::mem::take(&mut current));
        }
        let body = b.body.trim();
        if !body.is_empty() {
            if !current.is_empty() {
                current.push_str("\n\n");
            }
            current.push_str(body);
        }
    }
    if !current.trim().is_empty() {
        sections.push(current);
    }
    if sections.is_empty() {
        return Err(CorpusError::NoSections);
    }
    let (text, reference) = assemble(&sections)?;

    let mut meta = Map::new();
    if let Some(t) = title {
        meta.insert("title".into(), Value::String(t));
    }
    meta.insert(
        "headings".into(),
        blocks
            .iter()
            .skip(usize::from(is_title))
            .filter(|b| b.level.is_some())
            .map(|b| Value::String(b.title.clone()))
            .collect(),
    );
    Ok(CorpusDocument::new(id, source, text, reference, meta)?)
}
