use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::CorpusDocument;
use crate::text::{non_alpha_ratio, word_count};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterRules {
    pub min_segments: usize,
    pub min_segment_words: usize,
    pub max_non_alpha_ratio: f64,
}

impl Default for FilterRules {
    fn default() -> Self {
        Self {
            min_segments: 4,
            min_segment_words: 20,
            max_non_alpha_ratio: 0.20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FilterReason {
    TooFewSegments { segments: usize },
    ShortSegment { segment: usize, words: usize },
    TooManyArtefacts { ratio: f64 },
}

impl fmt::Display for FilterReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterReason::TooFewSegments { segments } => write!(f, "too_few_segments({segments})"),
            FilterReason::ShortSegment { segment, words } => {
                write!(f, "short_segment({segment}:{words})")
            }
            FilterReason::TooManyArtefacts { ratio } => write!(f, "too_many_artefacts({ratio:.3})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub id: String,
    pub kept: bool,
    pub reasons: Vec<FilterReason>,
}

/// Keeps a document only if it passes every rule; reports all that fail.
/// Segment numbers in reasons are 1-based.
pub fn apply_filters(doc: &CorpusDocument, rules: &FilterRules) -> FilterDecision {
    let mut reasons = Vec::new();
    let segments = doc.segment_texts();
    if segments.len() < rules.min_segments {
        reasons.push(FilterReason::TooFewSegments {
            segments: segments.len(),
        });
    }
    for (i, s) in segments.iter().enumerate() {
        let words = word_count(s);
        if words < rules.min_segment_words {
            reasons.push(FilterReason::ShortSegment {
                segment: i + 1,
                words,
            });
        }
    }
    let ratio = non_alpha_ratio(&doc.text);
    if ratio > rules.max_non_alpha_ratio {
        reasons.push(FilterReason::TooManyArtefacts { ratio });
    }
    FilterDecision {
        id: doc.id.clone(),
        kept: reasons.is_empty(),
        reasons,
    }
}

/// `id,kept,reasons` with reasons joined by `;`.
pub fn filter_report_csv(decisions: &[FilterDecision]) -> String {
    let mut out = String::from("id,kept,reasons\n");
    for d in decisions {
        let reasons: Vec<String> = d.reasons.iter().map(ToString::to_string).collect();
        let id = if d.id.contains([',', '"', '\n']) {
            format!("\"{}\"", d.id.replace('"', "\"\""))
        } else {
            d.id.clone()
        };
        let _ = writeln!(out, "{id},{},{}", d.kept, reasons.join(";"));
    }
    out
}
