//! Sentence splitting, word/token accounting and the boundary coordinate
//! system shared by every other module.
//!
//! Sentences are numbered from 1. A boundary `b` sits after sentence `b`, so
//! for a document of `S` sentences the valid boundaries are `1..=S-1`.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("input text is empty or whitespace-only")]
    EmptyInput,
    #[error("sentence range {start}..={end} is outside 1..={count}")]
    RangeOutOfBounds {
        start: usize,
        end: usize,
        count: usize,
    },
    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),
}

/// Inclusive, 1-based range of sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentenceRange {
    pub start: usize,
    pub end: usize,
}

impl SentenceRange {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, sentence: usize) -> bool {
        (self.start..=self.end).contains(&sentence)
    }
}

/// A set of boundaries over a fixed number of sentences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segmentation {
    num_sentences: usize,
    boundaries: Vec<usize>,
}

impl Segmentation {
    /// Builds a segmentation from an already sorted, duplicate-free list.
    pub fn new(num_sentences: usize, boundaries: Vec<usize>) -> Result<Self, TextError> {
        if num_sentences == 0 {
            return Err(TextError::InvalidSegmentation(
                "a segmentation needs at least one sentence".into(),
            ));
        }
        for pair in boundaries.windows(2) {
            if pair[0] >= pair[1] {
                return Err(TextError::InvalidSegmentation(format!(
                    "boundaries must be strictly increasing, found {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(&b) = boundaries.iter().find(|&&b| b == 0 || b >= num_sentences) {
            return Err(TextError::InvalidSegmentation(format!(
                "boundary {b} outside 1..={}",
                num_sentences.saturating_sub(1)
            )));
        }
        Ok(Self {
            num_sentences,
            boundaries,
        })
    }

    /// Sorts and deduplicates before validating the range.
    pub fn from_unsorted<I>(num_sentences: usize, boundaries: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut boundaries: Vec<usize> = boundaries.into_iter().collect();
        boundaries.sort_unstable();
        boundaries.dedup();
        Self::new(num_sentences, boundaries)
    }

    /// A single segment covering every sentence.
    pub fn whole(num_sentences: usize) -> Self {
        assert!(
            num_sentences > 0,
            "a segmentation needs at least one sentence"
        );
        Self {
            num_sentences,
            boundaries: Vec::new(),
        }
    }

    pub fn num_sentences(&self) -> usize {
        self.num_sentences
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn num_segments(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn contains(&self, boundary: usize) -> bool {
        self.boundaries.binary_search(&boundary).is_ok()
    }

    /// Sentence ranges of each segment, in order. They tile `1..=S`.
    pub fn segment_ranges(&self) -> Vec<SentenceRange> {
        let mut ranges = Vec::with_capacity(self.num_segments());
        let mut start = 1;
        for &b in &self.boundaries {
            ranges.push(SentenceRange::new(start, b));
            start = b + 1;
        }
        ranges.push(SentenceRange::new(start, self.num_sentences));
        ranges
    }

    /// Rebuilds a segmentation from contiguous ranges that tile `1..=S`.
    pub fn from_ranges(ranges: &[SentenceRange]) -> Result<Self, TextError> {
        let Some(last) = ranges.last() else {
            return Err(TextError::InvalidSegmentation("no segments".into()));
        };
        let mut expected = 1;
        for r in ranges {
            if r.start != expected || r.end < r.start {
                return Err(TextError::InvalidSegmentation(format!(
                    "segment {}..={} does not continue from sentence {expected}",
                    r.start, r.end
                )));
            }
            expected = r.end + 1;
        }
        let boundaries = ranges[..ranges.len() - 1].iter().map(|r| r.end).collect();
        Self::new(last.end, boundaries)
    }
}

/// Byte span of one sentence, trimmed of surrounding whitespace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// Ordered sentence spans over an owned copy of the document text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceIndex {
    text: String,
    spans: Vec<Span>,
}

impl SentenceIndex {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn count(&self) -> usize {
        self.spans.len()
    }

    /// Text of sentence `i` (1-based).
    pub fn sentence(&self, i: usize) -> &str {
        let span = self.spans[i - 1];
        &self.text[span.start..span.end]
    }

    pub fn sentences(&self) -> impl Iterator<Item = &str> + '_ {
        self.spans.iter().map(|s| &self.text[s.start..s.end])
    }

    fn check_range(&self, range: SentenceRange) -> Result<(), TextError> {
        if range.start == 0 || range.start > range.end || range.end > self.count() {
            return Err(TextError::RangeOutOfBounds {
                start: range.start,
                end: range.end,
                count: self.count(),
            });
        }
        Ok(())
    }

    /// Byte range owned by a run of sentences, including the whitespace that
    /// follows it. Leading whitespace of the document belongs to the first
    /// sentence, so the byte ranges of a tiling cover the text exactly.
    pub fn byte_range(&self, range: SentenceRange) -> Result<Range<usize>, TextError> {
        self.check_range(range)?;
        let start = if range.start == 1 {
            0
        } else {
            self.spans[range.start - 1].start
        };
        let end = if range.end == self.count() {
            self.text.len()
        } else {
            self.spans[range.end].start
        };
        Ok(start..end)
    }

    /// Text of each segment. Concatenating the result reproduces the document.
    pub fn segment_texts(&self, seg: &Segmentation) -> Result<Vec<&str>, TextError> {
        self.check_segmentation(seg)?;
        seg.segment_ranges()
            .into_iter()
            .map(|r| self.byte_range(r).map(|b| &self.text[b]))
            .collect()
    }

    pub fn check_segmentation(&self, seg: &Segmentation) -> Result<(), TextError> {
        if seg.num_sentences() != self.count() {
            return Err(TextError::InvalidSegmentation(format!(
                "segmentation covers {} sentences but the text has {}",
                seg.num_sentences(),
                self.count()
            )));
        }
        Ok(())
    }

    /// Cumulative token offsets: `ends[i]` is the token position after
    /// sentence `i + 1`.
    pub fn token_ends(&self, estimator: &dyn TokenEstimator) -> Vec<usize> {
        let mut total = 0;
        self.sentences()
            .map(|s| {
                total += estimator.estimate(s);
                total
            })
            .collect()
    }
}

const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.", "vs.", "e.g.", "i.e.",
    "u.s.", "u.k.", "u.n.", "no.", "nos.", "fig.", "figs.", "vol.", "pp.", "ca.", "approx.",
    "dept.", "gen.", "col.", "lt.", "sgt.", "capt.", "rev.", "hon.", "gov.", "sen.", "rep.",
    "jan.", "feb.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.", "cf.",
    "al.", "op.", "ed.", "eds.",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
}

fn opens_sentence(chars: &[(usize, char)], at: usize) -> bool {
    let Some(&(_, c)) = chars.get(at) else {
        return false;
    };
    if c.is_uppercase() || c.is_ascii_digit() {
        return true;
    }
    is_opener(c)
        && chars
            .get(at + 1)
            .is_some_and(|&(_, n)| n.is_uppercase() || n.is_ascii_digit())
}

fn is_abbreviation(token: &str) -> bool {
    let token = token.trim_start_matches(|c: char| is_opener(c));
    let lower = token.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // single-letter initials such as "J."
    let mut chars = token.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

/// Splits text into sentences.
///
/// A run of `.`, `!` or `?` (plus closing quotes/brackets) ends a sentence
/// when it is followed by whitespace and then an uppercase letter, a digit or
/// an opening quote before one. Known abbreviations and single-letter
/// initials suppress the split. A line break also ends a sentence unless the
/// next line continues in lowercase; a blank line always does.
pub fn split_sentences(text: &str) -> Result<SentenceIndex, TextError> {
    if text.trim().is_empty() {
        return Err(TextError::EmptyInput);
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut last_end = 0;
    let mut i = 0;

    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            if c == '\n' && start.is_some() {
                let mut j = i + 1;
                let mut blank = false;
                while j < chars.len() && chars[j].1.is_whitespace() {
                    blank |= chars[j].1 == '\n';
                    j += 1;
                }
                let continues = chars.get(j).is_some_and(|&(_, n)| n.is_lowercase());
                if blank || !continues {
                    spans.push(Span {
                        start: start.take().unwrap(),
                        end: last_end,
                    });
                }
            }
            i += 1;
            continue;
        }

        let sentence_start = *start.get_or_insert(pos);
        last_end = pos + c.len_utf8();

        if is_terminator(c) {
            let mut j = i + 1;
            while j < chars.len() && (is_terminator(chars[j].1) || is_closer(chars[j].1)) {
                j += 1;
            }
            let run_end = chars.get(j).map_or(text.len(), |&(p, _)| p);
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let followed_by_space = k > j;
            if followed_by_space && opens_sentence(&chars, k) {
                let token_start = text[sentence_start..pos].rfind(char::is_whitespace).map_or(
                    sentence_start,
                    |w| {
                        let ws = text[sentence_start + w..].chars().next().unwrap();
                        sentence_start + w + ws.len_utf8()
                    },
                );
                let token = &text[token_start..run_end];
                let abbreviated = c == '.' && j == i + 1 && is_abbreviation(token);
                if !abbreviated {
                    spans.push(Span {
                        start: sentence_start,
                        end: run_end,
                    });
                    start = None;
                    last_end = run_end;
                    i = j;
                    continue;
                }
            }
            last_end = run_end;
            i = j;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        spans.push(Span {
            start: s,
            end: last_end,
        });
    }
    Ok(SentenceIndex {
        text: text.to_string(),
        spans,
    })
}

/// Enumerated rendering of a sentence range plus the local-to-global map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumerated {
    pub text: String,
    /// `local_to_global[l - 1]` is the global boundary for local marker `[l]`.
    pub local_to_global: Vec<usize>,
}

impl Enumerated {
    pub fn num_sentences(&self) -> usize {
        self.local_to_global.len() + 1
    }

    pub fn to_global(&self, local: usize) -> Option<usize> {
        local
            .checked_sub(1)
            .and_then(|l| self.local_to_global.get(l))
            .copied()
    }
}

/// Joins the sentences of `range` with ` [i] ` after every interior sentence,
/// renumbering markers from 1.
pub fn render_enumerated(
    index: &SentenceIndex,
    range: SentenceRange,
) -> Result<Enumerated, TextError> {
    index.check_range(range)?;
    let mut text = String::new();
    let mut local_to_global = Vec::with_capacity(range.len() - 1);
    for (local, global) in (range.start..=range.end).enumerate() {
        text.push_str(index.sentence(global));
        if global < range.end {
            text.push_str(&format!(" [{}] ", local + 1));
            local_to_global.push(global);
        }
    }
    Ok(Enumerated {
        text,
        local_to_global,
    })
}

/// Pluggable token counter used for window budgets.
pub trait TokenEstimator: Send + Sync {
    fn estimate(&self, text: &str) -> usize;
}

/// `ceil(bytes / 4)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ByteHeuristic;

impl TokenEstimator for ByteHeuristic {
    fn estimate(&self, text: &str) -> usize {
        text.len().div_ceil(4)
    }
}

pub fn estimate_tokens(text: &str) -> usize {
    ByteHeuristic.estimate(text)
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Share of non-whitespace characters that are not ASCII letters.
pub fn non_alpha_ratio(text: &str) -> f64 {
    let (mut visible, mut other) = (0usize, 0usize);
    for c in text.chars().filter(|c| !c.is_whitespace()) {
        visible += 1;
        if !c.is_ascii_alphabetic() {
            other += 1;
        }
    }
    if visible == 0 {
        0.0
    } else {
        other as f64 / visible as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub range: SentenceRange,
    pub word_count: usize,
    pub token_estimate: usize,
    pub non_alpha_ratio: f64,
}

pub fn segment_stats(index: &SentenceIndex, seg: &Segmentation) -> Result<Vec<Segment>, TextError> {
    segment_stats_with(index, seg, &ByteHeuristic)
}

pub fn segment_stats_with(
    index: &SentenceIndex,
    seg: &Segmentation,
    estimator: &dyn TokenEstimator,
) -> Result<Vec<Segment>, TextError> {
    index.check_segmentation(seg)?;
    seg.segment_ranges()
        .into_iter()
        .map(|range| {
            let text = &index.text()[index.byte_range(range)?];
            Ok(Segment {
                range,
                word_count: word_count(text),
                token_estimate: estimator.estimate(text.trim()),
                non_alpha_ratio: non_alpha_ratio(text),
            })
        })
        .collect()
}

/// A document with an optional reference segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub reference: Option<Segmentation>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        reference: Option<Segmentation>,
    ) -> Result<Self, TextError> {
        let text = text.into();
        let index = split_sentences(&text)?;
        if let Some(r) = &reference {
            index.check_segmentation(r)?;
        }
        Ok(Self {
            id: id.into(),
            text,
            reference,
        })
    }

    pub fn sentences(&self) -> SentenceIndex {
        split_sentences(&self.text).expect("validated at construction")
    }
}
