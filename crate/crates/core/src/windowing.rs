//! Overlapping prompt windows over long documents, and the merge of
//! per-window boundary answers into one global segmentation.
//!
//! Each window owns an accept zone of token positions. Consecutive zones meet
//! at the midpoint of the overlap between their windows, and zones are
//! half-open, so a boundary sitting exactly on a zone edge belongs to the
//! later window.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{Segmentation, SentenceIndex, SentenceRange, TokenEstimator};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error("invalid window config: {0}")]
    InvalidConfig(String),
    #[error("sentence {sentence} needs {tokens} tokens, more than the window budget of {budget}")]
    SentenceTooLarge {
        sentence: usize,
        tokens: usize,
        budget: usize,
    },
    #[error("expected {expected} per-window segmentations, got {got}")]
    WindowCountMismatch { expected: usize, got: usize },
    #[error("window {window} spans {expected} sentences but its segmentation covers {got}")]
    LocalSizeMismatch {
        window: usize,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    /// Token budget for the section text of one prompt.
    pub window_budget: usize,
    pub max_segment_tokens: usize,
    pub overlap: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self::with_max_segment_tokens(3000, 750)
    }
}

impl WindowConfig {
    /// Overlap defaults to twice the maximum segment length.
    pub fn with_max_segment_tokens(window_budget: usize, max_segment_tokens: usize) -> Self {
        Self {
            window_budget,
            max_segment_tokens,
            overlap: 2 * max_segment_tokens,
        }
    }

    pub fn validate(&self) -> Result<(), WindowError> {
        if self.max_segment_tokens == 0 {
            return Err(WindowError::InvalidConfig(
                "max_segment_tokens must be positive".into(),
            ));
        }
        if self.window_budget <= self.overlap {
            return Err(WindowError::InvalidConfig(format!(
                "window budget {} must exceed the overlap {}",
                self.window_budget, self.overlap
            )));
        }
        Ok(())
    }
}

/// Half-open span of estimated token positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn contains(&self, pos: usize) -> bool {
        self.start <= pos && pos < self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub sentences: SentenceRange,
    pub tokens: TokenSpan,
    pub accept: TokenSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub windows: Vec<Window>,
    pub num_sentences: usize,
    pub total_tokens: usize,
    /// Token position of boundary `b` is `boundary_positions[b - 1]`.
    pub boundary_positions: Vec<usize>,
}

impl WindowPlan {
    pub fn boundary_position(&self, boundary: usize) -> usize {
        self.boundary_positions[boundary - 1]
    }

    /// Index of the window whose accept zone owns `boundary`.
    pub fn owner(&self, boundary: usize) -> usize {
        let pos = self.boundary_position(boundary);
        self.windows
            .iter()
            .position(|w| w.accept.contains(pos))
            .expect("accept zones cover the document")
    }
}

/// Plans windows from precomputed cumulative token ends (one per sentence).
pub fn plan_windows_from_tokens(
    token_ends: &[usize],
    cfg: &WindowConfig,
) -> Result<WindowPlan, WindowError> {
    cfg.validate()?;
    let count = token_ends.len();
    if count == 0 {
        return Err(WindowError::InvalidConfig("no sentences to plan".into()));
    }
    let starts: Vec<usize> = std::iter::once(0)
        .chain(token_ends[..count - 1].iter().copied())
        .collect();
    let total = token_ends[count - 1];
    for (i, (&s, &e)) in starts.iter().zip(token_ends).enumerate() {
        if e - s > cfg.window_budget {
            return Err(WindowError::SentenceTooLarge {
                sentence: i + 1,
                tokens: e - s,
                budget: cfg.window_budget,
            });
        }
    }

    // (first, last) as 0-based sentence indices
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut first = 0;
    loop {
        let limit = starts[first] + cfg.window_budget;
        let mut last = first;
        while last + 1 < count && token_ends[last + 1] <= limit {
            last += 1;
        }
        spans.push((first, last));
        if last == count - 1 {
            break;
        }
        // next window starts at the latest sentence start leaving >= overlap
        let target = token_ends[last].saturating_sub(cfg.overlap);
        let by_overlap = starts.partition_point(|&s| s <= target) - 1;
        // the next window must reach at least one sentence further
        let must_reach = token_ends[last + 1] - cfg.window_budget;
        let by_progress = starts.partition_point(|&s| s < must_reach);
        first = by_overlap.max(by_progress).max(first + 1);
    }

    let token_span = |&(f, l): &(usize, usize)| TokenSpan {
        start: starts[f],
        end: token_ends[l],
    };
    let cuts: Vec<usize> = spans
        .windows(2)
        .map(|pair| {
            let (a, b) = (token_span(&pair[0]), token_span(&pair[1]));
            if a.end > b.start {
                b.start + (a.end - b.start) / 2
            } else {
                b.start
            }
        })
        .collect();

    let windows = spans
        .iter()
        .enumerate()
        .map(|(k, span)| Window {
            sentences: SentenceRange::new(span.0 + 1, span.1 + 1),
            tokens: token_span(span),
            accept: TokenSpan {
                start: if k == 0 { 0 } else { cuts[k - 1] },
                end: cuts.get(k).copied().unwrap_or(total),
            },
        })
        .collect();

    Ok(WindowPlan {
        windows,
        num_sentences: count,
        total_tokens: total,
        boundary_positions: token_ends[..count - 1].to_vec(),
    })
}

pub fn plan_windows(
    index: &SentenceIndex,
    cfg: &WindowConfig,
    estimator: &dyn TokenEstimator,
) -> Result<WindowPlan, WindowError> {
    plan_windows_from_tokens(&index.token_ends(estimator), cfg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeOutcome {
    pub segmentation: Segmentation,
    /// Boundaries reported outside the emitting window's accept zone.
    pub dropped_out_of_zone: usize,
}

/// Maps each window's local boundaries to global indices and keeps those
/// that fall inside the window's own accept zone.
pub fn merge_window_boundaries(
    plan: &WindowPlan,
    per_window: &[Segmentation],
) -> Result<MergeOutcome, WindowError> {
    if plan.windows.len() != per_window.len() {
        return Err(WindowError::WindowCountMismatch {
            expected: plan.windows.len(),
            got: per_window.len(),
        });
    }
    let mut kept = Vec::new();
    let mut dropped = 0;
    for (k, (window, local)) in plan.windows.iter().zip(per_window).enumerate() {
        if local.num_sentences() != window.sentences.len() {
            return Err(WindowError::LocalSizeMismatch {
                window: k,
                expected: window.sentences.len(),
                got: local.num_sentences(),
            });
        }
        for &b in local.boundaries() {
            let global = window.sentences.start + b - 1;
            if window.accept.contains(plan.boundary_position(global)) {
                kept.push(global);
            } else {
                dropped += 1;
            }
        }
    }
    let segmentation = Segmentation::from_unsorted(plan.num_sentences, kept)
        .expect("mapped boundaries stay inside the document");
    Ok(MergeOutcome {
        segmentation,
        dropped_out_of_zone: dropped,
    })
}
