use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::text::{Segmentation, SentenceRange, TextError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AttemptOutcome {
    Accepted {
        dropped_out_of_range: usize,
        dropped_duplicates: usize,
    },
    Runaway,
    Unparseable {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub reply: String,
    #[serde(flatten)]
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowTrace {
    pub window: usize,
    pub sentences: SentenceRange,
    pub attempts: Vec<Attempt>,
    /// Local boundaries used for this window, after any fallback.
    pub local_boundaries: Vec<usize>,
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSource {
    Model,
    /// Two unusable replies; split at the middle sentence.
    Fallback,
    /// Too large for one prompt; split at the token midpoint.
    Oversize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn other(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeReason {
    Short,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Split {
        range: SentenceRange,
        at: usize,
        depth: usize,
        source: SplitSource,
        replies: Vec<String>,
    },
    Merge {
        segment: SentenceRange,
        removed: usize,
        direction: Direction,
        reason: MergeReason,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationTrace {
    pub num_sentences: usize,
    pub windows: Vec<WindowTrace>,
    pub dropped_out_of_zone: usize,
    /// Boundaries after window merging, before validation.
    pub merged: Vec<usize>,
    pub actions: Vec<Action>,
}

impl SegmentationTrace {
    pub fn new(num_sentences: usize) -> Self {
        Self {
            num_sentences,
            windows: Vec::new(),
            dropped_out_of_zone: 0,
            merged: Vec::new(),
            actions: Vec::new(),
        }
    }

    /// Re-applies the recorded actions to the merged boundaries.
    pub fn replay(&self) -> Result<Segmentation, TextError> {
        let mut set: BTreeSet<usize> = self.merged.iter().copied().collect();
        for action in &self.actions {
            match action {
                Action::Split { at, .. } => {
                    if !set.insert(*at) {
                        return Err(TextError::InvalidSegmentation(format!(
                            "split at existing boundary {at}"
                        )));
                    }
                }
                Action::Merge { removed, .. } => {
                    if !set.remove(removed) {
                        return Err(TextError::InvalidSegmentation(format!(
                            "merge removes missing boundary {removed}"
                        )));
                    }
                }
            }
        }
        Segmentation::new(self.num_sentences, set.into_iter().collect())
    }

    /// Windows and splits that fell back to a fixed rule.
    pub fn fallbacks(&self) -> usize {
        let windows = self.windows.iter().filter(|w| w.fallback).count();
        let splits = self
            .actions
            .iter()
            .filter(|a| {
                matches!(
                    a,
                    Action::Split {
                        source: SplitSource::Fallback,
                        ..
                    }
                )
            })
            .count();
        windows + splits
    }

    pub fn requests(&self) -> usize {
        let windows: usize = self.windows.iter().map(|w| w.attempts.len()).sum();
        let splits: usize = self
            .actions
            .iter()
            .map(|a| match a {
                Action::Split { replies, .. } => replies.len(),
                Action::Merge { .. } => 0,
            })
            .sum();
        windows + splits
    }
}
