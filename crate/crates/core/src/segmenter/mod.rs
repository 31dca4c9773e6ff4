//! The LLM segmentation pipeline: enumerate, window, prompt, merge, validate.

mod prompt;
mod trace;
mod validate;

pub use prompt::{
    build_recursive_prompt, build_recursive_prompt_with, build_segment_prompt,
    build_segment_prompt_with, prompt_overhead, target_sentence_count, target_text, RECURSIVE_CUE,
    SEGMENT_CUE,
};
pub use trace::{
    Action, Attempt, AttemptOutcome, Direction, MergeReason, SegmentationTrace, SplitSource,
    WindowTrace,
};
pub use validate::{merge_target, FlagKind, Neighbour, OversizeReason, SegmentFlag, Validation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::split_every_k;
use crate::gateway::{parse_index_list_with, ChatProvider, Decoding, GatewayError, RunawayConfig};
use crate::text::{
    render_enumerated, ByteHeuristic, Document, Segmentation, SentenceIndex, SentenceRange,
    TextError, TokenEstimator,
};
use crate::windowing::{
    merge_window_boundaries, plan_windows_from_tokens, WindowConfig, WindowError,
};

#[derive(Debug, Error)]
pub enum SegmenterError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("provider failed: {0}")]
    Provider(#[from] GatewayError),
    #[error("prompt target needs {tokens} tokens, limit is {limit}")]
    PromptTooLarge { tokens: usize, limit: usize },
    #[error("empty prompt target")]
    EmptyTarget,
    #[error("a single sentence cannot be split")]
    NothingToSplit,
    #[error("invalid segmenter config: {0}")]
    InvalidConfig(String),
    #[error("few-shot examples: {0}")]
    Examples(String),
}

/// One worked example: enumerated text and the expected answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotExample {
    pub text: String,
    pub answer: String,
}

pub fn parse_examples(json: &str) -> Result<Vec<FewShotExample>, SegmenterError> {
    let examples: Vec<FewShotExample> =
        serde_json::from_str(json).map_err(|e| SegmenterError::Examples(e.to_string()))?;
    if let Some(i) = examples.iter().position(|e| e.text.trim().is_empty()) {
        return Err(SegmenterError::Examples(format!(
            "example {} has empty text",
            i + 1
        )));
    }
    Ok(examples)
}

pub const DEFAULT_SYSTEM_PROMPT: &str = include_str!("../../data/system_prompt.txt");
pub const DEFAULT_SEGMENT_INSTRUCTION: &str = include_str!("../../data/segment_instruction.txt");
pub const DEFAULT_RECURSIVE_INSTRUCTION: &str =
    include_str!("../../data/recursive_instruction.txt");
const DEFAULT_SEGMENT_EXAMPLES: &str = include_str!("../../data/segment_examples.json");
const DEFAULT_RECURSIVE_EXAMPLES: &str = include_str!("../../data/recursive_examples.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmenterConfig {
    pub window: WindowConfig,
    pub min_segment_words: usize,
    pub max_segment_words: usize,
    pub max_recursion_depth: usize,
    pub punctuation_ratio_limit: f64,
    /// Stride of the fixed split used when a window's replies are unusable.
    pub fallback_stride: usize,
    pub runaway: RunawayConfig,
    /// Shrink the window budget by the system prompt, instruction and examples.
    pub subtract_prompt_overhead: bool,
    pub decoding: Decoding,
    pub system_prompt: String,
    pub segment_instruction: String,
    pub recursive_instruction: String,
    pub segment_examples: Vec<FewShotExample>,
    pub recursive_examples: Vec<FewShotExample>,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            window: WindowConfig::default(),
            min_segment_words: 50,
            max_segment_words: 500,
            max_recursion_depth: 6,
            punctuation_ratio_limit: 0.20,
            fallback_stride: 5,
            runaway: RunawayConfig::default(),
            subtract_prompt_overhead: true,
            decoding: Decoding::default(),
            system_prompt: DEFAULT_SYSTEM_PROMPT.into(),
            segment_instruction: DEFAULT_SEGMENT_INSTRUCTION.into(),
            recursive_instruction: DEFAULT_RECURSIVE_INSTRUCTION.into(),
            segment_examples: parse_examples(DEFAULT_SEGMENT_EXAMPLES).expect("bundled examples"),
            recursive_examples: parse_examples(DEFAULT_RECURSIVE_EXAMPLES)
                .expect("bundled examples"),
        }
    }
}

impl SegmenterConfig {
    /// No few-shot examples, as for a fine-tuned model.
    pub fn zero_shot(mut self) -> Self {
        self.segment_examples.clear();
        self.recursive_examples.clear();
        self
    }

    pub fn validate(&self) -> Result<(), SegmenterError> {
        let bad = |m: String| Err(SegmenterError::InvalidConfig(m));
        if self.min_segment_words == 0 || self.min_segment_words >= self.max_segment_words {
            return bad(format!(
                "need 0 < min_segment_words ({}) < max_segment_words ({})",
                self.min_segment_words, self.max_segment_words
            ));
        }
        if self.max_recursion_depth == 0 {
            return bad("max_recursion_depth must be at least 1".into());
        }
        if self.fallback_stride == 0 {
            return bad("fallback_stride must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.punctuation_ratio_limit) {
            return bad("punctuation_ratio_limit must be within [0, 1]".into());
        }
        self.window.validate()?;
        Ok(())
    }

    /// Window settings used for planning, after the optional overhead cut.
    pub fn planning_window(
        &self,
        estimator: &dyn TokenEstimator,
    ) -> Result<WindowConfig, SegmenterError> {
        let mut w = self.window;
        if self.subtract_prompt_overhead {
            let overhead = prompt_overhead(self, estimator);
            w.window_budget = w.window_budget.checked_sub(overhead).ok_or_else(|| {
                SegmenterError::InvalidConfig(format!(
                    "prompt overhead of {overhead} tokens exceeds the window budget {}",
                    self.window.window_budget
                ))
            })?;
            w.validate().map_err(|e| {
                SegmenterError::InvalidConfig(format!(
                    "after subtracting {overhead} tokens of prompt overhead: {e}"
                ))
            })?;
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationOutput {
    pub segmentation: Segmentation,
    pub flags: Vec<SegmentFlag>,
    pub trace: SegmentationTrace,
}

/// Everything one segmentation run needs besides the text.
#[derive(Clone, Copy)]
pub struct Pipeline<'a> {
    pub cfg: &'a SegmenterConfig,
    pub provider: &'a dyn ChatProvider,
    pub estimator: &'a dyn TokenEstimator,
    /// One vector per sentence; steers merge direction when present.
    pub embeddings: Option<&'a [Vec<f32>]>,
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &'a SegmenterConfig, provider: &'a dyn ChatProvider) -> Self {
        Self {
            cfg,
            provider,
            estimator: &ByteHeuristic,
            embeddings: None,
        }
    }

    pub fn with_estimator(mut self, estimator: &'a dyn TokenEstimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn with_embeddings(mut self, embeddings: &'a [Vec<f32>]) -> Self {
        self.embeddings = Some(embeddings);
        self
    }

    pub fn run(&self, index: &SentenceIndex) -> Result<SegmentationOutput, SegmenterError> {
        self.cfg.validate()?;
        let s = index.count();
        if let Some(e) = self.embeddings {
            if e.len() != s {
                return Err(SegmenterError::InvalidConfig(format!(
                    "{} embeddings for {s} sentences",
                    e.len()
                )));
            }
        }
        let mut trace = SegmentationTrace::new(s);
        let merged = if s == 1 {
            Segmentation::whole(1)
        } else {
            let plan = plan_windows_from_tokens(
                &enumerated_token_ends(index, self.estimator),
                &self.cfg.planning_window(self.estimator)?,
            )?;
            let mut per_window = Vec::with_capacity(plan.windows.len());
            for (k, w) in plan.windows.iter().enumerate() {
                let (local, wt) = self.segment_window(index, k, w.sentences)?;
                per_window.push(local);
                trace.windows.push(wt);
            }
            let outcome = merge_window_boundaries(&plan, &per_window)?;
            trace.dropped_out_of_zone = outcome.dropped_out_of_zone;
            outcome.segmentation
        };
        trace.merged = merged.boundaries().to_vec();
        let v = self.validate(index, &merged)?;
        trace.actions = v.actions;
        Ok(SegmentationOutput {
            segmentation: v.segmentation,
            flags: v.flags,
            trace,
        })
    }

    /// One prompt per window, one retry on an unusable reply, then the
    /// fixed-stride fallback.
    fn segment_window(
        &self,
        index: &SentenceIndex,
        window: usize,
        range: SentenceRange,
    ) -> Result<(Segmentation, WindowTrace), SegmenterError> {
        let n = range.len();
        let mut wt = WindowTrace {
            window,
            sentences: range,
            attempts: Vec::new(),
            local_boundaries: Vec::new(),
            fallback: false,
        };
        if n == 1 {
            return Ok((Segmentation::whole(1), wt));
        }
        let en = render_enumerated(index, range)?;
        let req = build_segment_prompt_with(&en.text, self.cfg, self.estimator)?;
        for _ in 0..2 {
            let reply = self.provider.complete(&req)?;
            match parse_index_list_with(&reply, n - 1, &self.cfg.runaway, false) {
                Ok(p) if !p.runaway_detected => {
                    wt.attempts.push(Attempt {
                        reply,
                        outcome: AttemptOutcome::Accepted {
                            dropped_out_of_range: p.dropped_out_of_range,
                            dropped_duplicates: p.dropped_duplicates,
                        },
                    });
                    wt.local_boundaries = p.indices.clone();
                    return Ok((Segmentation::new(n, p.indices)?, wt));
                }
                Ok(_) => wt.attempts.push(Attempt {
                    reply,
                    outcome: AttemptOutcome::Runaway,
                }),
                Err(e) => wt.attempts.push(Attempt {
                    reply,
                    outcome: AttemptOutcome::Unparseable {
                        error: e.to_string(),
                    },
                }),
            }
        }
        let local = split_every_k(n, self.cfg.fallback_stride);
        wt.local_boundaries = local.boundaries().to_vec();
        wt.fallback = true;
        Ok((local, wt))
    }
}

/// Cumulative token ends counting each sentence with the marker that follows
/// it. Global marker numbers are never shorter than local ones, so a window
/// planned this way fits once re-enumerated.
pub fn enumerated_token_ends(index: &SentenceIndex, estimator: &dyn TokenEstimator) -> Vec<usize> {
    let mut total = 0;
    index
        .sentences()
        .enumerate()
        .map(|(i, s)| {
            total += estimator.estimate(&format!("{s} [{}] ", i + 1));
            total
        })
        .collect()
}

pub fn segment_document(
    doc: &Document,
    cfg: &SegmenterConfig,
    provider: &dyn ChatProvider,
) -> Result<SegmentationOutput, SegmenterError> {
    Pipeline::new(cfg, provider).run(&doc.sentences())
}

pub fn validate_segments(
    index: &SentenceIndex,
    seg: &Segmentation,
    cfg: &SegmenterConfig,
    provider: &dyn ChatProvider,
) -> Result<Validation, SegmenterError> {
    cfg.validate()?;
    Pipeline::new(cfg, provider).validate(index, seg)
}

#[cfg(test)]
mod tests;
