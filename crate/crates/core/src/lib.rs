//! Topic segmentation over enumerated sentences.
//!
//! The crate is organised bottom-up:
//!
//! - [`text`]: sentence splitting and the boundary coordinate system
//! - [`windowing`]: overlapping prompt windows and accept-zone merging
//! - [`gateway`]: chat-completion providers and reply parsing
//! - [`segmenter`]: the prompt / merge / validate pipeline
//! - [`baselines`]: fixed-stride, similarity-trough and graph segmenters
//! - [`metrics`]: boundary similarity, boundary precision/recall, Pk and WindowDiff
//! - [`corpus`]: heading ingestion, quality filters and concatenated corpora

pub mod baselines;
pub mod corpus;
pub mod gateway;
pub mod metrics;
pub mod segmenter;
pub mod text;
pub mod windowing;

pub use text::{
    estimate_tokens, render_enumerated, segment_stats, split_sentences, ByteHeuristic, Document,
    Segment, Segmentation, SentenceIndex, SentenceRange, TextError, TokenEstimator,
};
pub use windowing::{
    merge_window_boundaries, plan_windows, Window, WindowConfig, WindowError, WindowPlan,
};
