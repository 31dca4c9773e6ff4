//! Prompt assembly for the segmentation and single-split requests.

use super::{FewShotExample, SegmenterConfig, SegmenterError};
use crate::gateway::{ChatMessage, ChatRequest};
use crate::text::{ByteHeuristic, Enumerated, TokenEstimator};

pub const SEGMENT_CUE: &str = "Segments:";
pub const RECURSIVE_CUE: &str = "Segment:";
const EXAMPLES_NOTE: &str = "Examples follow.";

fn render_body(instruction: &str, examples: &[FewShotExample], target: &str, cue: &str) -> String {
    let mut out = instruction.trim_end().to_string();
    if !examples.is_empty() {
        out.push(' ');
        out.push_str(EXAMPLES_NOTE);
    }
    out.push_str("\n\n");
    for ex in examples {
        out.push_str(&format!(
            "Text:\n{}\n\n{cue}\n{}\n\n",
            ex.text.trim(),
            ex.answer.trim()
        ));
    }
    out.push_str(&format!("Text:\n{target}\n\n{cue}"));
    out
}

fn check_size(
    target: &str,
    cfg: &SegmenterConfig,
    estimator: &dyn TokenEstimator,
) -> Result<(), SegmenterError> {
    let tokens = estimator.estimate(target);
    if tokens > cfg.window.window_budget {
        return Err(SegmenterError::PromptTooLarge {
            tokens,
            limit: cfg.window.window_budget,
        });
    }
    Ok(())
}

fn request(cfg: &SegmenterConfig, body: String) -> ChatRequest {
    ChatRequest {
        system: cfg.system_prompt.trim_end().to_string(),
        messages: vec![ChatMessage::user(body)],
        decoding: cfg.decoding,
    }
}

pub fn build_segment_prompt(
    enumerated: &str,
    cfg: &SegmenterConfig,
) -> Result<ChatRequest, SegmenterError> {
    build_segment_prompt_with(enumerated, cfg, &ByteHeuristic)
}

pub fn build_segment_prompt_with(
    enumerated: &str,
    cfg: &SegmenterConfig,
    estimator: &dyn TokenEstimator,
) -> Result<ChatRequest, SegmenterError> {
    if enumerated.trim().is_empty() {
        return Err(SegmenterError::EmptyTarget);
    }
    check_size(enumerated, cfg, estimator)?;
    let body = render_body(
        &cfg.segment_instruction,
        &cfg.segment_examples,
        enumerated,
        SEGMENT_CUE,
    );
    Ok(request(cfg, body))
}

pub fn build_recursive_prompt(
    enumerated: &Enumerated,
    cfg: &SegmenterConfig,
) -> Result<ChatRequest, SegmenterError> {
    build_recursive_prompt_with(enumerated, cfg, &ByteHeuristic)
}

/// Rejects single-sentence input: there is no marker to choose.
pub fn build_recursive_prompt_with(
    enumerated: &Enumerated,
    cfg: &SegmenterConfig,
    estimator: &dyn TokenEstimator,
) -> Result<ChatRequest, SegmenterError> {
    if enumerated.num_sentences() < 2 {
        return Err(SegmenterError::NothingToSplit);
    }
    check_size(&enumerated.text, cfg, estimator)?;
    let body = render_body(
        &cfg.recursive_instruction,
        &cfg.recursive_examples,
        &enumerated.text,
        RECURSIVE_CUE,
    );
    Ok(request(cfg, body))
}

/// Tokens a segmentation prompt spends on everything except the target.
pub fn prompt_overhead(cfg: &SegmenterConfig, estimator: &dyn TokenEstimator) -> usize {
    let body = render_body(
        &cfg.segment_instruction,
        &cfg.segment_examples,
        "",
        SEGMENT_CUE,
    );
    estimator.estimate(&cfg.system_prompt) + estimator.estimate(&body)
}

/// The enumerated target of a request built here, without examples or cue.
/// Handy for scripted providers.
pub fn target_text(req: &ChatRequest) -> &str {
    let body = req.last_user_content();
    let start = body.rfind("Text:\n").map_or(0, |p| p + "Text:\n".len());
    let rest = &body[start..];
    [SEGMENT_CUE, RECURSIVE_CUE]
        .iter()
        .find_map(|cue| rest.strip_suffix(&format!("\n\n{cue}")))
        .unwrap_or(rest)
}

/// Number of sentences in an enumerated target: highest marker plus one.
pub fn target_sentence_count(target: &str) -> usize {
    let mut n = 0;
    while target.contains(&format!(" [{}] ", n + 1)) {
        n += 1;
    }
    n + 1
}
