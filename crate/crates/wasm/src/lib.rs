//! Browser demo bindings. Every export takes plain values and returns a JSON
//! string; failures surface as JavaScript exceptions.

use serde::Serialize;
use topicseg::baselines::{
    similarity_series, trough_boundaries, EmbeddingProvider, HashingEmbedder, SeriesParams,
};
use topicseg::metrics::{
    match_boundaries, pk, precision_recall_from_matching, similarity_from_matching, window_diff,
    BoundaryPair, MatchConfig,
};
use topicseg::{
    plan_windows, render_enumerated, split_sentences, ByteHeuristic, Segmentation, WindowConfig,
};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct WindowView {
    first_sentence: usize,
    last_sentence: usize,
    tokens: [usize; 2],
    accept: [usize; 2],
    enumerated: String,
}

#[derive(Serialize)]
struct PlanView {
    sentences: Vec<String>,
    total_tokens: usize,
    windows: Vec<WindowView>,
}

pub fn window_plan(text: &str, window_budget: usize, overlap: usize) -> Result<String, String> {
    let index = split_sentences(text).map_err(|e| e.to_string())?;
    let cfg = WindowConfig {
        window_budget,
        max_segment_tokens: (overlap / 2).max(1),
        overlap,
    };
    let plan = plan_windows(&index, &cfg, &ByteHeuristic).map_err(|e| e.to_string())?;
    let windows = plan
        .windows
        .iter()
        .map(|w| {
            Ok(WindowView {
                first_sentence: w.sentences.start,
                last_sentence: w.sentences.end,
                tokens: [w.tokens.start, w.tokens.end],
                accept: [w.accept.start, w.accept.end],
                enumerated: render_enumerated(&index, w.sentences)
                    .map_err(|e| e.to_string())?
                    .text,
            })
        })
        .collect::<Result<_, String>>()?;
    let view = PlanView {
        sentences: index.sentences().map(str::to_string).collect(),
        total_tokens: plan.total_tokens,
        windows,
    };
    Ok(serde_json::to_string(&view).expect("plan serialises"))
}

#[derive(Serialize)]
struct ScoreView {
    b: f64,
    bp: f64,
    br: f64,
    pk: Option<f64>,
    wd: Option<f64>,
    pairs: Vec<BoundaryPair>,
    unmatched_hyp: Vec<usize>,
    unmatched_ref: Vec<usize>,
}

fn parse_boundaries(list: &str) -> Result<Vec<usize>, String> {
    list.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| format!("not a boundary index: {t:?}"))
        })
        .collect()
}

pub fn score(num_sentences: usize, hyp: &str, reference: &str, n: usize) -> Result<String, String> {
    let seg = |list: &str| {
        Segmentation::from_unsorted(num_sentences, parse_boundaries(list)?)
            .map_err(|e| e.to_string())
    };
    let (h, r) = (seg(hyp)?, seg(reference)?);
    let m = match_boundaries(&h, &r, &MatchConfig { n }).map_err(|e| e.to_string())?;
    let (bp, br) = precision_recall_from_matching(&m);
    let view = ScoreView {
        b: similarity_from_matching(&m),
        bp,
        br,
        pk: pk(&h, &r, None).ok(),
        wd: window_diff(&h, &r, None).ok(),
        pairs: m.pairs,
        unmatched_hyp: m.unmatched_hyp,
        unmatched_ref: m.unmatched_ref,
    };
    Ok(serde_json::to_string(&view).expect("scores serialise"))
}

#[derive(Serialize)]
struct TroughView {
    sentences: Vec<String>,
    values: Vec<f64>,
    boundaries: Vec<usize>,
}

pub fn troughs(text: &str, threshold: f64, window: usize) -> Result<String, String> {
    let index = split_sentences(text).map_err(|e| e.to_string())?;
    let sentences: Vec<&str> = index.sentences().collect();
    let vectors = HashingEmbedder::default()
        .embed_document("demo", &sentences)
        .map_err(|e| e.to_string())?;
    let params = SeriesParams {
        window: window.max(1),
        ..SeriesParams::default()
    };
    let series = similarity_series(&vectors, &params).map_err(|e| e.to_string())?;
    let boundaries = if series.values.is_empty() {
        Vec::new()
    } else {
        trough_boundaries(&series, threshold).boundaries().to_vec()
    };
    let view = TroughView {
        sentences: sentences.iter().map(|s| s.to_string()).collect(),
        values: series.values,
        boundaries,
    };
    Ok(serde_json::to_string(&view).expect("series serialises"))
}

/// Sentence list, overlapping windows, accept zones and enumerated prompt text.
#[wasm_bindgen(js_name = windowPlan)]
pub fn window_plan_js(text: &str, window_budget: usize, overlap: usize) -> Result<String, JsError> {
    window_plan(text, window_budget, overlap).map_err(|e| JsError::new(&e))
}

/// Boundary similarity, precision, recall, Pk and WindowDiff with the matched pairs.
#[wasm_bindgen(js_name = score)]
pub fn score_js(
    num_sentences: usize,
    hyp: &str,
    reference: &str,
    n: usize,
) -> Result<String, JsError> {
    score(num_sentences, hyp, reference, n).map_err(|e| JsError::new(&e))
}

/// Similarity series over hashed bag-of-words vectors and its troughs.
#[wasm_bindgen(js_name = troughs)]
pub fn troughs_js(text: &str, threshold: f64, window: usize) -> Result<String, JsError> {
    troughs(text, threshold, window).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn plan_has_enumerated_windows() {
        let text = (1..=30)
            .map(|i| format!("Sentence {i} has a few words in it."))
            .collect::<Vec<_>>()
            .join(" ");
        let v: Value = serde_json::from_str(&window_plan(&text, 120, 40).unwrap()).unwrap();
        let windows = v["windows"].as_array().unwrap();
        assert!(windows.len() > 1);
        assert!(windows[0]["enumerated"].as_str().unwrap().contains(" [1] "));
        assert_eq!(v["sentences"].as_array().unwrap().len(), 30);
        assert!(window_plan(&text, 40, 40).is_err());
    }

    #[test]
    fn near_miss_scores_half() {
        let v: Value = serde_json::from_str(&score(10, "4", "5", 2).unwrap()).unwrap();
        assert_eq!(v["b"], 0.5);
        assert_eq!(v["pairs"][0]["distance"], 1);
        assert!(score(10, "4, x", "5", 2).is_err());
        assert!(score(10, "12", "5", 2).is_err());
    }

    #[test]
    fn trough_view() {
        let text = "Bees make honey. Bees guard the hive. Bees dance for food. Trains run on rails. Trains carry coal. Trains need signals.";
        let v: Value = serde_json::from_str(&troughs(text, 0.3, 2).unwrap()).unwrap();
        assert_eq!(v["values"].as_array().unwrap().len(), 5);
        assert_eq!(v["boundaries"], serde_json::json!([3]));
        let one: Value = serde_json::from_str(&troughs("Just one.", 0.3, 2).unwrap()).unwrap();
        assert!(one["boundaries"].as_array().unwrap().is_empty());
    }
}
