//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topicseg::baselines::{
    similarity_series, split_every_k, trough_boundaries, SeriesParams, SimilaritySeries,
};
use topicseg::corpus::{
    apply_filters, make_concatenated_batch, parse_jsonl, read_jsonl, to_jsonl, ConcatOptions,
    FilterReason, FilterRules,
};
use topicseg::gateway::{
    detect_runaway, parse_index_list_with, ChatRequest, FnProvider, RunawayConfig,
};
use topicseg::metrics::{
    boundary_precision_recall, boundary_similarity, pk, window_diff, MatchConfig,
};
use topicseg::segmenter::{
    target_sentence_count, target_text, Action, FlagKind, OversizeReason, Pipeline,
    SegmenterConfig, RECURSIVE_CUE,
};
use topicseg::text::word_count;
use topicseg::{
    merge_window_boundaries, plan_windows, split_sentences, ByteHeuristic, Segmentation,
    WindowConfig,
};

fn seg(s: usize, b: &[usize]) -> Segmentation {
    Segmentation::new(s, b.to_vec()).unwrap()
}

fn subset(mask: u32, s: usize) -> Vec<usize> {
    (1..s).filter(|&b| mask & (1 << (b - 1)) != 0).collect()
}

fn fnv(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

// ---------------------------------------------------------------------------
// Metric oracles

/// Best (score units, pairs) over every monotone one-to-one matching,
/// enumerated recursively: each hypothesis boundary is either left unmatched
/// or paired with a later reference boundary than the previous pair used.
fn brute_force(h: &[usize], r: &[usize], n: usize) -> (usize, usize) {
    fn go(h: &[usize], r: &[usize], n: usize, i: usize, j: usize) -> (usize, usize) {
        if i == h.len() {
            return (0, 0);
        }
        let mut best = go(h, r, n, i + 1, j);
        for k in j..r.len() {
            let d = h[i].abs_diff(r[k]);
            if d < n {
                let (s, p) = go(h, r, n, i + 1, k + 1);
                best = best.max((s + n - d, p + 1));
            }
        }
        best
    }
    go(h, r, n, 0, 0)
}

fn oracle_scores(h: &[usize], r: &[usize], n: usize) -> (f64, f64, f64) {
    let (units, pairs) = brute_force(h, r, n);
    let denom = h.len() + r.len() - pairs;
    let b = if denom == 0 {
        1.0
    } else {
        units as f64 / (n * denom) as f64
    };
    let ratio = |count: usize, other: usize| match (count, other) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        _ => units as f64 / (n * count) as f64,
    };
    (b, ratio(h.len(), r.len()), ratio(r.len(), h.len()))
}

fn metric_oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let mut cases = 0usize;
    for s in 1..=8usize {
        let masks = 1u32 << (s - 1);
        for hm in 0..masks {
            for rm in 0..masks {
                let (h, r) = (subset(hm, s), subset(rm, s));
                let (hs, rs) = (seg(s, &h), seg(s, &r));
                for n in 1..=3 {
                    let cfg = MatchConfig { n };
                    let b = boundary_similarity(&hs, &rs, &cfg).unwrap();
                    let (bp, br) = boundary_precision_recall(&hs, &rs, &cfg).unwrap();
                    let expected = oracle_scores(&h, &r, n);
                    if (b, bp, br) != expected {
                        return Err(format!(
                            "S={s} hyp={h:?} ref={r:?} n={n}: got {:?}, oracle {expected:?}",
                            (b, bp, br)
                        ));
                    }
                    cases += 1;
                }
            }
        }
    }
    let took = start.elapsed();
    if took > Duration::from_secs(60) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!(
        "{cases} cases (n = 1..3) in {:.2}s",
        took.as_secs_f64()
    ))
}

fn metric_spot_values() -> Result<String, String> {
    let cfg = MatchConfig::default();
    check(cfg.n == 2, "default n is 2")?;
    let near = boundary_similarity(&seg(10, &[4]), &seg(10, &[5]), &cfg).unwrap();
    check(near == 0.5, &format!("near miss B = {near}"))?;
    let same = seg(10, &[3, 7]);
    let b = boundary_similarity(&same, &same, &cfg).unwrap();
    let (bp, br) = boundary_precision_recall(&same, &same, &cfg).unwrap();
    check((b, bp, br) == (1.0, 1.0, 1.0), "identical sets")?;
    let empty = boundary_similarity(&seg(10, &[]), &seg(10, &[5]), &cfg).unwrap();
    check(empty == 0.0, &format!("empty hypothesis B = {empty}"))?;
    Ok("B({4},{5}) = 0.5, identity = 1, empty = 0".into())
}

fn probe_width_oracle(s: usize, reference: &[usize], k: Option<usize>) -> usize {
    let k = k.unwrap_or_else(|| {
        let mean = s as f64 / (reference.len() + 1) as f64;
        ((mean / 2.0).round() as usize).max(2)
    });
    k.clamp(1, s - 1)
}

fn pk_wd_oracle(s: usize, h: &[usize], r: &[usize], k: Option<usize>) -> (f64, f64) {
    let k = probe_width_oracle(s, r, k);
    let segment_of = |b: &[usize], sentence: usize| b.iter().filter(|&&x| x < sentence).count();
    let between = |b: &[usize], i: usize| b.iter().filter(|&&x| x >= i && x < i + k).count();
    let (mut pk_err, mut wd_err) = (0, 0);
    for i in 1..=s - k {
        let same_h = segment_of(h, i) == segment_of(h, i + k);
        let same_r = segment_of(r, i) == segment_of(r, i + k);
        pk_err += (same_h != same_r) as usize;
        wd_err += (between(h, i) != between(r, i)) as usize;
    }
    (
        pk_err as f64 / (s - k) as f64,
        wd_err as f64 / (s - k) as f64,
    )
}

fn pk_wd_oracle_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let s = rng.gen_range(2..=30);
        let density = rng.gen_range(0.0..0.6);
        let mut draw = || (1..s).filter(|_| rng.gen_bool(density)).collect::<Vec<_>>();
        let (h, r) = (draw(), draw());
        let k = if rng.gen_bool(0.5) {
            None
        } else {
            Some(rng.gen_range(1..=s + 2))
        };
        let got = (
            pk(&seg(s, &h), &seg(s, &r), k).unwrap(),
            window_diff(&seg(s, &h), &seg(s, &r), k).unwrap(),
        );
        let expected = pk_wd_oracle(s, &h, &r, k);
        if got != expected {
            return Err(format!(
                "case {case}: S={s} hyp={h:?} ref={r:?} k={k:?}: {got:?} vs {expected:?}"
            ));
        }
    }
    Ok("1000 random pairs, S <= 30".into())
}

// ---------------------------------------------------------------------------
// LLM pipeline

const SENTENCE_POOL: &[&str] = &[
    "The committee met on Tuesday.",
    "Dr. Smith presented the results, e.g. the survey figures.",
    "Prices rose by 3.5 percent in the third quarter!",
    "Was the bridge finished on time?",
    "Café owners along the river reported a busy déjà vu summer.",
    "\"We expected more,\" said the mayor.",
    "See section [4] of the report for the details.",
    "Numbers like 1, 2, 3, 4, 5 appear in the appendix.",
    "The U.S. delegation arrived late.",
    "Rain fell for nine days without a break.",
    "Fish stocks in the northern bay have recovered slowly.",
    "A new library opened near the old harbour.",
    "||| ### --- *** 1234 5678 ---",
    "Mr. Jones disagreed with every point raised.",
    "The garden was planted with beans, peas and onions.",
];

fn random_text(rng: &mut ChaCha8Rng, sentences: usize) -> String {
    let mut text = String::new();
    if rng.gen_bool(0.2) {
        text.push_str("  \n");
    }
    for i in 0..sentences {
        let base = SENTENCE_POOL[rng.gen_range(0..SENTENCE_POOL.len())];
        let pad = rng.gen_range(0..25);
        let extra: Vec<&str> = (0..pad)
            .map(|_| ["word", "more", "text", "über", "naïve"][rng.gen_range(0..5)])
            .collect();
        if extra.is_empty() {
            text.push_str(base);
        } else {
            let (head, tail) = base.split_at(base.len() - 1);
            text.push_str(&format!("{head} {}{tail}", extra.join(" ")));
        }
        if i + 1 < sentences {
            text.push_str(["  ", " ", "\n\n", "\t", " \n\n  "][rng.gen_range(0..5)]);
        }
    }
    if rng.gen_bool(0.2) {
        text.push_str("\n  ");
    }
    text
}

fn adversarial_reply(req: &ChatRequest) -> String {
    let content = req.last_user_content();
    let n = target_sentence_count(target_text(req));
    let mut rng = ChaCha8Rng::seed_from_u64(fnv(content));
    let recursive = content.ends_with(RECURSIVE_CUE);
    match rng.gen_range(0..10) {
        0 => {
            let mut v = vec![1, 15];
            v.extend((22..n + 60).step_by(3));
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        }
        1 => "3, 3, 5, 5, 5, 2, 2".into(),
        2 => format!("0, {}, {}, 99999999999999999999999", n, n + 7),
        3 => String::new(),
        4 => "The topic clearly changes after the second sentence.".into(),
        5 => target_text(req).to_string(),
        6 => "-3, -1, [2], (4)".into(),
        7 if recursive => "1.5".into(),
        _ => {
            let k = rng.gen_range(0..6);
            let v: BTreeSet<usize> = (0..k).map(|_| rng.gen_range(1..n.max(2))).collect();
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        }
    }
}

fn unedited_guarantee() -> Result<String, String> {
    let provider = FnProvider(|req: &ChatRequest| Ok(adversarial_reply(req)));
    let default_cfg = SegmenterConfig::default();
    let small_cfg = SegmenterConfig {
        window: WindowConfig {
            window_budget: 400,
            max_segment_tokens: 100,
            overlap: 200,
        },
        subtract_prompt_overhead: false,
        ..SegmenterConfig::default().zero_shot()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut windows, mut fallbacks) = (0, 0);
    for d in 0..200 {
        let sentences = rng.gen_range(1..=if d % 2 == 0 { 400 } else { 120 });
        let text = random_text(&mut rng, sentences);
        let index = split_sentences(&text).map_err(|e| e.to_string())?;
        let cfg = if d % 2 == 0 { &default_cfg } else { &small_cfg };
        let out = Pipeline::new(cfg, &provider)
            .run(&index)
            .map_err(|e| format!("document {d}: {e}"))?;
        let rebuilt = index
            .segment_texts(&out.segmentation)
            .map_err(|e| e.to_string())?
            .concat();
        if rebuilt != text {
            return Err(format!("document {d}: reconstruction differs"));
        }
        windows += out.trace.windows.len();
        fallbacks += out.trace.windows.iter().filter(|w| w.fallback).count();
    }
    Ok(format!(
        "200/200 byte-identical ({windows} windows, {fallbacks} fallbacks)"
    ))
}

fn windowing_arithmetic() -> Result<String, String> {
    // 40 sentences of exactly 400 bytes = 100 estimated tokens each.
    let sentence = |i: usize| {
        let head = format!("Sentence {i:02} ");
        format!("{head}{}.", "x".repeat(400 - head.len() - 1))
    };
    let text: String = (1..=40).map(sentence).collect::<Vec<_>>().join(" ");
    let index = split_sentences(&text).unwrap();
    check(index.count() == 40, "40 sentences")?;
    let plan = plan_windows(&index, &WindowConfig::default(), &ByteHeuristic)
        .map_err(|e| e.to_string())?;
    check(
        plan.total_tokens == 4000,
        &format!("total tokens {}", plan.total_tokens),
    )?;
    let zones: Vec<(usize, usize)> = plan
        .windows
        .iter()
        .map(|w| (w.accept.start, w.accept.end))
        .collect();
    check(
        zones == vec![(0, 2250), (2250, 4000)],
        &format!("accept zones {zones:?}"),
    )?;

    // Window 1 covers sentences 1..=30, window 2 covers 16..=40.
    let replies = ["10, 20, 22, 25, 28", "3, 7, 8, 12, 20"];
    let per_window: Vec<Segmentation> = plan
        .windows
        .iter()
        .zip(replies)
        .map(|(w, reply)| {
            let n = w.sentences.len();
            let parsed =
                parse_index_list_with(reply, n - 1, &RunawayConfig::default(), false).unwrap();
            seg(n, &parsed.indices)
        })
        .collect();
    let merged = merge_window_boundaries(&plan, &per_window).map_err(|e| e.to_string())?;
    // Hand computation: window 1 keeps globals below token 2250 (10, 20, 22);
    // window 2 maps local b to 15 + b and keeps 23, 27, 35.
    let expected = [10, 20, 22, 23, 27, 35];
    check(
        merged.segmentation.boundaries() == expected,
        &format!("merged {:?}", merged.segmentation.boundaries()),
    )?;
    check(merged.dropped_out_of_zone == 4, "4 dropped out of zone")?;
    Ok("zones [0,2250)/[2250,4000), merged {10,20,22,23,27,35}".into())
}

fn median_reply(req: &ChatRequest) -> String {
    let content = req.last_user_content();
    let n = target_sentence_count(target_text(req));
    if content.ends_with(RECURSIVE_CUE) {
        return (n / 2).max(1).to_string();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(fnv(content));
    let k = rng.gen_range(0..4);
    let v: BTreeSet<usize> = (0..k).map(|_| rng.gen_range(1..n.max(2))).collect();
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn validation_fixpoint() -> Result<String, String> {
    let provider = FnProvider(|req: &ChatRequest| Ok(median_reply(req)));
    let cfg = SegmenterConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut segments, mut flagged, mut max_depth) = (0, 0, 0);
    for d in 0..100 {
        let sentences = rng.gen_range(1..=250);
        let text: String = (0..sentences)
            .map(|i| {
                let words = if rng.gen_bool(0.01) {
                    rng.gen_range(500..700)
                } else {
                    rng.gen_range(1..60)
                };
                format!("Item{i} {}.", vec!["word"; words - 1].join(" "))
            })
            .collect::<Vec<_>>()
            .join(" ");
        let index = split_sentences(&text).unwrap();
        let out = Pipeline::new(&cfg, &provider)
            .run(&index)
            .map_err(|e| format!("document {d}: {e}"))?;
        for action in &out.trace.actions {
            if let Action::Split { depth, .. } = action {
                if *depth > cfg.max_recursion_depth {
                    return Err(format!("document {d}: split at depth {depth}"));
                }
                max_depth = max_depth.max(*depth);
            }
        }
        for range in out.segmentation.segment_ranges() {
            segments += 1;
            let words = word_count(&text[index.byte_range(range).unwrap()]);
            if (cfg.min_segment_words..=cfg.max_segment_words).contains(&words) {
                continue;
            }
            let flag = out.flags.iter().find(|f| f.range == range);
            let ok = match flag.map(|f| f.kind) {
                Some(FlagKind::Oversized { reason }) => {
                    words > cfg.max_segment_words
                        && (reason != OversizeReason::SingleSentence || range.len() == 1)
                }
                Some(FlagKind::Undersized) | Some(FlagKind::Artefact) => {
                    words < cfg.min_segment_words
                }
                None => false,
            };
            if !ok {
                return Err(format!(
                    "document {d}: segment {range:?} has {words} words, flag {flag:?}"
                ));
            }
            flagged += 1;
        }
    }
    Ok(format!(
        "{segments} segments, {flagged} flagged, max split depth {max_depth}"
    ))
}

fn runaway_detection() -> Result<String, String> {
    // A long counting run, gaps filled with its own step of 3.
    let mut pattern = vec![1u64, 15];
    pattern.extend((22..=124).step_by(3));
    let cfg = RunawayConfig::default();
    check(detect_runaway(&pattern, 59, &cfg), "pattern with S = 60")?;
    let raw = pattern
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let parsed = parse_index_list_with(&raw, 59, &cfg, false).unwrap();
    check(parsed.runaway_detected, "parser flags the pattern")?;
    check(
        !detect_runaway(&[2, 4, 6, 8, 10], 39, &cfg),
        "in-range regular",
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..10_000 {
        let s = rng.gen_range(2..=200);
        let indices: Vec<usize> = if rng.gen_bool(0.3) {
            let step = rng.gen_range(1..=5);
            let start = rng.gen_range(1..s);
            (start..s).step_by(step).collect()
        } else {
            let density = rng.gen_range(0.0..0.5);
            (1..s).filter(|_| rng.gen_bool(density)).collect()
        };
        let raw = indices
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ");
        let parsed = parse_index_list_with(&raw, s - 1, &cfg, false).map_err(|e| e.to_string())?;
        if parsed.runaway_detected || parsed.indices != indices {
            return Err(format!("case {case}: false positive on {raw:?} with S={s}"));
        }
    }
    Ok("long counting run detected; 0/10000 false positives".into())
}

// ---------------------------------------------------------------------------
// Baselines and corpus

fn baseline_determinism() -> Result<String, String> {
    check(
        split_every_k(23, 5).boundaries() == [5, 10, 15, 20],
        "split_every_k(23, 5)",
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000 {
        let len = rng.gen_range(1..60);
        // Coarse values so that plateaus and ties occur.
        let values: Vec<f64> = (0..len)
            .map(|_| rng.gen_range(-4..=10) as f64 / 10.0)
            .collect();
        let series = SimilaritySeries { values };
        let (a, b) = (rng.gen_range(-0.5..1.1), rng.gen_range(-0.5..1.1));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let low: BTreeSet<usize> = trough_boundaries(&series, lo)
            .boundaries()
            .iter()
            .copied()
            .collect();
        let high: BTreeSet<usize> = trough_boundaries(&series, hi)
            .boundaries()
            .iter()
            .copied()
            .collect();
        if !low.is_subset(&high) {
            return Err(format!(
                "case {case}: {low:?} at {lo} not within {high:?} at {hi}"
            ));
        }
    }

    // e1 = (1,0), e2 = (1,1), e3 = (0,1). Boundary 1: cos(e2,e1) = 1/sqrt2.
    // Boundary 2: weights 1 and 0.5 over cos(e3,e2) = 1/sqrt2 and
    // cos(e3,e1) = 0, so (1/sqrt2) / 1.5 = sqrt2 / 3.
    let e = vec![vec![1.0f32, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    let s = similarity_series(&e, &SeriesParams::default()).unwrap();
    let expected = [
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::SQRT_2 / 3.0,
    ];
    check(s.values.len() == 2, "two values")?;
    for (got, want) in s.values.iter().zip(expected) {
        check(
            (got - want).abs() < 1e-9,
            &format!("series {got} vs {want}"),
        )?;
    }
    Ok("split5 fixed, 1000 monotone series, fixture within 1e-9".into())
}

fn corpus_line(id: &str, segments: &[Vec<String>]) -> String {
    let text = segments
        .iter()
        .map(|s| s.join(" "))
        .collect::<Vec<_>>()
        .join("\n\n");
    let mut boundaries = Vec::new();
    let mut acc = 0;
    for s in &segments[..segments.len() - 1] {
        acc += s.len();
        boundaries.push(acc);
    }
    serde_json::json!({"id": id, "source": "wiki", "text": text, "boundaries": boundaries})
        .to_string()
}

fn words_segment(topic: &str, words: usize, token: &str) -> Vec<String> {
    // Sentences of five words each, last one shorter if needed.
    let mut out = Vec::new();
    let mut left = words;
    let mut i = 0;
    while left > 0 {
        let n = left.min(5);
        let mut w = vec![format!("{topic}{}", ["a", "b", "c", "d", "e"][i % 5])];
        w.extend(std::iter::repeat(token.to_string()).take(n - 1));
        out.push(format!("{}.", w.join(" ")));
        left -= n;
        i += 1;
    }
    out
}

fn corpus_filters() -> Result<String, String> {
    let clean = |words: &[usize]| -> Vec<Vec<String>> {
        words
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                words_segment(
                    &format!("Topic{}", "abcdefg".as_bytes()[i] as char),
                    n,
                    "word",
                )
            })
            .collect()
    };
    let artefact: Vec<Vec<String>> = (0..4)
        .map(|_| words_segment("Table", 25, "ab12;"))
        .collect();
    let jsonl = [
        corpus_line("clean", &clean(&[25, 30, 25, 40, 22])),
        corpus_line("three", &clean(&[25, 30, 25])),
        corpus_line("short", &clean(&[25, 12, 25, 30])),
        corpus_line("noisy", &artefact),
    ]
    .join("\n");
    let docs = parse_jsonl(jsonl.as_bytes()).map_err(|e| e.to_string())?;
    let rules = FilterRules::default();
    let decisions: Vec<_> = docs.iter().map(|d| apply_filters(d, &rules)).collect();
    check(
        decisions[0].kept && decisions[0].reasons.is_empty(),
        "clean fixture kept",
    )?;
    check(
        decisions[1].reasons == [FilterReason::TooFewSegments { segments: 3 }],
        &format!("three: {:?}", decisions[1].reasons),
    )?;
    check(
        decisions[2].reasons
            == [FilterReason::ShortSegment {
                segment: 2,
                words: 12,
            }],
        &format!("short: {:?}", decisions[2].reasons),
    )?;
    check(
        matches!(decisions[3].reasons[..], [FilterReason::TooManyArtefacts { ratio }] if ratio > 0.2),
        &format!("noisy: {:?}", decisions[3].reasons),
    )?;

    let pool = read_jsonl(mini("corpus.jsonl")).map_err(|e| e.to_string())?;
    let opts = ConcatOptions::default();
    let a = to_jsonl(&make_concatenated_batch(&pool, 10, 3, 7, &opts).map_err(|e| e.to_string())?);
    let b = to_jsonl(&make_concatenated_batch(&pool, 10, 3, 7, &opts).map_err(|e| e.to_string())?);
    let c = to_jsonl(&make_concatenated_batch(&pool, 10, 3, 8, &opts).map_err(|e| e.to_string())?);
    check(a == b, "same seed, same bytes")?;
    check(a != c, "different seed differs")?;
    Ok("each rule drops its fixture with the right reason; concat reproducible".into())
}

// ---------------------------------------------------------------------------
// End to end through the binary

fn mini(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/mini")
        .join(name)
}

fn run_bin(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_topicseg"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

const SEGMENTERS: [&str; 4] = ["llm", "split5", "trough", "graph"];

fn full_run(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let corpus = mini("corpus.jsonl");
    let mock = mini("mock.json");
    let mut results = Vec::new();
    for s in SEGMENTERS {
        let out = dir.join(format!("{s}.jsonl"));
        run_bin(&[
            "segment",
            "--segmenter",
            s,
            "--provider",
            mock.to_str().unwrap(),
            "--trace",
            corpus.to_str().unwrap(),
            out.to_str().unwrap(),
        ])?;
        results.push(out);
    }
    let rep = dir.join("report");
    let reference = format!("mini={}", corpus.display());
    let mut args = vec![
        "evaluate",
        "--ref",
        &reference,
        "--out",
        rep.to_str().unwrap(),
    ];
    args.extend(results.iter().map(|p| p.to_str().unwrap()));
    run_bin(&args)?;
    let mut files: Vec<PathBuf> = results;
    for f in [
        "per_document.csv",
        "report.csv",
        "report.txt",
        "report.json",
    ] {
        files.push(rep.join(f));
    }
    files
        .iter()
        .map(|p| {
            Ok((
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(p).map_err(|e| e.to_string())?,
            ))
        })
        .collect()
}

fn end_to_end() -> Result<String, String> {
    let start = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = full_run(a.path())?;
    let second = full_run(b.path())?;
    let took = start.elapsed();
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        check(x == y, &format!("{name} differs between runs"))?;
    }
    let table = String::from_utf8(
        first
            .iter()
            .find(|(n, _)| n == "report.txt")
            .unwrap()
            .1
            .clone(),
    )
    .unwrap();
    let lines: Vec<&str> = table.lines().collect();
    check(lines[0].contains("mini"), "dataset column group")?;
    let header: Vec<&str> = lines[1]
        .split(|c| c == '|' || c == ' ')
        .filter(|t| !t.is_empty())
        .collect();
    check(
        header == ["segmenter", "B", "BP", "BR", "Pk", "WD"],
        &format!("header {header:?}"),
    )?;
    let rows: BTreeSet<&str> = lines[3..]
        .iter()
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    check(
        rows == SEGMENTERS.into_iter().collect(),
        &format!("rows {rows:?}"),
    )?;
    check(took < Duration::from_secs(30), &format!("took {took:?}"))?;
    Ok(format!(
        "4 segmenters x 20 documents, identical across runs, {:.2}s for both",
        took.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------

fn check(cond: bool, what: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Result<String, String>); 10] = [
        ("metric oracle equivalence", metric_oracle_equivalence),
        ("metric spot values", metric_spot_values),
        ("Pk/WD oracle", pk_wd_oracle_equivalence),
        ("unedited-text guarantee", unedited_guarantee),
        ("windowing arithmetic", windowing_arithmetic),
        ("validation fixpoint", validation_fixpoint),
        ("runaway detection", runaway_detection),
        ("baseline determinism", baseline_determinism),
        ("corpus filters", corpus_filters),
        ("end-to-end", end_to_end),
    ];
    let mut failed = Vec::new();
    for (name, criterion) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                println!("[FAIL] {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
