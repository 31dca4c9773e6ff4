use super::*;
use crate::gateway::{ChatRequest, FnProvider, MockProvider, MockRule};
use crate::text::split_sentences;
use proptest::prelude::*;

/// Sentence `i` reads "Word{i} w w ... w." with `n` words in total.
fn text_of(lengths: &[usize]) -> String {
    lengths
        .iter()
        .enumerate()
        .map(|(i, &n)| format!("Word{} {}.", i + 1, vec!["w"; n - 1].join(" ")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn doc(lengths: &[usize]) -> Document {
    let d = Document::new("d", text_of(lengths), None).unwrap();
    assert_eq!(d.sentences().count(), lengths.len());
    d
}

fn is_recursive(req: &ChatRequest) -> bool {
    req.last_user_content().ends_with(RECURSIVE_CUE)
}

/// Recursive prompts get the middle marker, segmentation prompts `seg_reply`.
fn median_provider(seg_reply: &'static str) -> impl ChatProvider {
    FnProvider(move |req: &ChatRequest| {
        if is_recursive(req) {
            let n = target_sentence_count(target_text(req));
            Ok((n / 2).max(1).to_string())
        } else {
            Ok(seg_reply.to_string())
        }
    })
}

fn reconstruct(d: &Document, seg: &Segmentation) -> String {
    d.sentences().segment_texts(seg).unwrap().concat()
}

#[test]
fn single_window_reply_is_used() {
    let d = doc(&[15; 17]);
    let out = segment_document(
        &d,
        &SegmenterConfig::default(),
        &MockProvider::constant("7, 13"),
    )
    .unwrap();
    assert_eq!(out.segmentation.boundaries(), &[7, 13]);
    assert_eq!(out.trace.windows.len(), 1);
    assert!(out.trace.actions.is_empty());
    assert!(out.flags.is_empty());
}

#[test]
fn empty_reply_gives_one_segment() {
    let d = doc(&[15; 17]);
    let out =
        segment_document(&d, &SegmenterConfig::default(), &MockProvider::constant("")).unwrap();
    assert!(out.segmentation.boundaries().is_empty());
}

#[test]
fn empty_reply_on_long_text_is_split() {
    let d = doc(&[20; 60]);
    let out = segment_document(&d, &SegmenterConfig::default(), &median_provider("")).unwrap();
    assert!(!out.segmentation.boundaries().is_empty());
    assert!(out
        .trace
        .actions
        .iter()
        .any(|a| matches!(a, Action::Split { .. })));
}

#[test]
fn runaway_twice_falls_back_to_stride() {
    let d = doc(&[15; 17]);
    let reply = "1, 15, 16, 17, 18, 19, 20, 21";
    let cfg = SegmenterConfig {
        min_segment_words: 1,
        ..SegmenterConfig::default()
    };
    let out = segment_document(&d, &cfg, &MockProvider::constant(reply)).unwrap();
    let w = &out.trace.windows[0];
    assert!(w.fallback);
    assert_eq!(w.attempts.len(), 2);
    assert!(w
        .attempts
        .iter()
        .all(|a| a.outcome == AttemptOutcome::Runaway));
    assert_eq!(w.local_boundaries, vec![5, 10, 15]);
    assert_eq!(out.segmentation.boundaries(), &[5, 10, 15]);
    assert_eq!(out.trace.fallbacks(), 1);
}

#[test]
fn retry_once_then_accept() {
    let d = doc(&[15; 17]);
    let calls = std::sync::atomic::AtomicUsize::new(0);
    let provider = FnProvider(|_: &ChatRequest| {
        let k = calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        Ok(if k == 0 {
            "I think the topic changes.".into()
        } else {
            "7, 13".into()
        })
    });
    let out = segment_document(&d, &SegmenterConfig::default(), &provider).unwrap();
    assert_eq!(out.segmentation.boundaries(), &[7, 13]);
    let w = &out.trace.windows[0];
    assert!(!w.fallback);
    assert!(matches!(
        w.attempts[0].outcome,
        AttemptOutcome::Unparseable { .. }
    ));
}

#[test]
fn provider_errors_propagate() {
    let d = doc(&[15; 17]);
    let provider = MockProvider::new(vec![MockRule::new("no such text", "1")]);
    assert!(matches!(
        segment_document(&d, &SegmenterConfig::default(), &provider),
        Err(SegmenterError::Provider(GatewayError::Unscripted))
    ));
}

#[test]
fn single_sentence_document() {
    let d = Document::new("one", "Just one sentence here.", None).unwrap();
    let out = segment_document(
        &d,
        &SegmenterConfig::default(),
        &MockProvider::constant("1"),
    )
    .unwrap();
    assert_eq!(out.segmentation, Segmentation::whole(1));
    assert_eq!(out.trace.requests(), 0);
}

#[test]
fn long_segment_split_by_median() {
    // 1200 words in 40 sentences
    let d = doc(&[30; 40]);
    let idx = d.sentences();
    let v = validate_segments(
        &idx,
        &Segmentation::whole(40),
        &SegmenterConfig::default(),
        &median_provider(""),
    )
    .unwrap();
    let splits = v
        .actions
        .iter()
        .filter(|a| matches!(a, Action::Split { .. }))
        .count();
    assert!(splits >= 2, "{:?}", v.actions);
    for s in crate::text::segment_stats(&idx, &v.segmentation).unwrap() {
        assert!(s.word_count <= 500 || v.flags.iter().any(|f| f.range == s.range));
    }
    // 40 -> 20 + 20 (600 each) -> 10 x 4
    assert_eq!(v.segmentation.boundaries(), &[10, 20, 30]);
}

#[test]
fn short_segment_joins_smaller_neighbour() {
    let d = doc(&[100, 100, 100, 30, 45, 45]);
    let idx = d.sentences();
    let seg = Segmentation::new(6, vec![3, 4]).unwrap();
    let v = validate_segments(
        &idx,
        &seg,
        &SegmenterConfig::default(),
        &median_provider(""),
    )
    .unwrap();
    assert_eq!(v.segmentation.boundaries(), &[3]);
    assert_eq!(
        v.actions,
        vec![Action::Merge {
            segment: SentenceRange::new(4, 4),
            removed: 4,
            direction: Direction::Right,
            reason: MergeReason::Short,
        }]
    );
}

#[test]
fn valid_segments_are_a_fixpoint() {
    let d = doc(&[60, 60, 60, 60, 60]);
    let idx = d.sentences();
    let seg = Segmentation::new(5, vec![1, 3]).unwrap();
    let v = validate_segments(
        &idx,
        &seg,
        &SegmenterConfig::default(),
        &MockProvider::new(vec![]),
    )
    .unwrap();
    assert_eq!(v.segmentation, seg);
    assert!(v.actions.is_empty() && v.flags.is_empty());
}

#[test]
fn unsplittable_sentence_is_flagged() {
    let d = doc(&[700, 60]);
    let idx = d.sentences();
    let v = validate_segments(
        &idx,
        &Segmentation::new(2, vec![1]).unwrap(),
        &SegmenterConfig::default(),
        &median_provider(""),
    )
    .unwrap();
    assert_eq!(v.segmentation.boundaries(), &[1]);
    assert_eq!(
        v.flags,
        vec![SegmentFlag {
            range: SentenceRange::new(1, 1),
            words: 700,
            kind: FlagKind::Oversized {
                reason: OversizeReason::SingleSentence
            },
        }]
    );
}

#[test]
fn recursion_cap_flags_instead_of_dropping() {
    let d = doc(&[30; 40]);
    let idx = d.sentences();
    let cfg = SegmenterConfig {
        max_recursion_depth: 1,
        ..SegmenterConfig::default()
    };
    let v = validate_segments(&idx, &Segmentation::whole(40), &cfg, &median_provider("")).unwrap();
    assert_eq!(v.segmentation.boundaries(), &[20]);
    assert_eq!(v.flags.len(), 2);
    assert!(v.flags.iter().all(|f| f.kind
        == FlagKind::Oversized {
            reason: OversizeReason::RecursionExhausted
        }));
}

#[test]
fn bad_split_replies_fall_back_to_middle() {
    let d = doc(&[30; 40]);
    let idx = d.sentences();
    let cfg = SegmenterConfig {
        max_recursion_depth: 1,
        ..SegmenterConfig::default()
    };
    let v = validate_segments(
        &idx,
        &Segmentation::whole(40),
        &cfg,
        &MockProvider::constant("no idea"),
    )
    .unwrap();
    match &v.actions[0] {
        Action::Split {
            at,
            source,
            replies,
            ..
        } => {
            assert_eq!(
                (*at, *source, replies.len()),
                (20, SplitSource::Fallback, 2)
            );
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn punctuation_heavy_segment_is_merged() {
    let mut text = format!(
        "Alpha {}. Beta {}.",
        "alpha ".repeat(58) + "alpha",
        "beta ".repeat(58) + "beta"
    );
    text.push_str(" Table 1: 12, 13, 14, 15; 16, 17, 18, 19; 20, 21, 22, 23.");
    let d = Document::new("p", text, None).unwrap();
    let idx = d.sentences();
    assert_eq!(idx.count(), 3);
    let cfg = SegmenterConfig {
        min_segment_words: 5,
        ..SegmenterConfig::default()
    };
    let v = validate_segments(
        &idx,
        &Segmentation::new(3, vec![1, 2]).unwrap(),
        &cfg,
        &median_provider(""),
    )
    .unwrap();
    assert_eq!(v.segmentation.boundaries(), &[1]);
    assert!(matches!(
        v.actions[0],
        Action::Merge {
            reason: MergeReason::Punctuation,
            direction: Direction::Left,
            ..
        }
    ));
}

#[test]
fn trace_replays_to_output() {
    let d = doc(&[30; 80]);
    let out = segment_document(
        &d,
        &SegmenterConfig::default(),
        &median_provider("2, 3, 4, 40"),
    )
    .unwrap();
    assert_eq!(out.trace.replay().unwrap(), out.segmentation);
    assert!(!out.trace.actions.is_empty());
}

#[test]
fn runs_are_reproducible() {
    let d = doc(&[25; 400]);
    let a = segment_document(
        &d,
        &SegmenterConfig::default(),
        &median_provider("3, 9, 30"),
    )
    .unwrap();
    let b = segment_document(
        &d,
        &SegmenterConfig::default(),
        &median_provider("3, 9, 30"),
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert!(a.trace.windows.len() > 1);
}

#[test]
fn overhead_shrinks_windows() {
    let d = doc(&[25; 400]);
    let with = segment_document(&d, &SegmenterConfig::default(), &median_provider("")).unwrap();
    let cfg = SegmenterConfig {
        subtract_prompt_overhead: false,
        ..SegmenterConfig::default()
    };
    let without = segment_document(&d, &cfg, &median_provider("")).unwrap();
    assert!(with.trace.windows.len() >= without.trace.windows.len());
    let first = |o: &SegmentationOutput| o.trace.windows[0].sentences.end;
    assert!(first(&with) < first(&without));
}

/// Replies with the local marker before every sentence whose first word
/// is "Shift", so the answer depends only on the window's own sentences.
fn keyword_provider() -> impl ChatProvider {
    FnProvider(|req: &ChatRequest| {
        let t = target_text(req);
        let mut marks = Vec::new();
        for (l, piece) in t.split(" [").enumerate().skip(1) {
            let after = piece.split_once("] ").map_or("", |(_, s)| s);
            if after.starts_with("Shift") {
                marks.push(l.to_string());
            }
        }
        if is_recursive(req) {
            let n = target_sentence_count(t);
            return Ok((n / 2).max(1).to_string());
        }
        Ok(marks.join(", "))
    })
}

fn keyword_text(n: usize, shifts: &[usize]) -> String {
    (1..=n)
        .map(|i| {
            let head = if shifts.contains(&i) { "Shift" } else { "Word" };
            format!("{head}{i} {}.", vec!["w"; 24].join(" "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn window_locality() {
    let shifts: Vec<usize> = (3..1200).step_by(7).collect();
    let base = keyword_text(600, &shifts);
    let longer = keyword_text(1200, &shifts);
    let cfg = SegmenterConfig::default();
    let a = Pipeline::new(&cfg, &keyword_provider())
        .run(&split_sentences(&base).unwrap())
        .unwrap();
    let b = Pipeline::new(&cfg, &keyword_provider())
        .run(&split_sentences(&longer).unwrap())
        .unwrap();
    assert!(a.trace.windows.len() >= 3);
    // zone of the first window is untouched by text beyond the second window
    let idx = split_sentences(&base).unwrap();
    let plan = crate::windowing::plan_windows_from_tokens(
        &enumerated_token_ends(&idx, &ByteHeuristic),
        &cfg.planning_window(&ByteHeuristic).unwrap(),
    )
    .unwrap();
    let zone = plan.windows[0].accept;
    let inside = |o: &SegmentationOutput| -> Vec<usize> {
        o.trace
            .merged
            .iter()
            .copied()
            .filter(|&bd| bd < idx.count() && zone.contains(plan.boundary_position(bd)))
            .collect()
    };
    assert!(!inside(&a).is_empty());
    assert_eq!(inside(&a), inside(&b));
    let expected: Vec<usize> = shifts
        .iter()
        .map(|s| s - 1)
        .filter(|&bd| bd < idx.count() && zone.contains(plan.boundary_position(bd)))
        .collect();
    assert_eq!(inside(&a), expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn text_is_never_edited(
        lengths in prop::collection::vec(1usize..60, 1..120),
        reply in prop::sample::select(vec!["", "1", "2, 4, 8", "none", "garbage", "1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33, 34, 35, 36, 37, 38, 39, 40, 41, 42, 43, 44, 45, 46, 47, 48, 49, 50, 51, 52, 53, 54, 55, 56, 57, 58, 59, 60, 61, 62, 63, 64, 65, 66, 67, 68, 69, 70, 71, 72, 73, 74, 75, 76, 77, 78, 79, 80, 81, 82, 83, 84, 85, 86, 87, 88, 89, 90, 91, 92, 93, 94, 95, 96, 97, 98, 99, 100, 101, 102, 103, 104, 105, 106, 107, 108, 109, 110, 111, 112, 113, 114, 115, 116, 117, 118, 119, 120, 121, 122, 123, 124, 125", "[3]\n[3]\n[999]"]),
    ) {
        let d = doc(&lengths);
        let out = segment_document(&d, &SegmenterConfig::default(), &median_provider(reply)).unwrap();
        prop_assert_eq!(reconstruct(&d, &out.segmentation), d.text.clone());
        prop_assert_eq!(out.trace.replay().unwrap(), out.segmentation.clone());
        let idx = d.sentences();
        for s in crate::text::segment_stats(&idx, &out.segmentation).unwrap() {
            let ok = (50..=500).contains(&s.word_count) && s.non_alpha_ratio <= 0.2;
            prop_assert!(ok || out.flags.iter().any(|f| f.range == s.range), "{:?}", s);
        }
    }
}
