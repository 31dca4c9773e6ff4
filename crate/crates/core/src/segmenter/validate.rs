//! Length and artefact validation: split long segments, merge short ones.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::prompt::build_recursive_prompt_with;
use super::trace::{Action, Direction, MergeReason, SplitSource};
use super::{Pipeline, SegmenterError};
use crate::baselines::cosine;
use crate::gateway::parse_single_index;
use crate::text::{render_enumerated, word_count, Segmentation, SentenceIndex, SentenceRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OversizeReason {
    RecursionExhausted,
    SingleSentence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlagKind {
    Oversized {
        reason: OversizeReason,
    },
    /// Short, but every merge would exceed the maximum.
    Undersized,
    /// Too much punctuation, and no merge fits.
    Artefact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentFlag {
    pub range: SentenceRange,
    pub words: usize,
    #[serde(flatten)]
    pub kind: FlagKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub segmentation: Segmentation,
    pub actions: Vec<Action>,
    pub flags: Vec<SegmentFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbour {
    pub range: SentenceRange,
    pub words: usize,
}

/// Which neighbour a short segment joins. With sentence embeddings the
/// neighbour whose adjacent sentence is more similar wins; without, the
/// smaller neighbour. Ties go left. `None` when there is no neighbour.
pub fn merge_target(
    short: SentenceRange,
    left: Option<Neighbour>,
    right: Option<Neighbour>,
    embeddings: Option<&[Vec<f32>]>,
) -> Option<Direction> {
    match (left, right) {
        (None, None) => None,
        (Some(_), None) => Some(Direction::Left),
        (None, Some(_)) => Some(Direction::Right),
        (Some(l), Some(r)) => {
            let right_wins = match embeddings {
                Some(e) => {
                    let cl = cosine(&e[short.start - 1], &e[l.range.end - 1]);
                    let cr = cosine(&e[short.end - 1], &e[r.range.start - 1]);
                    cr > cl
                }
                None => r.words < l.words,
            };
            Some(if right_wins {
                Direction::Right
            } else {
                Direction::Left
            })
        }
    }
}

/// Per-sentence prefix sums for word and character counts.
struct Counts {
    words: Vec<usize>,
    visible: Vec<usize>,
    non_alpha: Vec<usize>,
}

impl Counts {
    fn new(index: &SentenceIndex) -> Self {
        let mut c = Counts {
            words: vec![0],
            visible: vec![0],
            non_alpha: vec![0],
        };
        for s in index.sentences() {
            let vis = s.chars().filter(|c| !c.is_whitespace());
            let (mut v, mut n) = (0, 0);
            for ch in vis {
                v += 1;
                if !ch.is_ascii_alphabetic() {
                    n += 1;
                }
            }
            c.words.push(c.words.last().unwrap() + word_count(s));
            c.visible.push(c.visible.last().unwrap() + v);
            c.non_alpha.push(c.non_alpha.last().unwrap() + n);
        }
        c
    }

    fn words(&self, r: SentenceRange) -> usize {
        self.words[r.end] - self.words[r.start - 1]
    }

    fn ratio(&self, r: SentenceRange) -> f64 {
        let v = self.visible[r.end] - self.visible[r.start - 1];
        if v == 0 {
            0.0
        } else {
            (self.non_alpha[r.end] - self.non_alpha[r.start - 1]) as f64 / v as f64
        }
    }
}

fn ranges_of(num_sentences: usize, bounds: &BTreeSet<usize>) -> Vec<SentenceRange> {
    let mut out = Vec::with_capacity(bounds.len() + 1);
    let mut start = 1;
    for &b in bounds {
        out.push(SentenceRange::new(start, b));
        start = b + 1;
    }
    out.push(SentenceRange::new(start, num_sentences));
    out
}

struct State {
    bounds: BTreeSet<usize>,
    actions: Vec<Action>,
    oversize: HashMap<SentenceRange, OversizeReason>,
}

impl Pipeline<'_> {
    /// Splits over-long segments, then merges short or punctuation-heavy
    /// ones, until nothing changes. Segments that cannot be fixed are kept
    /// and flagged.
    pub fn validate(
        &self,
        index: &SentenceIndex,
        seg: &Segmentation,
    ) -> Result<Validation, SegmenterError> {
        index.check_segmentation(seg)?;
        let counts = Counts::new(index);
        let mut st = State {
            bounds: seg.boundaries().iter().copied().collect(),
            actions: Vec::new(),
            oversize: HashMap::new(),
        };
        loop {
            let before = st.actions.len();
            for r in ranges_of(index.count(), &st.bounds) {
                if counts.words(r) > self.cfg.max_segment_words && !st.oversize.contains_key(&r) {
                    self.split(index, &counts, r, 1, &mut st)?;
                }
            }
            self.merge_pass(index.count(), &counts, &mut st);
            if st.actions.len() == before {
                break;
            }
        }

        let ranges = ranges_of(index.count(), &st.bounds);
        let mut flags = Vec::new();
        for &r in &ranges {
            let words = counts.words(r);
            let mut flag = |kind| {
                flags.push(SegmentFlag {
                    range: r,
                    words,
                    kind,
                })
            };
            if words > self.cfg.max_segment_words {
                let reason = st
                    .oversize
                    .get(&r)
                    .copied()
                    .unwrap_or(OversizeReason::RecursionExhausted);
                flag(FlagKind::Oversized { reason });
            }
            if words < self.cfg.min_segment_words {
                flag(FlagKind::Undersized);
            }
            if counts.ratio(r) > self.cfg.punctuation_ratio_limit {
                flag(FlagKind::Artefact);
            }
        }
        Ok(Validation {
            segmentation: Segmentation::new(index.count(), st.bounds.into_iter().collect())?,
            actions: st.actions,
            flags,
        })
    }

    fn split(
        &self,
        index: &SentenceIndex,
        counts: &Counts,
        r: SentenceRange,
        depth: usize,
        st: &mut State,
    ) -> Result<(), SegmenterError> {
        if counts.words(r) <= self.cfg.max_segment_words {
            return Ok(());
        }
        if r.len() == 1 {
            st.oversize.insert(r, OversizeReason::SingleSentence);
            return Ok(());
        }
        if depth > self.cfg.max_recursion_depth {
            st.oversize.insert(r, OversizeReason::RecursionExhausted);
            return Ok(());
        }
        let (at, source, replies) = self.choose_split(index, r)?;
        st.bounds.insert(at);
        st.actions.push(Action::Split {
            range: r,
            at,
            depth,
            source,
            replies,
        });
        self.split(
            index,
            counts,
            SentenceRange::new(r.start, at),
            depth + 1,
            st,
        )?;
        self.split(
            index,
            counts,
            SentenceRange::new(at + 1, r.end),
            depth + 1,
            st,
        )
    }

    fn choose_split(
        &self,
        index: &SentenceIndex,
        r: SentenceRange,
    ) -> Result<(usize, SplitSource, Vec<String>), SegmenterError> {
        let en = render_enumerated(index, r)?;
        let local_max = r.len() - 1;
        if self.estimator.estimate(&en.text) > self.cfg.window.window_budget {
            let ends: Vec<usize> = (r.start..=r.end)
                .scan(0, |acc, i| {
                    *acc += self.estimator.estimate(index.sentence(i));
                    Some(*acc)
                })
                .collect();
            let half = ends[ends.len() - 1] / 2;
            let local = ends.iter().position(|&e| e >= half).unwrap_or(0) + 1;
            return Ok((
                r.start + local.min(local_max) - 1,
                SplitSource::Oversize,
                Vec::new(),
            ));
        }
        let req = build_recursive_prompt_with(&en, self.cfg, self.estimator)?;
        let mut replies = Vec::new();
        for _ in 0..2 {
            let reply = self.provider.complete(&req)?;
            let parsed = parse_single_index(&reply, local_max);
            replies.push(reply);
            if let Ok(single) = parsed {
                return Ok((r.start + single.index - 1, SplitSource::Model, replies));
            }
        }
        let local = (r.len() / 2).max(1);
        Ok((r.start + local - 1, SplitSource::Fallback, replies))
    }

    fn merge_pass(&self, num_sentences: usize, counts: &Counts, st: &mut State) {
        let cfg = self.cfg;
        let mut ranges = ranges_of(num_sentences, &st.bounds);
        let mut i = 0;
        while i < ranges.len() && ranges.len() > 1 {
            let r = ranges[i];
            let reason = if counts.words(r) < cfg.min_segment_words {
                MergeReason::Short
            } else if counts.ratio(r) > cfg.punctuation_ratio_limit {
                MergeReason::Punctuation
            } else {
                i += 1;
                continue;
            };
            let neighbour = |j: usize| Neighbour {
                range: ranges[j],
                words: counts.words(ranges[j]),
            };
            let left = (i > 0).then(|| neighbour(i - 1));
            let right = (i + 1 < ranges.len()).then(|| neighbour(i + 1));
            let preferred =
                merge_target(r, left, right, self.embeddings).expect("at least two segments");
            let fits = |d: Direction| {
                let n = match d {
                    Direction::Left => left,
                    Direction::Right => right,
                };
                n.is_some_and(|n| n.words + counts.words(r) <= cfg.max_segment_words)
            };
            let Some(direction) = [preferred, preferred.other()]
                .into_iter()
                .find(|&d| fits(d))
            else {
                i += 1;
                continue;
            };
            let lo = match direction {
                Direction::Left => i - 1,
                Direction::Right => i,
            };
            let removed = ranges[lo].end;
            ranges[lo] = SentenceRange::new(ranges[lo].start, ranges[lo + 1].end);
            ranges.remove(lo + 1);
            st.bounds.remove(&removed);
            st.actions.push(Action::Merge {
                segment: r,
                removed,
                direction,
                reason,
            });
            i = lo;
        }
    }
}
