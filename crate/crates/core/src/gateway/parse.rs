//! Parsing of model replies into boundary indices.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no indices found in reply {raw:?}")]
    NoIndicesFound { raw: String },
    #[error("reply is not a plain list of integers: {raw:?}")]
    NotAList { raw: String },
    #[error("no index within 1..={max_index} in reply {raw:?}")]
    NoValidIndex { raw: String, max_index: usize },
}

/// Thresholds for recognising a reply that has degenerated into a regular
/// sequence running past the last sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunawayConfig {
    pub min_run: usize,
    pub max_step: u64,
}

impl Default for RunawayConfig {
    fn default() -> Self {
        Self {
            min_run: 5,
            max_step: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexListResult {
    pub indices: Vec<usize>,
    pub dropped_out_of_range: usize,
    pub dropped_duplicates: usize,
    pub runaway_detected: bool,
    pub raw: String,
}

fn integer_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+").unwrap())
}

fn strict_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\[?\s*(\d+\s*(,\s*\d+\s*)*)?\]?\.?$").unwrap())
}

/// All decimal integers in order of appearance. Values too large for `u64`
/// saturate.
pub fn extract_integers(raw: &str) -> Vec<u64> {
    integer_re()
        .find_iter(raw)
        .map(|m| m.as_str().parse().unwrap_or(u64::MAX))
        .collect()
}

fn is_explicit_empty(raw: &str) -> bool {
    let core = raw
        .trim()
        .trim_matches(|c: char| {
            matches!(c, '[' | ']' | '\'' | '"' | '.' | '`') || c.is_whitespace()
        })
        .to_lowercase();
    core.is_empty() || core == "none"
}

/// Permissive parse with the default runaway thresholds.
pub fn parse_index_list(raw: &str, max_index: usize) -> Result<IndexListResult, ParseError> {
    parse_index_list_with(raw, max_index, &RunawayConfig::default(), false)
}

/// Extracts boundary indices from a reply. Out-of-range values and repeats
/// are dropped and counted. In strict mode anything but a bare
/// comma-separated list is rejected.
pub fn parse_index_list_with(
    raw: &str,
    max_index: usize,
    runaway: &RunawayConfig,
    strict: bool,
) -> Result<IndexListResult, ParseError> {
    assert!(max_index >= 1, "max_index must be at least 1");
    if strict && !is_explicit_empty(raw) && !strict_re().is_match(raw.trim()) {
        return Err(ParseError::NotAList { raw: raw.into() });
    }
    let values = extract_integers(raw);
    if values.is_empty() && !is_explicit_empty(raw) {
        return Err(ParseError::NoIndicesFound { raw: raw.into() });
    }

    let mut indices = Vec::with_capacity(values.len());
    let (mut out_of_range, mut duplicates) = (0, 0);
    for &v in &values {
        if v == 0 || v > max_index as u64 {
            out_of_range += 1;
        } else if indices.contains(&(v as usize)) {
            duplicates += 1;
        } else {
            indices.push(v as usize);
        }
    }
    indices.sort_unstable();
    Ok(IndexListResult {
        indices,
        dropped_out_of_range: out_of_range,
        dropped_duplicates: duplicates,
        runaway_detected: detect_runaway(&values, max_index, runaway),
        raw: raw.into(),
    })
}

/// True when the reply overruns `max_index` and ends in an arithmetic run of
/// at least `min_run` values with a step between 1 and `max_step`.
pub fn detect_runaway(sequence: &[u64], max_index: usize, cfg: &RunawayConfig) -> bool {
    if !sequence.iter().any(|&v| v > max_index as u64) || sequence.len() < 2 {
        return false;
    }
    let n = sequence.len();
    let step = sequence[n - 1] as i128 - sequence[n - 2] as i128;
    if step < 1 || step > cfg.max_step as i128 {
        return false;
    }
    let mut run = 2;
    while run < n && sequence[n - run] as i128 - sequence[n - run - 1] as i128 == step {
        run += 1;
    }
    run >= cfg.min_run
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleIndex {
    pub index: usize,
    /// Other integers present in the reply besides the chosen one.
    pub ignored: usize,
}

/// First integer in `1..=max_index`.
pub fn parse_single_index(raw: &str, max_index: usize) -> Result<SingleIndex, ParseError> {
    let values = extract_integers(raw);
    let pos = values
        .iter()
        .position(|&v| v >= 1 && v <= max_index as u64)
        .ok_or_else(|| ParseError::NoValidIndex {
            raw: raw.into(),
            max_index,
        })?;
    Ok(SingleIndex {
        index: values[pos] as usize,
        ignored: values.len() - 1,
    })
}

/// Canonical `"a, b, c"` rendering.
pub fn render_index_list(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counting_runaway() -> Vec<u64> {
        let mut v = vec![1, 15, 22];
        v.extend((25..=121).step_by(3));
        v
    }

    #[test]
    fn plain_list() {
        let r = parse_index_list("7, 13", 16).unwrap();
        assert_eq!(r.indices, vec![7, 13]);
        assert_eq!((r.dropped_out_of_range, r.dropped_duplicates), (0, 0));
        assert!(!r.runaway_detected);
    }

    #[test]
    fn empty_answers() {
        for raw in ["", "  ", "none", "None.", "[]", "'none'"] {
            let r = parse_index_list(raw, 10).unwrap();
            assert!(r.indices.is_empty(), "{raw:?}");
        }
        assert!(matches!(
            parse_index_list("I cannot find boundaries", 10),
            Err(ParseError::NoIndicesFound { .. })
        ));
    }

    #[test]
    fn normalisation_counts() {
        let r = parse_index_list("3, 3, 1, 99", 10).unwrap();
        assert_eq!(r.indices, vec![1, 3]);
        assert_eq!(r.dropped_out_of_range, 1);
        assert_eq!(r.dropped_duplicates, 1);
    }

    #[test]
    fn tolerant_of_decoration() {
        let r = parse_index_list("Segments: [4,\n 9]\nThese are my answers.", 10).unwrap();
        assert_eq!(r.indices, vec![4, 9]);
        let r = parse_index_list("0, 5, 123456789012345678901234567890", 10).unwrap();
        assert_eq!(r.indices, vec![5]);
        assert_eq!(r.dropped_out_of_range, 2);
    }

    #[test]
    fn strict_mode() {
        let cfg = RunawayConfig::default();
        assert!(parse_index_list_with("1, 3, 5", 9, &cfg, true).is_ok());
        assert!(parse_index_list_with("[1,3]", 9, &cfg, true).is_ok());
        assert!(parse_index_list_with("", 9, &cfg, true).is_ok());
        assert!(matches!(
            parse_index_list_with("maybe 1 and 3", 9, &cfg, true),
            Err(ParseError::NotAList { .. })
        ));
    }

    #[test]
    fn runaway_on_reported_pattern() {
        let seq = counting_runaway();
        assert!(detect_runaway(&seq, 59, &RunawayConfig::default()));
        let raw = render_index_list(&seq.iter().map(|&v| v as usize).collect::<Vec<_>>());
        let r = parse_index_list(&raw, 59).unwrap();
        assert!(r.runaway_detected);
        assert!(r.indices.iter().all(|&i| i <= 59));
    }

    #[test]
    fn runaway_needs_overrun_and_regularity() {
        let cfg = RunawayConfig::default();
        assert!(!detect_runaway(&[7, 13], 16, &cfg));
        assert!(!detect_runaway(&[2, 4, 6, 8, 10], 40, &cfg));
        // overrun but irregular tail
        assert!(!detect_runaway(&[3, 9, 50, 51, 70], 40, &cfg));
        // step too large
        assert!(!detect_runaway(&[10, 20, 30, 40, 50], 40, &cfg));
        // run too short
        assert!(!detect_runaway(&[39, 41, 43, 45], 40, &cfg));
        assert!(detect_runaway(&[37, 39, 41, 43, 45], 40, &cfg));
    }

    #[test]
    fn single_index() {
        assert_eq!(parse_single_index("3", 8).unwrap().index, 3);
        assert_eq!(parse_single_index("5", 10).unwrap().index, 5);
        let r = parse_single_index("0 then maybe 4", 8).unwrap();
        assert_eq!(
            r,
            SingleIndex {
                index: 4,
                ignored: 1
            }
        );
        assert!(matches!(
            parse_single_index("12", 8),
            Err(ParseError::NoValidIndex { .. })
        ));
        assert!(matches!(
            parse_single_index("no idea", 8),
            Err(ParseError::NoValidIndex { .. })
        ));
    }

    proptest! {
        #[test]
        fn output_is_valid_boundary_set(raw in "[0-9, \\[\\]a-z\n]{0,60}", max in 1usize..50) {
            if let Ok(r) = parse_index_list(&raw, max) {
                prop_assert!(r.indices.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(r.indices.iter().all(|&i| (1..=max).contains(&i)));
                prop_assert!(crate::text::Segmentation::new(max + 1, r.indices.clone()).is_ok());
            }
        }

        #[test]
        fn canonical_rendering_round_trips(set in prop::collection::btree_set(1usize..100, 0..20)) {
            let indices: Vec<usize> = set.into_iter().collect();
            let r = parse_index_list(&render_index_list(&indices), 100).unwrap();
            prop_assert_eq!(&r.indices, &indices);
            let again = parse_index_list(&render_index_list(&r.indices), 100).unwrap();
            prop_assert_eq!(again, IndexListResult { raw: render_index_list(&indices), ..r });
        }
    }
}
