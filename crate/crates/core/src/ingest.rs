//! Recorded MoE expert-usage traces.
//!
//! Real MoE layers route each token to `e` experts per layer, while the
//! layered paging model serves one expert per layer per round. Round
//! expansion turns one token into `e` consecutive rounds, the r-th of which
//! requests every layer's r-th selected expert.
//!
//! # JSONL format
//!
//! The first non-blank line is a header object, each following line one
//! token:
//!
//! ```text
//! {"n": 8, "l": 32, "e": 2, "model": "mixtral"}
//! {"token": 0, "layers": [[3, 7], [1, 2], ...]}
//! ```
//!
//! `layers` holds exactly `l` lists of exactly `e` distinct expert indices
//! in `1..=n`, in selection order. `model` is optional.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LayeredTrace, ModelShape, PageId};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("input has no header line")]
    MissingHeader,
}

fn at(line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Line {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    n: u32,
    l: u32,
    e: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenRecord {
    token: u64,
    layers: Vec<Vec<u32>>,
}

/// Multi-expert-per-layer token trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawMoeTrace {
    pub shape: ModelShape,
    /// Experts selected per layer for each token (e).
    pub experts_per_layer: u32,
    pub model: Option<String>,
    /// `tokens[t][j]` lists the experts token `t` used in layer `j + 1`.
    pub tokens: Vec<Vec<Vec<u32>>>,
}

impl RawMoeTrace {
    fn check_token(&self, layers: &[Vec<u32>]) -> Result<(), String> {
        if layers.len() != self.shape.layers() as usize {
            return Err(format!(
                "expected {} layer entries, found {}",
                self.shape.layers(),
                layers.len()
            ));
        }
        for (j, experts) in layers.iter().enumerate() {
            if experts.len() != self.experts_per_layer as usize {
                return Err(format!(
                    "layer {} lists {} experts, expected {}",
                    j + 1,
                    experts.len(),
                    self.experts_per_layer
                ));
            }
            for (i, &e) in experts.iter().enumerate() {
                if !(1..=self.shape.experts()).contains(&e) {
                    return Err(format!(
                        "layer {}: expert {e} outside 1..={}",
                        j + 1,
                        self.shape.experts()
                    ));
                }
                if experts[..i].contains(&e) {
                    return Err(format!("layer {}: expert {e} listed twice", j + 1));
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates the JSONL format, streaming line by line.
pub fn parse_moe_trace<R: BufRead>(reader: R) -> Result<RawMoeTrace, IngestError> {
    let mut raw: Option<RawMoeTrace> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match raw.as_mut() {
            None => {
                let h: Header = serde_json::from_str(&line)
                    .map_err(|e| at(line_no, format!("bad header: {e}")))?;
                let shape =
                    ModelShape::new(h.n, h.l).map_err(|e| at(line_no, e.to_string()))?;
                if h.e == 0 || h.e > h.n {
                    return Err(at(line_no, format!("e must be in 1..={} (got {})", h.n, h.e)));
                }
                raw = Some(RawMoeTrace {
                    shape,
                    experts_per_layer: h.e,
                    model: h.model,
                    tokens: Vec::new(),
                });
            }
            Some(raw) => {
                let rec: TokenRecord = serde_json::from_str(&line)
                    .map_err(|e| at(line_no, format!("bad token record: {e}")))?;
                raw.check_token(&rec.layers).map_err(|m| at(line_no, m))?;
                raw.tokens.push(rec.layers);
            }
        }
    }
    raw.ok_or(IngestError::MissingHeader)
}

/// Writes `raw` in the JSONL format; tokens are numbered from 0.
pub fn write_moe_trace<W: Write>(mut writer: W, raw: &RawMoeTrace) -> io::Result<()> {
    let header = Header {
        n: raw.shape.experts(),
        l: raw.shape.layers(),
        e: raw.experts_per_layer,
        model: raw.model.clone(),
    };
    serde_json::to_writer(&mut writer, &header)?;
    writeln!(writer)?;
    for (i, layers) in raw.tokens.iter().enumerate() {
        let rec = TokenRecord {
            token: i as u64,
            layers: layers.clone(),
        };
        serde_json::to_writer(&mut writer, &rec)?;
        writeln!(writer)?;
    }
    writer.flush()
}

/// One round per selection rank per token; length is `tokens · e · ℓ`.
pub fn round_expand(raw: &RawMoeTrace) -> LayeredTrace {
    let l = raw.shape.layers() as usize;
    let e = raw.experts_per_layer as usize;
    let mut requests = Vec::with_capacity(raw.tokens.len() * e * l);
    for token in &raw.tokens {
        for rank in 0..e {
            for (j, experts) in token.iter().enumerate() {
                requests.push(PageId::new(j as u32 + 1, experts[rank]));
            }
        }
    }
    LayeredTrace::new(raw.shape, requests).expect("validated tokens expand to whole rounds")
}

/// Summary of a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStats {
    pub length: u64,
    pub rounds: u64,
    pub distinct_pages: u64,
    /// `layer_histogram[j][e]` counts requests of expert `e + 1` in layer `j + 1`.
    pub layer_histogram: Vec<Vec<u64>>,
    /// Count of re-references by distance, where the distance is the number
    /// of requests strictly between two successive uses of a page.
    pub reuse_distances: BTreeMap<u64, u64>,
}

pub fn trace_stats(trace: &LayeredTrace) -> TraceStats {
    let shape = trace.shape();
    let mut layer_histogram = vec![vec![0u64; shape.experts() as usize]; shape.layers() as usize];
    let mut last_seen: Vec<Option<u64>> = vec![None; shape.page_count() as usize];
    let mut reuse_distances = BTreeMap::new();
    let mut distinct = 0;
    for (i, &p) in trace.requests().iter().enumerate() {
        let i = i as u64;
        layer_histogram[(p.layer - 1) as usize][(p.expert - 1) as usize] += 1;
        let slot = &mut last_seen[shape.page_index(p)];
        match slot.replace(i) {
            Some(prev) => *reuse_distances.entry(i - prev - 1).or_insert(0) += 1,
            None => distinct += 1,
        }
    }
    TraceStats {
        length: trace.len() as u64,
        rounds: trace.rounds(),
        distinct_pages: distinct,
        layer_histogram,
        reuse_distances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_lru_nemesis;
    use crate::model::fixtures::three_token_example;
    use crate::model::CacheSize;
    use proptest::prelude::*;

    fn minimal_file() -> String {
        let layers: Vec<Vec<u32>> = (0..32).map(|j| vec![j % 8 + 1, (j + 1) % 8 + 1]).collect();
        format!(
            "{{\"n\":8,\"l\":32,\"e\":2,\"model\":\"mixtral\"}}\n{}\n",
            serde_json::json!({"token": 0, "layers": layers})
        )
    }

    #[test]
    fn parses_minimal_file() {
        let raw = parse_moe_trace(minimal_file().as_bytes()).unwrap();
        assert_eq!(raw.tokens.len(), 1);
        assert_eq!(raw.shape, ModelShape::new(8, 32).unwrap());
        assert_eq!(raw.experts_per_layer, 2);
        assert_eq!(raw.model.as_deref(), Some("mixtral"));
    }

    #[test]
    fn arity_and_range_errors_name_the_line() {
        let text = "{\"n\":8,\"l\":2,\"e\":2}\n{\"token\":0,\"layers\":[[1,2],[3,4]]}\n{\"token\":1,\"layers\":[[1,2,3],[3,4]]}\n";
        match parse_moe_trace(text.as_bytes()) {
            Err(IngestError::Line { line: 3, message }) => assert!(message.contains("3 experts")),
            other => panic!("{other:?}"),
        }
        let text = "{\"n\":8,\"l\":2,\"e\":2}\n{\"token\":0,\"layers\":[[1,9],[3,4]]}\n";
        assert!(matches!(
            parse_moe_trace(text.as_bytes()),
            Err(IngestError::Line { line: 2, .. })
        ));
        let text = "{\"n\":8,\"l\":2,\"e\":2}\n{\"token\":0,\"layers\":[[1,2]]}\n";
        assert!(matches!(
            parse_moe_trace(text.as_bytes()),
            Err(IngestError::Line { line: 2, .. })
        ));
        let text = "{\"n\":8,\"l\":2,\"e\":2}\n{\"token\":0,\"layers\":[[4,4],[1,2]]}\n";
        assert!(parse_moe_trace(text.as_bytes()).is_err());
        let text = "{\"n\":8,\"l\":2,\"e\":2}\nnot json\n";
        assert!(matches!(
            parse_moe_trace(text.as_bytes()),
            Err(IngestError::Line { line: 2, .. })
        ));
        assert!(matches!(parse_moe_trace("".as_bytes()), Err(IngestError::MissingHeader)));
        assert!(parse_moe_trace("{\"n\":2,\"l\":2,\"e\":3}\n".as_bytes()).is_err());
    }

    #[test]
    fn expansion_splits_ranks_into_rounds() {
        let raw = parse_moe_trace(minimal_file().as_bytes()).unwrap();
        let t = round_expand(&raw);
        assert_eq!(t.len(), 64);
        let first: Vec<_> = t.requests()[..32].iter().map(|p| p.expert).collect();
        let second: Vec<_> = t.requests()[32..].iter().map(|p| p.expert).collect();
        assert_eq!(first, (0..32).map(|j| j % 8 + 1).collect::<Vec<_>>());
        assert_eq!(second, (0..32).map(|j| (j + 1) % 8 + 1).collect::<Vec<_>>());
    }

    #[test]
    fn single_expert_expansion_is_identity() {
        let raw = RawMoeTrace {
            shape: ModelShape::new(3, 2).unwrap(),
            experts_per_layer: 1,
            model: None,
            tokens: vec![vec![vec![3], vec![1]]],
        };
        let t = round_expand(&raw);
        assert_eq!(t.requests(), &[PageId::new(1, 3), PageId::new(2, 1)]);
    }

    #[test]
    fn stats_examples() {
        let s = trace_stats(&three_token_example());
        assert_eq!((s.length, s.rounds, s.distinct_pages), (12, 3, 10));
        // E_2^(3) reused after 3 requests in between; E_2^(1) after 3
        assert_eq!(s.reuse_distances.get(&3), Some(&2));
        assert_eq!(s.reuse_distances.len(), 1);
        assert_eq!(s.layer_histogram[2], vec![0, 2, 0, 1]);

        let empty = trace_stats(&LayeredTrace::empty(ModelShape::new(2, 2).unwrap()));
        assert_eq!((empty.length, empty.rounds, empty.distinct_pages), (0, 0, 0));
        assert!(empty.reuse_distances.is_empty());
        assert!(empty.layer_histogram.iter().flatten().all(|&c| c == 0));

        let nemesis = gen_lru_nemesis(CacheSize::new(5).unwrap(), 2).unwrap();
        let s = trace_stats(&nemesis.trace(9));
        assert_eq!(s.distinct_pages, 6);
    }

    fn raw_strategy() -> impl Strategy<Value = RawMoeTrace> {
        (2u32..6, 1u32..5, 0usize..6).prop_flat_map(|(n, l, tokens)| {
            (1u32..=n).prop_flat_map(move |e| {
                let layer = proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), e as usize)
                    .prop_shuffle();
                let token = proptest::collection::vec(layer, l as usize);
                proptest::collection::vec(token, tokens).prop_map(move |tokens| RawMoeTrace {
                    shape: ModelShape::new(n, l).unwrap(),
                    experts_per_layer: e,
                    model: Some("synthetic".into()),
                    tokens,
                })
            })
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(raw in raw_strategy()) {
            let mut buf = Vec::new();
            write_moe_trace(&mut buf, &raw).unwrap();
            prop_assert_eq!(parse_moe_trace(&buf[..]).unwrap(), raw);
        }

        #[test]
        fn expansion_preserves_each_tokens_requests(raw in raw_strategy()) {
            let t = round_expand(&raw);
            let l = raw.shape.layers() as usize;
            let e = raw.experts_per_layer as usize;
            prop_assert_eq!(t.len(), raw.tokens.len() * e * l);
            prop_assert!(t.validate().is_ok());
            for (i, token) in raw.tokens.iter().enumerate() {
                let mut expected: Vec<PageId> = token
                    .iter()
                    .enumerate()
                    .flat_map(|(j, xs)| xs.iter().map(move |&x| PageId::new(j as u32 + 1, x)))
                    .collect();
                let mut got = t.requests()[i * e * l..(i + 1) * e * l].to_vec();
                expected.sort();
                got.sort();
                prop_assert_eq!(got, expected);
            }
        }
    }
}
