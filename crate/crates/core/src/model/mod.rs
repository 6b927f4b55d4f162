//! Core domain types for layered paging.
//!
//! Pages are partitioned into ℓ layers of n experts each. A request
//! sequence must visit the layers cyclically: position `i` (1-indexed)
//! requests a page of layer `((i - 1) mod ℓ) + 1`. A *round* is one block
//! of ℓ consecutive requests covering layers `1..=ℓ` in order.
//!
//! Positions, layers and experts are all 1-indexed.

mod format;

pub use format::{read_trace, write_trace, TraceFileError};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model shape needs at least one expert and one layer (got n={experts}, l={layers})")]
    InvalidShape { experts: u32, layers: u32 },
    #[error("cache size must be at least 1")]
    ZeroCacheSize,
    #[error("invalid trace: {0}")]
    InvalidTrace(Violation),
}

/// Number of experts per layer (n) and number of layers (ℓ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelShape {
    experts: u32,
    layers: u32,
}

impl ModelShape {
    pub fn new(experts: u32, layers: u32) -> Result<Self, ModelError> {
        if experts == 0 || layers == 0 {
            return Err(ModelError::InvalidShape { experts, layers });
        }
        Ok(Self { experts, layers })
    }

    /// n
    pub fn experts(&self) -> u32 {
        self.experts
    }

    /// ℓ
    pub fn layers(&self) -> u32 {
        self.layers
    }

    /// Total number of distinct pages, n·ℓ.
    pub fn page_count(&self) -> u64 {
        u64::from(self.experts) * u64::from(self.layers)
    }

    pub fn contains(&self, page: PageId) -> bool {
        (1..=self.layers).contains(&page.layer) && (1..=self.experts).contains(&page.expert)
    }

    /// Dense 0-based index of a page, layer-major. Callers must pass a page
    /// inside the shape.
    pub fn page_index(&self, page: PageId) -> usize {
        debug_assert!(self.contains(page));
        ((page.layer - 1) as usize) * self.experts as usize + (page.expert - 1) as usize
    }

    /// Inverse of [`ModelShape::page_index`].
    pub fn page_at(&self, index: usize) -> PageId {
        let n = self.experts as usize;
        PageId::new((index / n) as u32 + 1, (index % n) as u32 + 1)
    }

    /// All pages in canonical order.
    pub fn pages(&self) -> impl Iterator<Item = PageId> + '_ {
        (1..=self.layers).flat_map(move |l| (1..=self.experts).map(move |e| PageId::new(l, e)))
    }
}

/// The weight page of one expert in one layer.
///
/// The derived ordering is layer-major, then expert. It is the canonical
/// tie-breaker wherever a policy's own rule does not discriminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PageId {
    pub layer: u32,
    pub expert: u32,
}

impl PageId {
    pub const fn new(layer: u32, expert: u32) -> Self {
        Self { layer, expert }
    }
}

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}^({})", self.expert, self.layer)
    }
}

/// Cache capacity k, in pages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CacheSize(u32);

impl CacheSize {
    pub fn new(k: u32) -> Result<Self, ModelError> {
        if k == 0 {
            Err(ModelError::ZeroCacheSize)
        } else {
            Ok(Self(k))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_usize(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CacheSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Layer requested at 1-indexed position `i` in a model with `layers` layers.
pub fn layer_of_position(i: u64, layers: u32) -> u32 {
    debug_assert!(i >= 1 && layers >= 1);
    ((i - 1) % u64::from(layers)) as u32 + 1
}

/// 1-indexed round containing position `i`, i.e. ⌈i/ℓ⌉.
pub fn round_of_position(i: u64, layers: u32) -> u64 {
    debug_assert!(i >= 1 && layers >= 1);
    i.div_ceil(u64::from(layers))
}

/// First position at which a request sequence breaks the layered model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    WrongLayer {
        position: u64,
        expected_layer: u32,
        found_layer: u32,
    },
    ExpertOutOfRange {
        position: u64,
        expert: u32,
        experts: u32,
    },
}

impl Violation {
    pub fn position(&self) -> u64 {
        match *self {
            Violation::WrongLayer { position, .. } | Violation::ExpertOutOfRange { position, .. } => {
                position
            }
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::WrongLayer {
                position,
                expected_layer,
                found_layer,
            } => write!(
                f,
                "position {position}: expected layer {expected_layer}, found layer {found_layer}"
            ),
            Violation::ExpertOutOfRange {
                position,
                expert,
                experts,
            } => write!(
                f,
                "position {position}: expert {expert} outside 1..={experts}"
            ),
        }
    }
}

/// Outcome of [`validate_requests`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub length: u64,
    /// Number of requests in a trailing partial round (0 when the sequence
    /// ends on a round boundary).
    pub ragged_tail: u32,
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the layer constraint and expert range of every request, stopping
/// at the first violation.
pub fn validate_requests(shape: ModelShape, requests: &[PageId]) -> ValidationReport {
    let violation = requests.iter().enumerate().find_map(|(idx, page)| {
        let position = idx as u64 + 1;
        let expected_layer = layer_of_position(position, shape.layers());
        if page.layer != expected_layer {
            Some(Violation::WrongLayer {
                position,
                expected_layer,
                found_layer: page.layer,
            })
        } else if !(1..=shape.experts()).contains(&page.expert) {
            Some(Violation::ExpertOutOfRange {
                position,
                expert: page.expert,
                experts: shape.experts(),
            })
        } else {
            None
        }
    });
    ValidationReport {
        length: requests.len() as u64,
        ragged_tail: (requests.len() as u64 % u64::from(shape.layers())) as u32,
        violation,
    }
}

/// A request sequence that satisfies the layered constraint for its shape.
///
/// Construction validates, so every `LayeredTrace` in circulation is valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredTrace {
    shape: ModelShape,
    requests: Vec<PageId>,
}

impl LayeredTrace {
    pub fn new(shape: ModelShape, requests: Vec<PageId>) -> Result<Self, ModelError> {
        match validate_requests(shape, &requests).violation {
            Some(v) => Err(ModelError::InvalidTrace(v)),
            None => Ok(Self { shape, requests }),
        }
    }

    /// Builds a trace from per-round expert indices: `rounds[r][j]` is the
    /// expert requested in layer `j + 1` during round `r + 1`.
    pub fn from_rounds<I, R>(shape: ModelShape, rounds: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[u32]>,
    {
        let mut requests = Vec::new();
        for round in rounds {
            for (j, &expert) in round.as_ref().iter().enumerate() {
                requests.push(PageId::new(j as u32 + 1, expert));
            }
        }
        Self::new(shape, requests)
    }

    pub fn empty(shape: ModelShape) -> Self {
        Self {
            shape,
            requests: Vec::new(),
        }
    }

    pub fn shape(&self) -> ModelShape {
        self.shape
    }

    pub fn requests(&self) -> &[PageId] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Number of rounds, counting a trailing partial round.
    pub fn rounds(&self) -> u64 {
        (self.requests.len() as u64).div_ceil(u64::from(self.shape.layers()))
    }

    pub fn validate(&self) -> ValidationReport {
        validate_requests(self.shape, &self.requests)
    }

    /// Number of distinct pages requested.
    pub fn distinct_pages(&self) -> usize {
        let mut seen = vec![false; self.shape.page_count() as usize];
        let mut count = 0;
        for &p in &self.requests {
            let idx = self.shape.page_index(p);
            if !seen[idx] {
                seen[idx] = true;
                count += 1;
            }
        }
        count
    }

    /// Requests of a single layer, in order.
    pub fn layer_subsequence(&self, layer: u32) -> impl Iterator<Item = PageId> + '_ {
        let l = self.shape.layers() as usize;
        self.requests
            .iter()
            .skip((layer - 1) as usize)
            .step_by(l)
            .copied()
    }

    pub fn into_requests(self) -> Vec<PageId> {
        self.requests
    }
}
