use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CacheState, EvictionPolicy};
use crate::model::PageId;

/// Randomized marking.
///
/// Every requested page is marked. A miss on a full cache evicts a uniformly
/// random unmarked resident; when none is left, all residents are unmarked
/// first, which starts a new phase.
///
/// Randomness comes from ChaCha8 seeded with `seed` on stream `stream`, and
/// draws are made as `u32` so the sequence is identical on every platform.
#[derive(Debug, Clone)]
pub struct Marking {
    seed: u64,
    rng: ChaCha8Rng,
    marked: BTreeSet<PageId>,
    unmarked: Vec<PageId>,
    slot_of: HashMap<PageId, usize>,
}

impl Marking {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent instance sharing a base seed, e.g. one per sub-cache.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            rng,
            marked: BTreeSet::new(),
            unmarked: Vec::new(),
            slot_of: HashMap::new(),
        }
    }

    fn take_unmarked(&mut self, idx: usize) -> PageId {
        let page = self.unmarked.swap_remove(idx);
        self.slot_of.remove(&page);
        if let Some(&moved) = self.unmarked.get(idx) {
            self.slot_of.insert(moved, idx);
        }
        page
    }

    pub fn is_marked(&self, page: PageId) -> bool {
        self.marked.contains(&page)
    }
}

impl EvictionPolicy for Marking {
    fn name(&self) -> String {
        "marking".into()
    }

    fn on_hit(&mut self, page: PageId, _t: u64) {
        if let Some(&idx) = self.slot_of.get(&page) {
            self.take_unmarked(idx);
            self.marked.insert(page);
        }
    }

    fn on_miss(&mut self, page: PageId, _t: u64) {
        self.marked.insert(page);
    }

    fn choose_victim(&mut self, _state: &CacheState, _incoming: PageId, _t: u64) -> PageId {
        if self.unmarked.is_empty() {
            for page in std::mem::take(&mut self.marked) {
                self.slot_of.insert(page, self.unmarked.len());
                self.unmarked.push(page);
            }
        }
        assert!(!self.unmarked.is_empty(), "victim requested from an empty cache");
        let idx = self.rng.gen_range(0..self.unmarked.len() as u32) as usize;
        self.take_unmarked(idx)
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}
