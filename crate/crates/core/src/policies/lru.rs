use std::collections::{BTreeMap, HashMap};

use super::{CacheState, EvictionPolicy};
use crate::model::PageId;

/// The resident page with the smallest last-use time.
///
/// Panics on an empty cache.
pub fn lru_choose_victim(state: &CacheState) -> PageId {
    state
        .residents()
        .min_by_key(|&(_, tau)| tau)
        .map(|(p, _)| p)
        .expect("victim requested from an empty cache")
}

/// Least-recently-used eviction, O(log k) per request.
#[derive(Debug, Default, Clone)]
pub struct Lru {
    by_time: BTreeMap<u64, PageId>,
    time_of: HashMap<PageId, u64>,
}

impl Lru {
    pub fn new() -> Self {
        Self::default()
    }

    fn touch(&mut self, page: PageId, t: u64) {
        if let Some(old) = self.time_of.insert(page, t) {
            self.by_time.remove(&old);
        }
        self.by_time.insert(t, page);
    }
}

impl EvictionPolicy for Lru {
    fn name(&self) -> String {
        "lru".into()
    }

    fn on_hit(&mut self, page: PageId, t: u64) {
        self.touch(page, t);
    }

    fn on_miss(&mut self, page: PageId, t: u64) {
        self.touch(page, t);
    }

    fn choose_victim(&mut self, _state: &CacheState, _incoming: PageId, _t: u64) -> PageId {
        let (_, victim) = self
            .by_time
            .pop_first()
            .expect("victim requested from an empty cache");
        self.time_of.remove(&victim);
        victim
    }
}
