//! Layered LRU.
//!
//! For a resident page last requested at `τ`, at time `t`:
//!
//! * last-round index `R = ⌊(t − τ)/ℓ⌋`, the number of whole rounds since
//!   the page was used;
//! * relative layer distance, the number of requests until the page's layer
//!   comes up again.
//!
//! On a miss LLRU evicts the page with the largest `R`, breaking ties by the
//! largest layer distance. A page of the layer being requested right now
//! (`τ ≡ t mod ℓ`) will not be needed for another ℓ requests, so its
//! distance counts as ℓ when choosing a victim; [`llru_indices`] reports the
//! raw `D = (τ − t) mod ℓ`, which is 0 for such pages.

use std::collections::{BTreeMap, HashMap};

use super::{CacheState, EvictionPolicy};
use crate::model::PageId;

/// `(R, D)` with `R = ⌊(t − τ)/ℓ⌋` and `D = (τ − t) mod ℓ ∈ [0, ℓ)`.
pub fn llru_indices(tau: u64, t: u64, layers: u32) -> (u64, u32) {
    debug_assert!(tau <= t && layers >= 1);
    let l = u64::from(layers);
    let age = t - tau;
    let d = (l - age % l) % l;
    (age / l, d as u32)
}

/// Eviction key: larger keys are evicted first. The second component is the
/// distance to the next request of the page's layer, in `1..=ℓ`.
pub fn llru_priority(tau: u64, t: u64, layers: u32) -> (u64, u32) {
    let (r, d) = llru_indices(tau, t, layers);
    (r, if d == 0 { layers } else { d })
}

/// Reference LLRU victim by scanning every resident. The canonical page
/// order breaks ties, though distinct last-use times make keys unique.
///
/// Panics on an empty cache.
pub fn llru_choose_victim(state: &CacheState, t: u64, layers: u32) -> PageId {
    state
        .residents()
        .max_by(|&(pa, ta), &(pb, tb)| {
            llru_priority(ta, t, layers)
                .cmp(&llru_priority(tb, t, layers))
                .then_with(|| pb.cmp(&pa))
        })
        .map(|(p, _)| p)
        .expect("victim requested from an empty cache")
}

/// Layered LRU with O(log k) victim selection.
///
/// With `t − τ = R·ℓ + m`, the key is `(R, ℓ − m)`: the victim lies in the
/// oldest window of ℓ time steps that holds a resident, and within that
/// window it is the most recently used page.
#[derive(Debug, Clone)]
pub struct Llru {
    layers: u32,
    by_time: BTreeMap<u64, PageId>,
    time_of: HashMap<PageId, u64>,
}

impl Llru {
    pub fn new(layers: u32) -> Self {
        assert!(layers >= 1);
        Self {
            layers,
            by_time: BTreeMap::new(),
            time_of: HashMap::new(),
        }
    }

    fn touch(&mut self, page: PageId, t: u64) {
        if let Some(old) = self.time_of.insert(page, t) {
            self.by_time.remove(&old);
        }
        self.by_time.insert(t, page);
    }
}

impl EvictionPolicy for Llru {
    fn name(&self) -> String {
        "llru".into()
    }

    fn on_hit(&mut self, page: PageId, t: u64) {
        self.touch(page, t);
    }

    fn on_miss(&mut self, page: PageId, t: u64) {
        self.touch(page, t);
    }

    fn choose_victim(&mut self, _state: &CacheState, _incoming: PageId, t: u64) -> PageId {
        let l = u64::from(self.layers);
        let (&oldest, _) = self
            .by_time
            .first_key_value()
            .expect("victim requested from an empty cache");
        let max_rounds = (t - oldest) / l;
        let newest_in_window = t - max_rounds * l;
        let (&tau, &victim) = self
            .by_time
            .range(..=newest_in_window)
            .next_back()
            .expect("oldest resident lies in the window");
        self.by_time.remove(&tau);
        self.time_of.remove(&victim);
        victim
    }
}
