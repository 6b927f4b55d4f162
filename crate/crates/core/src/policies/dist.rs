use super::{CacheState, EvictionPolicy, SimError};
use crate::model::{CacheSize, PageId};

/// Per-layer capacities of a cache of `k` pages split across `layers`
/// layers: `⌊k/ℓ⌋` each, with the `k mod ℓ` leftover slots going one apiece
/// to layers `1..=r`.
pub fn split_capacity(k: CacheSize, layers: u32) -> Result<Vec<u32>, SimError> {
    let k = k.get();
    if layers == 0 || k < layers {
        return Err(SimError::CapacityBelowLayers { k, layers });
    }
    let base = k / layers;
    let extra = k % layers;
    Ok((1..=layers)
        .map(|layer| base + u32::from(layer <= extra))
        .collect())
}

/// A cache statically split into one sub-cache per layer, each managed by
/// its own instance of an inner policy. Pages of layer `j` only ever live in
/// sub-cache `j`.
pub struct DistPolicy {
    name: String,
    capacities: Vec<u32>,
    occupancy: Vec<u32>,
    inner: Vec<Box<dyn EvictionPolicy>>,
}

impl DistPolicy {
    /// `factory(layer, capacity)` builds the inner policy of one sub-cache.
    pub fn new<F>(name: impl Into<String>, k: CacheSize, layers: u32, factory: F) -> Result<Self, SimError>
    where
        F: Fn(u32, CacheSize) -> Box<dyn EvictionPolicy>,
    {
        let capacities = split_capacity(k, layers)?;
        let inner = capacities
            .iter()
            .enumerate()
            .map(|(j, &cap)| {
                factory(j as u32 + 1, CacheSize::new(cap).expect("split gives every layer a slot"))
            })
            .collect();
        Ok(Self {
            name: name.into(),
            occupancy: vec![0; capacities.len()],
            capacities,
            inner,
        })
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    fn slot(page: PageId) -> usize {
        (page.layer - 1) as usize
    }
}

impl EvictionPolicy for DistPolicy {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn on_hit(&mut self, page: PageId, t: u64) {
        self.inner[Self::slot(page)].on_hit(page, t);
    }

    fn on_miss(&mut self, page: PageId, t: u64) {
        let j = Self::slot(page);
        self.occupancy[j] += 1;
        self.inner[j].on_miss(page, t);
    }

    fn needs_eviction(&self, _state: &CacheState, incoming: PageId) -> bool {
        let j = Self::slot(incoming);
        self.occupancy[j] >= self.capacities[j]
    }

    fn choose_victim(&mut self, state: &CacheState, incoming: PageId, t: u64) -> PageId {
        let j = Self::slot(incoming);
        self.occupancy[j] -= 1;
        self.inner[j].choose_victim(state, incoming, t)
    }

    fn is_deterministic(&self) -> bool {
        self.inner.iter().all(|p| p.is_deterministic())
    }

    fn seed(&self) -> Option<u64> {
        self.inner.first().and_then(|p| p.seed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelShape;
    use crate::policies::testing::random_trace;
    use crate::policies::{simulate, Llru, Lru, Marking, Simulator};
    use proptest::prelude::*;

    fn k(v: u32) -> CacheSize {
        CacheSize::new(v).unwrap()
    }

    #[test]
    fn capacity_split_rules() {
        assert_eq!(split_capacity(k(8), 4).unwrap(), vec![2, 2, 2, 2]);
        assert_eq!(split_capacity(k(7), 4).unwrap(), vec![2, 2, 2, 1]);
        assert_eq!(split_capacity(k(3), 2).unwrap(), vec![2, 1]);
        assert!(matches!(
            split_capacity(k(3), 4),
            Err(SimError::CapacityBelowLayers { k: 3, layers: 4 })
        ));
    }

    #[test]
    fn construction_rejects_small_cache() {
        let r = DistPolicy::new("lru-dist", k(2), 3, |_, _| Box::new(Lru::new()));
        assert!(r.is_err());
    }

    #[test]
    fn evicts_within_layer_before_cache_is_full() {
        // ℓ=2, k=4: each layer gets 2 slots. Layer 1 cycles 3 experts while
        // layer 2 stays on expert 1, so layer 1 thrashes under LRU.
        let shape = ModelShape::new(3, 2).unwrap();
        let rounds: Vec<[u32; 2]> = (0..30).map(|i| [i % 3 + 1, 1]).collect();
        let trace = crate::model::LayeredTrace::from_rounds(shape, rounds).unwrap();
        let p = DistPolicy::new("lru-dist", k(4), 2, |_, _| Box::new(Lru::new())).unwrap();
        let r = simulate(p, &trace, k(4)).unwrap();
        assert_eq!(r.faults, 30 + 1);
        let shared = simulate(Lru::new(), &trace, k(4)).unwrap();
        assert_eq!(shared.faults, 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn layers_stay_within_their_slots(
            n in 1u32..6, l in 1u32..5, extra in 0u32..8, len in 0usize..150, seed in any::<u64>(), which in 0u8..3
        ) {
            let shape = ModelShape::new(n, l).unwrap();
            let cap = k(l + extra);
            let trace = random_trace(shape, len, seed);
            let p = DistPolicy::new("dist", cap, l, |layer, _| -> Box<dyn EvictionPolicy> {
                match which {
                    0 => Box::new(Lru::new()),
                    1 => Box::new(Llru::new(l)),
                    _ => Box::new(Marking::with_stream(seed, u64::from(layer))),
                }
            }).unwrap();
            let caps = p.capacities().to_vec();
            let mut sim = Simulator::new(p, cap, l);
            for &page in trace.requests() {
                sim.step(page).unwrap();
                let mut per_layer = vec![0u32; l as usize];
                for (q, _) in sim.state().residents() {
                    per_layer[(q.layer - 1) as usize] += 1;
                }
                for j in 0..l as usize {
                    prop_assert!(per_layer[j] <= caps[j]);
                }
            }
        }
    }
}
