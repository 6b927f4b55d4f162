//! Lower-bound constructions for layered paging.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{invalid, GenError};
use crate::model::{CacheSize, LayeredTrace, ModelShape, PageId};
use crate::policies::{split_capacity, EvictionPolicy, SimResult, Simulator};

/// Cyclic sequence over all `n·ℓ = k + 1` pages that makes LRU miss on
/// every request once warm.
///
/// Round `i` (0-based) requests expert `(i mod n) + 1` in every layer, so
/// the sequence repeats with a period of `n` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LruNemesis {
    shape: ModelShape,
}

/// Requires `ℓ | k + 1`; the shape is `n = (k + 1)/ℓ`.
pub fn gen_lru_nemesis(k: CacheSize, layers: u32) -> Result<LruNemesis, GenError> {
    let pages = k.get() + 1;
    if layers == 0 || !pages.is_multiple_of(layers) {
        return Err(invalid(format!(
            "lru nemesis needs l to divide k+1 (k={k}, l={layers})"
        )));
    }
    Ok(LruNemesis {
        shape: ModelShape::new(pages / layers, layers)?,
    })
}

impl LruNemesis {
    pub fn shape(&self) -> ModelShape {
        self.shape
    }

    /// Expert requested in every layer during round `round` (0-based).
    pub fn expert_in_round(&self, round: u64) -> u32 {
        (round % u64::from(self.shape.experts())) as u32 + 1
    }

    /// Unbounded request stream.
    pub fn requests(&self) -> impl Iterator<Item = PageId> + '_ {
        (0u64..).flat_map(move |r| {
            let e = self.expert_in_round(r);
            (1..=self.shape.layers()).map(move |l| PageId::new(l, e))
        })
    }

    /// The first `rounds` rounds.
    pub fn trace(&self, rounds: u64) -> LayeredTrace {
        let len = rounds * u64::from(self.shape.layers());
        let reqs = self.requests().take(len as usize).collect();
        LayeredTrace::new(self.shape, reqs).expect("nemesis rounds are well formed")
    }
}

/// A layer whose share of a `k`-slot split cache is smaller than `n`, i.e.
/// one that a fixed partition cannot hold entirely. Picks the highest such
/// layer, which gets the fewest slots under the remainder rule.
pub fn starved_layer(k: CacheSize, layers: u32, experts: u32) -> Option<u32> {
    let caps = split_capacity(k, layers).ok()?;
    caps.iter()
        .rposition(|&c| c < experts)
        .map(|j| j as u32 + 1)
}

/// Round `i` (1-based) requests expert 1 in every layer but `z`, where it
/// requests expert `(i mod n) + 1`. All `n + ℓ − 1` distinct pages fit in a
/// shared cache of size `k`, but layer `z` cycles through `n` pages.
pub fn gen_fixed_partition_adversary(
    experts: u32,
    layers: u32,
    z: u32,
    rounds: u64,
    k: CacheSize,
) -> Result<LayeredTrace, GenError> {
    if experts < 2 || layers < 2 {
        return Err(invalid("fixed-partition adversary needs n >= 2 and l >= 2"));
    }
    if !(1..=layers).contains(&z) {
        return Err(invalid(format!("layer z={z} outside 1..={layers}")));
    }
    let k = k.get();
    if k < experts + layers - 1 || k >= experts * layers {
        return Err(invalid(format!(
            "fixed-partition adversary needs n+l-1 <= k < n*l (n={experts}, l={layers}, k={k})"
        )));
    }
    let shape = ModelShape::new(experts, layers)?;
    let mut requests = Vec::with_capacity((rounds * u64::from(layers)) as usize);
    for i in 1..=rounds {
        for layer in 1..=layers {
            let expert = if layer == z {
                (i % u64::from(experts)) as u32 + 1
            } else {
                1
            };
            requests.push(PageId::new(layer, expert));
        }
    }
    Ok(LayeredTrace::new(shape, requests)?)
}

/// Output of [`gen_adaptive_adversary`].
#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub trace: LayeredTrace,
    /// The driven policy's run over the whole trace.
    pub result: SimResult,
    /// Fill rounds preceding the adversarial ones.
    pub warmup_rounds: u64,
}

impl AdaptiveRun {
    pub fn warmup_requests(&self) -> usize {
        (self.warmup_rounds * u64::from(self.trace.shape().layers())) as usize
    }

    /// Policy faults per adversarial round.
    pub fn adversarial_faults_per_round(&self) -> &[u64] {
        &self.result.faults_per_round[self.warmup_rounds as usize..]
    }
}

/// Builds a sequence against a deterministic policy with `k = n·ℓ − 1`.
///
/// A fill phase of `n` rounds (round `r` requests expert `r` in every layer)
/// touches every page once, leaving exactly one page out of a full shared
/// cache. Each adversarial round then repeats the previous round except in
/// the layer of the page currently missing from the policy's cache, where it
/// requests that page. When several pages are absent (split caches), the
/// canonically smallest one is used.
pub fn gen_adaptive_adversary<P: EvictionPolicy>(
    policy: P,
    experts: u32,
    layers: u32,
    rounds: u64,
) -> Result<AdaptiveRun, GenError> {
    if !policy.is_deterministic() {
        return Err(GenError::NondeterministicPolicy(policy.name()));
    }
    let shape = ModelShape::new(experts, layers)?;
    let k = CacheSize::new(experts * layers - 1)
        .map_err(|_| invalid("adaptive adversary needs n*l >= 2"))?;
    let mut sim = Simulator::new(policy, k, layers);
    let mut requests = Vec::new();

    let mut round: Vec<u32> = Vec::new();
    for expert in 1..=experts {
        round = vec![expert; layers as usize];
        for (j, &e) in round.iter().enumerate() {
            let page = PageId::new(j as u32 + 1, e);
            sim.step(page)?;
            requests.push(page);
        }
    }

    for _ in 0..rounds {
        let missing = shape
            .pages()
            .find(|&p| !sim.state().contains(p))
            .expect("k < n*l leaves a page out");
        round[(missing.layer - 1) as usize] = missing.expert;
        for (j, &e) in round.iter().enumerate() {
            let page = PageId::new(j as u32 + 1, e);
            sim.step(page)?;
            requests.push(page);
        }
    }

    Ok(AdaptiveRun {
        trace: LayeredTrace::new(shape, requests)?,
        result: sim.finish(),
        warmup_rounds: u64::from(experts),
    })
}

/// Each request uniform over its layer's `n` experts, independently.
pub fn gen_yao_random(
    experts: u32,
    layers: u32,
    rounds: u64,
    seed: u64,
) -> Result<LayeredTrace, GenError> {
    let shape = ModelShape::new(experts, layers)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut requests = Vec::with_capacity((rounds * u64::from(layers)) as usize);
    for _ in 0..rounds {
        for layer in 1..=layers {
            requests.push(PageId::new(layer, rng.gen_range(1..=experts)));
        }
    }
    Ok(LayeredTrace::new(shape, requests)?)
}
