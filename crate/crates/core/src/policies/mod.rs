//! Online eviction policies and the simulation engine that drives them.
//!
//! The engine owns the [`CacheState`]; a policy only decides which page to
//! evict. On a miss the engine evicts first, then inserts the requested page
//! with `τ = t`, so a just-inserted page always has `R = 0, D = 0`.

mod dist;
mod llru;
mod lru;
mod marking;

pub use dist::{split_capacity, DistPolicy};
pub use llru::{llru_choose_victim, llru_indices, llru_priority, Llru};
pub use lru::{lru_choose_victim, Lru};
pub use marking::Marking;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{round_of_position, CacheSize, LayeredTrace, PageId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("policy `{policy}` chose non-resident victim {victim} at t={t}")]
    NonResidentVictim {
        policy: String,
        victim: PageId,
        t: u64,
    },
    #[error("a split cache needs k >= l (got k={k}, l={layers})")]
    CapacityBelowLayers { k: u32, layers: u32 },
}

/// Resident pages with the time of their most recent request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheState {
    capacity: CacheSize,
    last_use: BTreeMap<PageId, u64>,
    clock: u64,
}

impl CacheState {
    pub fn new(capacity: CacheSize) -> Self {
        Self {
            capacity,
            last_use: BTreeMap::new(),
            clock: 0,
        }
    }

    /// Builds a state directly from `(page, τ)` pairs, mainly for tests.
    /// Panics if τ values repeat or the set exceeds the capacity.
    pub fn from_residents(
        capacity: CacheSize,
        clock: u64,
        residents: impl IntoIterator<Item = (PageId, u64)>,
    ) -> Self {
        let last_use: BTreeMap<_, _> = residents.into_iter().collect();
        let mut taus: Vec<_> = last_use.values().copied().collect();
        taus.sort_unstable();
        taus.dedup();
        assert_eq!(taus.len(), last_use.len(), "last-use times must be distinct");
        assert!(last_use.len() <= capacity.as_usize());
        Self {
            capacity,
            last_use,
            clock,
        }
    }

    pub fn capacity(&self) -> CacheSize {
        self.capacity
    }

    /// Time of the most recent request (0 before the first request).
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.last_use.len()
    }

    pub fn is_empty(&self) -> bool {
        self.last_use.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.last_use.len() >= self.capacity.as_usize()
    }

    pub fn contains(&self, page: PageId) -> bool {
        self.last_use.contains_key(&page)
    }

    /// τ(p, t) for a resident page.
    pub fn last_use(&self, page: PageId) -> Option<u64> {
        self.last_use.get(&page).copied()
    }

    /// Residents in canonical page order, with their last-use times.
    pub fn residents(&self) -> impl Iterator<Item = (PageId, u64)> + '_ {
        self.last_use.iter().map(|(&p, &t)| (p, t))
    }
}

/// An eviction policy driven by [`Simulator`].
///
/// `on_hit` and `on_miss` report requests; `choose_victim` is called on a
/// miss when the engine needs room and must both return a resident page and
/// drop it from the policy's own bookkeeping.
pub trait EvictionPolicy: Send {
    fn name(&self) -> String;

    fn on_hit(&mut self, page: PageId, t: u64);

    /// Called after `page` has been inserted at time `t`.
    fn on_miss(&mut self, page: PageId, t: u64);

    /// Whether a miss on `incoming` requires an eviction. Partitioned
    /// policies may need one before the whole cache is full.
    fn needs_eviction(&self, state: &CacheState, _incoming: PageId) -> bool {
        state.is_full()
    }

    fn choose_victim(&mut self, state: &CacheState, incoming: PageId, t: u64) -> PageId;

    fn is_deterministic(&self) -> bool {
        true
    }

    fn seed(&self) -> Option<u64> {
        None
    }
}

impl<P: EvictionPolicy + ?Sized> EvictionPolicy for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn on_hit(&mut self, page: PageId, t: u64) {
        (**self).on_hit(page, t)
    }
    fn on_miss(&mut self, page: PageId, t: u64) {
        (**self).on_miss(page, t)
    }
    fn needs_eviction(&self, state: &CacheState, incoming: PageId) -> bool {
        (**self).needs_eviction(state, incoming)
    }
    fn choose_victim(&mut self, state: &CacheState, incoming: PageId, t: u64) -> PageId {
        (**self).choose_victim(state, incoming, t)
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
    fn seed(&self) -> Option<u64> {
        (**self).seed()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Hit,
    Miss,
}

impl Outcome {
    pub fn is_miss(self) -> bool {
        self == Outcome::Miss
    }
}

/// Hit/miss record of one (policy, trace, k) run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimResult {
    pub policy: String,
    pub seed: Option<u64>,
    pub k: u32,
    pub faults: u64,
    pub outcomes: Vec<Outcome>,
    pub faults_per_round: Vec<u64>,
}

impl SimResult {
    pub(crate) fn from_outcomes(
        policy: String,
        seed: Option<u64>,
        k: CacheSize,
        layers: u32,
        outcomes: Vec<Outcome>,
    ) -> Self {
        let rounds = (outcomes.len() as u64).div_ceil(u64::from(layers)) as usize;
        let mut faults_per_round = vec![0; rounds];
        let mut faults = 0;
        for (i, o) in outcomes.iter().enumerate() {
            if o.is_miss() {
                faults += 1;
                faults_per_round[(round_of_position(i as u64 + 1, layers) - 1) as usize] += 1;
            }
        }
        Self {
            policy,
            seed,
            k: k.get(),
            faults,
            outcomes,
            faults_per_round,
        }
    }

    /// Misses among requests after the first `warmup` positions.
    pub fn faults_after(&self, warmup: usize) -> u64 {
        self.outcomes
            .iter()
            .skip(warmup)
            .filter(|o| o.is_miss())
            .count() as u64
    }

    pub fn hits(&self) -> u64 {
        self.outcomes.len() as u64 - self.faults
    }
}

/// Step-by-step driver of one policy over a request stream.
pub struct Simulator<P> {
    policy: P,
    state: CacheState,
    layers: u32,
    outcomes: Vec<Outcome>,
}

impl<P: EvictionPolicy> Simulator<P> {
    /// Starts with an empty cache.
    pub fn new(policy: P, k: CacheSize, layers: u32) -> Self {
        Self {
            policy,
            state: CacheState::new(k),
            layers,
            outcomes: Vec::new(),
        }
    }

    pub fn state(&self) -> &CacheState {
        &self.state
    }

    pub fn policy(&self) -> &P {
        &self.policy
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// Serves one request at time `t = clock + 1`.
    pub fn step(&mut self, page: PageId) -> Result<Outcome, SimError> {
        let t = self.state.clock + 1;
        self.state.clock = t;
        let outcome = if let Some(tau) = self.state.last_use.get_mut(&page) {
            *tau = t;
            self.policy.on_hit(page, t);
            Outcome::Hit
        } else {
            if self.state.is_full() || self.policy.needs_eviction(&self.state, page) {
                let victim = self.policy.choose_victim(&self.state, page, t);
                if self.state.last_use.remove(&victim).is_none() {
                    return Err(SimError::NonResidentVictim {
                        policy: self.policy.name(),
                        victim,
                        t,
                    });
                }
            }
            self.state.last_use.insert(page, t);
            self.policy.on_miss(page, t);
            Outcome::Miss
        };
        debug_assert!(self.state.len() <= self.state.capacity.as_usize());
        self.outcomes.push(outcome);
        Ok(outcome)
    }

    pub fn finish(self) -> SimResult {
        SimResult::from_outcomes(
            self.policy.name(),
            self.policy.seed(),
            self.state.capacity,
            self.layers,
            self.outcomes,
        )
    }
}

/// Runs `policy` over `trace` from a cold cache of size `k`.
pub fn simulate<P: EvictionPolicy>(
    policy: P,
    trace: &LayeredTrace,
    k: CacheSize,
) -> Result<SimResult, SimError> {
    let mut sim = Simulator::new(policy, k, trace.shape().layers());
    for &page in trace.requests() {
        sim.step(page)?;
    }
    Ok(sim.finish())
}
