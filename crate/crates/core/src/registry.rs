//! Name-based policy selection shared by the CLI and the experiments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CacheSize, LayeredTrace};
use crate::offline::{belady_simulate, opt_dist_simulate, OfflineError};
use crate::policies::{simulate, DistPolicy, EvictionPolicy, Llru, Lru, Marking, SimError, SimResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("unknown policy `{0}` (expected one of: {names})", names = PolicyKind::names().join(", "))]
    UnknownPolicy(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Lru,
    Llru,
    Marking,
    LruDist,
    LlruDist,
    MarkingDist,
    Opt,
    OptDist,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::Lru,
        PolicyKind::Llru,
        PolicyKind::Marking,
        PolicyKind::LruDist,
        PolicyKind::LlruDist,
        PolicyKind::MarkingDist,
        PolicyKind::Opt,
        PolicyKind::OptDist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Lru => "lru",
            PolicyKind::Llru => "llru",
            PolicyKind::Marking => "marking",
            PolicyKind::LruDist => "lru-dist",
            PolicyKind::LlruDist => "llru-dist",
            PolicyKind::MarkingDist => "marking-dist",
            PolicyKind::Opt => "opt",
            PolicyKind::OptDist => "opt-dist",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|p| p.name()).collect()
    }

    pub fn is_offline(self) -> bool {
        matches!(self, PolicyKind::Opt | PolicyKind::OptDist)
    }

    pub fn is_split(self) -> bool {
        matches!(
            self,
            PolicyKind::LruDist | PolicyKind::LlruDist | PolicyKind::MarkingDist | PolicyKind::OptDist
        )
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, PolicyKind::Marking | PolicyKind::MarkingDist)
    }

    /// Builds an online policy; `None` for the offline ones. Split marking
    /// gives sub-cache `j` stream `j` of the same seed.
    pub fn online(
        self,
        k: CacheSize,
        layers: u32,
        seed: u64,
    ) -> Result<Option<Box<dyn EvictionPolicy>>, RegistryError> {
        let policy: Box<dyn EvictionPolicy> = match self {
            PolicyKind::Lru => Box::new(Lru::new()),
            PolicyKind::Llru => Box::new(Llru::new(layers)),
            PolicyKind::Marking => Box::new(Marking::new(seed)),
            PolicyKind::LruDist => Box::new(DistPolicy::new(self.name(), k, layers, |_, _| {
                Box::new(Lru::new())
            })?),
            PolicyKind::LlruDist => Box::new(DistPolicy::new(self.name(), k, layers, |_, _| {
                Box::new(Llru::new(layers))
            })?),
            PolicyKind::MarkingDist => {
                Box::new(DistPolicy::new(self.name(), k, layers, |layer, _| {
                    Box::new(Marking::with_stream(seed, u64::from(layer)))
                })?)
            }
            PolicyKind::Opt | PolicyKind::OptDist => return Ok(None),
        };
        Ok(Some(policy))
    }

    /// Runs the policy over `trace` with a cold cache of size `k`. The seed
    /// only matters for randomized policies.
    pub fn run(self, trace: &LayeredTrace, k: CacheSize, seed: u64) -> Result<SimResult, RegistryError> {
        match self {
            PolicyKind::Opt => Ok(belady_simulate(trace, k)),
            PolicyKind::OptDist => Ok(opt_dist_simulate(trace, k)?),
            online => {
                let policy = online
                    .online(k, trace.shape().layers(), seed)?
                    .expect("online policy");
                Ok(simulate(policy, trace, k)?)
            }
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| RegistryError::UnknownPolicy(s.to_string()))
    }
}
