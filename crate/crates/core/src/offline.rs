//! Offline baselines: Belady's furthest-in-future rule (OPT), its per-layer
//! split variant (OPT-Dist), and an exhaustive search oracle for tiny
//! instances.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{CacheSize, LayeredTrace, PageId};
use crate::policies::{split_capacity, Outcome, SimError, SimResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OfflineError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(
        "oracle cap exceeded: {pages} pages / {length} requests (cap {max_pages} pages / {max_length} requests)"
    )]
    OracleCapExceeded {
        pages: u64,
        length: usize,
        max_pages: u64,
        max_length: usize,
    },
}

const NEVER: u64 = u64::MAX;

/// Hit/miss sequence of Belady's rule on a plain request list.
fn belady_outcomes(pages: &[PageId], k: usize) -> Vec<Outcome> {
    let mut next_use = vec![NEVER; pages.len()];
    let mut upcoming: HashMap<PageId, u64> = HashMap::new();
    for (i, &p) in pages.iter().enumerate().rev() {
        if let Some(n) = upcoming.insert(p, i as u64) {
            next_use[i] = n;
        }
    }

    // Largest key = evicted first. Among never-again pages, Reverse makes the
    // canonically smallest page the largest key.
    let mut queue: BTreeSet<(u64, Reverse<PageId>)> = BTreeSet::new();
    let mut key_of: HashMap<PageId, u64> = HashMap::new();
    let mut outcomes = Vec::with_capacity(pages.len());
    for (i, &p) in pages.iter().enumerate() {
        let next = next_use[i];
        if let Some(old) = key_of.insert(p, next) {
            queue.remove(&(old, Reverse(p)));
            outcomes.push(Outcome::Hit);
        } else {
            if queue.len() >= k {
                let (_, Reverse(victim)) = queue.pop_last().expect("k >= 1");
                key_of.remove(&victim);
            }
            outcomes.push(Outcome::Miss);
        }
        queue.insert((next, Reverse(p)));
    }
    outcomes
}

/// Belady's optimal offline eviction over the whole trace.
pub fn belady_simulate(trace: &LayeredTrace, k: CacheSize) -> SimResult {
    let outcomes = belady_outcomes(trace.requests(), k.as_usize());
    SimResult::from_outcomes("opt".into(), None, k, trace.shape().layers(), outcomes)
}

/// Belady run independently on each layer's subsequence, against the same
/// per-layer capacities as [`crate::policies::DistPolicy`].
pub fn opt_dist_simulate(trace: &LayeredTrace, k: CacheSize) -> Result<SimResult, OfflineError> {
    let layers = trace.shape().layers();
    let capacities = split_capacity(k, layers)?;
    let mut outcomes = vec![Outcome::Miss; trace.len()];
    for (j, &cap) in capacities.iter().enumerate() {
        let layer = j as u32 + 1;
        let sub: Vec<_> = trace.layer_subsequence(layer).collect();
        for (idx, o) in belady_outcomes(&sub, cap as usize).into_iter().enumerate() {
            outcomes[j + idx * layers as usize] = o;
        }
    }
    Ok(SimResult::from_outcomes(
        "opt-dist".into(),
        None,
        k,
        layers,
        outcomes,
    ))
}

/// Size limit for [`dp_opt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCap {
    pub max_pages: u64,
    pub max_length: usize,
}

impl Default for OracleCap {
    fn default() -> Self {
        Self {
            max_pages: 9,
            max_length: 24,
        }
    }
}

/// Exact minimum fault count over every eviction schedule, by memoized
/// search over (position, resident set). Every miss must bring the requested
/// page in; there is no bypass.
pub fn dp_opt(trace: &LayeredTrace, k: CacheSize, cap: OracleCap) -> Result<u64, OfflineError> {
    let shape = trace.shape();
    let pages = shape.page_count();
    if pages > cap.max_pages.min(32) || trace.len() > cap.max_length {
        return Err(OfflineError::OracleCapExceeded {
            pages,
            length: trace.len(),
            max_pages: cap.max_pages,
            max_length: cap.max_length,
        });
    }
    let bits: Vec<u32> = trace
        .requests()
        .iter()
        .map(|&p| 1u32 << shape.page_index(p))
        .collect();
    let mut memo = HashMap::new();
    Ok(search(&bits, 0, 0, k.get(), &mut memo))
}

fn search(bits: &[u32], pos: usize, cache: u32, k: u32, memo: &mut HashMap<(usize, u32), u64>) -> u64 {
    if pos == bits.len() {
        return 0;
    }
    if let Some(&v) = memo.get(&(pos, cache)) {
        return v;
    }
    let page = bits[pos];
    let best = if cache & page != 0 {
        search(bits, pos + 1, cache, k, memo)
    } else if cache.count_ones() < k {
        1 + search(bits, pos + 1, cache | page, k, memo)
    } else {
        let mut best = u64::MAX;
        let mut rest = cache;
        while rest != 0 {
            let victim = rest & rest.wrapping_neg();
            rest &= rest - 1;
            best = best.min(search(bits, pos + 1, (cache & !victim) | page, k, memo));
        }
        1 + best
    };
    memo.insert((pos, cache), best);
    best
}
