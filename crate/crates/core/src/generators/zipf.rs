use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{invalid, GenError};
use crate::model::{LayeredTrace, ModelShape, PageId};

/// Zipf law over the n ranks of a layer: `p_j ∝ 1/(j + b)^a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfParams {
    pub a: f64,
    pub b: f64,
    /// Map ranks to experts through a seeded permutation per layer instead
    /// of rank r → expert r.
    pub per_layer_permutation: bool,
}

impl Default for ZipfParams {
    fn default() -> Self {
        Self {
            a: 2.0,
            b: 0.0,
            per_layer_permutation: false,
        }
    }
}

impl ZipfParams {
    pub fn new(a: f64, b: f64, per_layer_permutation: bool) -> Result<Self, GenError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!("zipf exponent a must be > 0 (got {a})")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(invalid(format!("zipf shift b must be >= 0 (got {b})")));
        }
        Ok(Self {
            a,
            b,
            per_layer_permutation,
        })
    }

    /// Normalized rank probabilities for ranks `1..=n`.
    pub fn probabilities(&self, n: u32) -> Vec<f64> {
        // Work in log space so huge exponents do not underflow rank 1.
        let logs: Vec<f64> = (1..=n).map(|j| -self.a * (f64::from(j) + self.b).ln()).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|&x| (x - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }
}

/// `rounds` full rounds; each layer's request is an independent Zipf draw.
pub fn gen_zipf(
    shape: ModelShape,
    params: &ZipfParams,
    rounds: u64,
    seed: u64,
) -> Result<LayeredTrace, GenError> {
    let params = ZipfParams::new(params.a, params.b, params.per_layer_permutation)?;
    let n = shape.experts();
    let mut cdf = params.probabilities(n);
    let mut acc = 0.0;
    for p in cdf.iter_mut() {
        acc += *p;
        *p = acc;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expert_of_rank: Vec<Vec<u32>> = (0..shape.layers())
        .map(|_| {
            let mut ranks: Vec<u32> = (1..=n).collect();
            if params.per_layer_permutation {
                ranks.shuffle(&mut rng);
            }
            ranks
        })
        .collect();
    let mut requests = Vec::with_capacity((rounds * u64::from(shape.layers())) as usize);
    for _ in 0..rounds {
        for (j, mapping) in expert_of_rank.iter().enumerate() {
            let u: f64 = rng.gen();
            let rank = cdf.partition_point(|&c| c <= u).min(n as usize - 1);
            requests.push(PageId::new(j as u32 + 1, mapping[rank]));
        }
    }
    Ok(LayeredTrace::new(shape, requests)?)
}
