//! Synthetic and adversarial request sequences, plus the parallel
//! coupon-collector estimator used for randomized lower bounds.
//!
//! Every generator here emits whole rounds only.

mod adversary;
mod coupon;
mod zipf;

pub use adversary::{
    gen_adaptive_adversary, gen_fixed_partition_adversary, gen_lru_nemesis, gen_yao_random,
    starved_layer, AdaptiveRun, LruNemesis,
};
pub use coupon::{
    coupon_cover_time, cover_time_lower_bound, harmonic, CoverTimeEstimate, SAMPLES_PER_STREAM,
};
pub use zipf::{gen_zipf, ZipfParams};

use thiserror::Error;

use crate::model::ModelError;
use crate::policies::SimError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("policy `{0}` is randomized; the adaptive adversary needs a deterministic policy")]
    NondeterministicPolicy(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> GenError {
    GenError::InvalidParams(msg.into())
}
