//! Layered paging for Mixture-of-Experts expert caching.
//!
//! An MoE model with ℓ layers of n experts requests one expert weight page
//! per layer, cycling through the layers for every token. This crate models
//! that request structure and provides:
//!
//! * [`model`]: pages, shapes, validated traces and the canonical trace file
//!   format;
//! * [`policies`]: the simulation engine with LRU, layered LRU (LLRU),
//!   randomized marking and per-layer split ("dist") wrappers;
//! * [`offline`]: Belady's optimum, its split variant and an exhaustive
//!   oracle for tiny instances;
//! * [`generators`]: Zipf workloads, adversarial constructions and a
//!   parallel coupon-collector estimator;
//! * [`ingest`]: recorded multi-expert traces and round expansion;
//! * [`registry`]: policy selection by name.

pub mod generators;
pub mod ingest;
pub mod model;
pub mod offline;
pub mod policies;
pub mod registry;

pub use model::{CacheSize, LayeredTrace, ModelShape, PageId};
pub use policies::{simulate, EvictionPolicy, Outcome, SimResult};
pub use registry::PolicyKind;
