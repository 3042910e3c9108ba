//! Exact r-near-neighbor search in Hamming space.
//!
//! The centerpiece is a covering LSH family built from Hadamard codes: every
//! pair of points within distance `r` collides in at least one of the
//! `2^(r+1) - 1` hash tables, so a candidate-then-verify query reports the
//! complete r-near-neighbor set. All table hashes for a point are produced
//! jointly by a modular fast Hadamard transform in `O(nnz(q) + L log L)`.
//!
//! Alongside it live the baselines the covering scheme is measured against:
//! classic bit-sampling LSH, multi-index hashing, and a linear scan.
//!
//! The crate is `no_std` and only needs `alloc`. Timing is injected through
//! the [`Clock`] trait so hosts with a monotonic clock can report per-step
//! costs.
#![no_std]

extern crate alloc;

pub mod bitvec;
pub mod buckets;
pub mod classic;
pub mod covering;
mod error;
pub mod hadamard;
pub mod index;
pub mod mih;
pub mod modular;
pub mod rng;
pub mod transform;

pub use bitvec::{BitVector, Dataset};
pub use classic::{choose_k, BitSampleFamily};
pub use covering::{ConstructionKind, CoveringFamily, HashBatch, MappingRange};
pub use error::{Error, ErrorKind, Result};
pub use index::{
    Clock, FamilySpec, HashPath, IndexConfig, IndexSet, LinearScan, NoClock, QueryReport,
    QueryResult, QueryScratch, RangeSearch,
};
pub use mih::{enumerate_ball, MihIndex};
pub use modular::Prime;
pub use transform::{make_plan, PlanKind, PlanOverride, PreprocessPlan};
