//! Zero-shot action recognition over precomputed feature vectors.
//!
//! Videos are classified into action classes never seen during training by
//! aligning a visual embedding space with class semantics built from two text
//! sources: a short per-class definition and a pool of crawled descriptions.
//! Training couples two contrastive alignment losses with a cycle-consistency
//! term that reconstructs seen-class semantics through the unseen-class bank,
//! which rewards feature directions shared across the two class sets.
//!
//! Everything here is deterministic: a run is a pure function of its config
//! and seed. All reductions run in fixed index order, random numbers come from
//! an explicitly seeded ChaCha12 stream, and no threads are spawned. The crate
//! is `no_std` + `alloc`; file formats and the CLI live in the companion crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod align;
pub mod eval;
pub mod matrix;
pub mod optim;
pub mod rng;
pub mod synth;
pub mod textproc;
pub mod types;

pub use matrix::Mat;
