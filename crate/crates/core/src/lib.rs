//! Exact, desk-scale machinery for induced-subposet extremal problems in
//! the Boolean lattice `2^[n]` and in grids `[k_1] × … × [k_d]`:
//!
//! - posets, their parameters, and induced-copy search ([`poset`],
//!   [`embedding`]);
//! - interval sublattices, the gap statistic, and exact containment
//!   probabilities ([`lattice`]);
//! - branch-and-bound solvers for `La*(n,P)`, `ex*`, gapped variants, and
//!   exact `forb*` counting ([`solver`]);
//! - symmetric chain and grid decompositions of `2^[n]` with the
//!   random-permutation pair bound ([`decomposition`]);
//! - greedy balanced copy collections, the constructive gapped shift, and
//!   the grid supersaturation pipeline ([`supersat`]);
//! - a deterministic hypergraph container builder with verifiable
//!   certificates and the container-tree process ([`containers`]).
//!
//! Everything is deterministic: randomized routines take explicit seeds,
//! and each trial derives its own child seed, so results do not depend on
//! thread count or scheduling. Probabilities coming from exact formulas are
//! `BigRational`; floats appear only in Monte-Carlo estimates and reports.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the CLI live
//! in the companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod containers;
pub mod decomposition;
pub mod embedding;
pub mod error;
pub mod lattice;
pub mod poset;
pub mod rng;
pub mod solver;
pub mod supersat;

pub use error::{Error, Result};
pub use lattice::{Mask, SetFamily};
pub use poset::Poset;
