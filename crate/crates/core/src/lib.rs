//! Multi-relational pseudo-Riemannian knowledge-graph embeddings.
//!
//! Nodes live on a flat manifold with signature `(n_t, n_x)`. Each relation
//! projects the time coordinates onto a single time axis, translates the head
//! and rescales the tail, and the edge probability is read off a Triple
//! Fermi-Dirac likelihood blended with its Wick-rotated (Euclidean)
//! counterpart. Node and relation biases are added in logit space.
//!
//! This crate is `no_std` (with `alloc`). File IO, configuration and the
//! command-line front end live in the `pseudoe` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod checkpoint;
pub mod data;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod likelihood;
pub mod model;
pub mod relmaps;
pub mod training;

pub use error::{Error, Result};
pub use geometry::{GeometryConfig, Signature};
pub use likelihood::TfdParams;
pub use model::{InitConfig, ModelParams, Variant};

/// An integer-encoded `(head, relation, tail)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub head: u32,
    pub rel: u32,
    pub tail: u32,
}

impl Triple {
    pub const fn new(head: u32, rel: u32, tail: u32) -> Self {
        Self { head, rel, tail }
    }
}

impl From<(u32, u32, u32)> for Triple {
    fn from((head, rel, tail): (u32, u32, u32)) -> Self {
        Self { head, rel, tail }
    }
}
