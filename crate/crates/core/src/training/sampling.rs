use alloc::vec::Vec;

use rand::Rng;

use crate::Triple;

/// Which end of a positive triple gets corrupted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// All `m` replacements on the tail (used with reversed-triple augmentation).
    TailOnly,
    /// `m / 2` head and `m / 2` tail replacements.
    Both,
}

/// Appends `(tail, rel + num_relations, head)` for every triple.
pub fn augment_reverse(triples: &[Triple], num_relations: u32) -> Vec<Triple> {
    let mut out = Vec::with_capacity(2 * triples.len());
    out.extend_from_slice(triples);
    out.extend(triples.iter().map(|t| Triple {
        head: t.tail,
        rel: t.rel + num_relations,
        tail: t.head,
    }));
    out
}

/// Corrupts `positive` `m` times with entities drawn uniformly from
/// `0..num_entities`. No filtering: duplicates and accidental true triples
/// are kept. In [`SampleMode::Both`] the head corruptions come first.
pub fn sample_negatives<R: Rng + ?Sized>(
    positive: Triple,
    m: usize,
    mode: SampleMode,
    num_entities: u32,
    rng: &mut R,
    out: &mut Vec<Triple>,
) {
    let heads = match mode {
        SampleMode::TailOnly => 0,
        SampleMode::Both => m / 2,
    };
    for _ in 0..heads {
        out.push(Triple {
            head: rng.random_range(0..num_entities),
            ..positive
        });
    }
    for _ in heads..m {
        out.push(Triple {
            tail: rng.random_range(0..num_entities),
            ..positive
        });
    }
}
