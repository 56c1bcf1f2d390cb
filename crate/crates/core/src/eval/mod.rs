//! Filtered ranking evaluation.
//!
//! Ranks use the average-tie rule: `1 + #higher + #equal / 2`, so a model that
//! scores every candidate identically ranks the truth in the middle.

mod bias;
mod sweep;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

pub use bias::{mean_top_degree, pearson, score_components, BiasDegreeReport};
pub use sweep::{beta_sweep, SweepRow, SweepSpec};

use crate::data::{FilterIndex, NegativesTable, Split, TripleStore};
use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::training::{augment_reverse, augmented_filter};
use crate::Triple;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolMode {
    /// Every entity is a candidate tail; known true triples are skipped.
    FullFiltered,
    /// Candidates are a stored list per `(head, relation)`, used verbatim.
    FixedNegatives,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalProtocol<'a> {
    pub mode: ProtocolMode,
    pub ks: Vec<usize>,
    pub negatives: Option<&'a NegativesTable>,
}

impl<'a> EvalProtocol<'a> {
    pub fn full_filtered() -> Self {
        Self {
            mode: ProtocolMode::FullFiltered,
            ks: vec![1, 3, 10],
            negatives: None,
        }
    }

    pub fn fixed_negatives(table: &'a NegativesTable) -> Self {
        Self {
            mode: ProtocolMode::FixedNegatives,
            ks: vec![1, 3, 10],
            negatives: Some(table),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == ProtocolMode::FixedNegatives && self.negatives.is_none() {
            return Err(invalid("fixed-negatives protocol needs a negatives table"));
        }
        if self.ks.contains(&0) {
            return Err(invalid("hits@k needs k >= 1"));
        }
        Ok(())
    }
}

/// `1 + #{c > truth} + #{c == truth} / 2`.
pub fn rank_against(true_score: f64, candidates: impl IntoIterator<Item = f64>) -> f64 {
    let (mut higher, mut ties) = (0usize, 0usize);
    for s in candidates {
        if s > true_score {
            higher += 1;
        } else if s == true_score {
            ties += 1;
        }
    }
    1.0 + higher as f64 + ties as f64 / 2.0
}

/// Filtered rank of the true tail of `triple`.
pub fn filtered_rank(
    params: &ModelParams,
    triple: Triple,
    filter: &FilterIndex,
    protocol: &EvalProtocol<'_>,
) -> Result<f64> {
    let mut scores = Vec::new();
    rank_with_buffer(params, triple, filter, protocol, &mut scores)
}

pub(crate) fn rank_with_buffer(
    params: &ModelParams,
    triple: Triple,
    filter: &FilterIndex,
    protocol: &EvalProtocol<'_>,
    scores: &mut Vec<f64>,
) -> Result<f64> {
    let Triple { head, rel, tail } = triple;
    params.check_ids(head, rel, tail)?;
    match protocol.mode {
        ProtocolMode::FullFiltered => {
            params.score_all_tails(head, rel, scores)?;
            let truth = scores[tail as usize];
            let known = filter.tails(head, rel);
            let candidates = scores.iter().enumerate().filter_map(|(c, &s)| {
                let c = c as u32;
                let excluded = c == tail || known.is_some_and(|k| k.contains(&c));
                (!excluded).then_some(s)
            });
            Ok(rank_against(truth, candidates))
        }
        ProtocolMode::FixedNegatives => {
            let table = protocol
                .negatives
                .ok_or_else(|| invalid("fixed-negatives protocol needs a negatives table"))?;
            let negs = table.get(head, rel).ok_or(Error::MissingNegatives { head, rel })?;
            let truth = params.score(head, rel, tail)?;
            params.score_tails(head, rel, negs, scores)?;
            Ok(rank_against(truth, scores.iter().copied()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationMetrics {
    pub count: usize,
    pub mrr: f64,
    /// `(k, fraction of ranks <= k)`, ascending in `k`.
    pub hits: Vec<(usize, f64)>,
}

impl RelationMetrics {
    pub fn hits(&self, k: usize) -> Option<f64> {
        self.hits.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v)
    }
}

/// Ranks of one split plus MRR / hits@k overall and per relation.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub per_triple: Vec<(Triple, f64)>,
    pub mrr: f64,
    pub hits_at: Vec<(usize, f64)>,
    pub per_relation: BTreeMap<u32, RelationMetrics>,
}

impl RankReport {
    pub fn hits(&self, k: usize) -> Option<f64> {
        self.hits_at.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.per_triple.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_triple.is_empty()
    }

    /// Re-aggregates with reversed relation ids `k + num_relations` folded
    /// back onto `k`.
    pub fn fold_relations(&self, num_relations: u32) -> Result<RankReport> {
        let ks: Vec<usize> = self.hits_at.iter().map(|(k, _)| *k).collect();
        let folded: Vec<(Triple, f64)> = self
            .per_triple
            .iter()
            .map(|&(t, r)| {
                let rel = t.rel % num_relations;
                (Triple { rel, ..t }, r)
            })
            .collect();
        let mut out = aggregate(&folded, &ks)?;
        out.per_triple = self.per_triple.clone();
        Ok(out)
    }
}

fn metrics(ranks: &[f64], ks: &[usize]) -> (f64, Vec<(usize, f64)>) {
    let n = ranks.len() as f64;
    let mrr = ranks.iter().map(|r| 1.0 / r).sum::<f64>() / n;
    let hits = ks
        .iter()
        .map(|&k| (k, ranks.iter().filter(|&&r| r <= k as f64).count() as f64 / n))
        .collect();
    (mrr, hits)
}

/// MRR and hits@k over `ranks`, overall and per relation. hits@1, @3 and @10
/// are always included.
pub fn aggregate(ranks: &[(Triple, f64)], ks: &[usize]) -> Result<RankReport> {
    if ranks.is_empty() {
        return Err(Error::EmptyRanks);
    }
    let mut ks: Vec<usize> = ks.iter().copied().chain([1, 3, 10]).collect();
    ks.sort_unstable();
    ks.dedup();

    let all: Vec<f64> = ranks.iter().map(|(_, r)| *r).collect();
    let (mrr, hits_at) = metrics(&all, &ks);

    let mut by_rel: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (t, r) in ranks {
        by_rel.entry(t.rel).or_default().push(*r);
    }
    let per_relation = by_rel
        .into_iter()
        .map(|(rel, rs)| {
            let (mrr, hits) = metrics(&rs, &ks);
            (
                rel,
                RelationMetrics {
                    count: rs.len(),
                    mrr,
                    hits,
                },
            )
        })
        .collect();
    Ok(RankReport {
        per_triple: ranks.to_vec(),
        mrr,
        hits_at,
        per_relation,
    })
}

/// Ranks every triple in `triples` and aggregates.
pub fn evaluate(
    params: &ModelParams,
    triples: &[Triple],
    filter: &FilterIndex,
    protocol: &EvalProtocol<'_>,
) -> Result<RankReport> {
    protocol.validate()?;
    let mut buf = Vec::with_capacity(params.num_entities());
    let ranks = triples
        .iter()
        .map(|&t| rank_with_buffer(params, t, filter, protocol, &mut buf).map(|r| (t, r)))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&ranks, &protocol.ks)
}

/// Triples and filter to rank for a split. With `augmented` (and the
/// full-filtered protocol) reversed copies are added so both directions are
/// covered by tail prediction.
pub fn split_queries(
    store: &TripleStore,
    split: Split,
    protocol: &EvalProtocol<'_>,
    augmented: bool,
) -> (Vec<Triple>, Option<FilterIndex>) {
    let n_r = store.num_relations() as u32;
    let triples = store.split(split);
    if augmented && protocol.mode == ProtocolMode::FullFiltered {
        (
            augment_reverse(triples, n_r),
            Some(augmented_filter(&store.filter, n_r)),
        )
    } else {
        (triples.to_vec(), None)
    }
}

/// Full report for one split. Per-relation rows of an augmented model are
/// folded back onto the original relations.
pub fn evaluate_split(
    params: &ModelParams,
    store: &TripleStore,
    split: Split,
    protocol: &EvalProtocol<'_>,
    augmented: bool,
) -> Result<RankReport> {
    let (triples, filter) = split_queries(store, split, protocol, augmented);
    let report = evaluate(params, &triples, filter.as_ref().unwrap_or(&store.filter), protocol)?;
    if augmented {
        report.fold_relations(store.num_relations() as u32)
    } else {
        Ok(report)
    }
}
