//! Thread-parallel evaluation on top of the core ranking.

use anyhow::{Context, Result};
use pseudoe_core::data::{FilterIndex, Split, TripleStore};
use pseudoe_core::eval::{aggregate, filtered_rank, split_queries, EvalProtocol, RankReport};
use pseudoe_core::{ModelParams, Triple};
use rayon::prelude::*;

/// Thread pool with `threads` workers; 0 lets rayon decide.
pub fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("starting the evaluation thread pool")
}

/// Same result as the sequential core evaluation, for any thread count.
pub fn evaluate(
    params: &ModelParams,
    triples: &[Triple],
    filter: &FilterIndex,
    protocol: &EvalProtocol<'_>,
) -> Result<RankReport> {
    protocol.validate()?;
    let ranks = triples
        .par_iter()
        .map(|&t| filtered_rank(params, t, filter, protocol).map(|r| (t, r)))
        .collect::<pseudoe_core::Result<Vec<_>>>()?;
    Ok(aggregate(&ranks, &protocol.ks)?)
}

/// Whether `params` was trained with reversed copies of the relations.
pub fn is_augmented(params: &ModelParams, store: &TripleStore) -> bool {
    params.num_relations() == 2 * store.num_relations()
}

/// Parallel counterpart of the core split evaluation.
pub fn evaluate_split(
    params: &ModelParams,
    store: &TripleStore,
    split: Split,
    protocol: &EvalProtocol<'_>,
) -> Result<RankReport> {
    let augmented = is_augmented(params, store);
    let (triples, filter) = split_queries(store, split, protocol, augmented);
    let report = evaluate(params, &triples, filter.as_ref().unwrap_or(&store.filter), protocol)?;
    if augmented {
        Ok(report.fold_relations(store.num_relations() as u32)?)
    } else {
        Ok(report)
    }
}
