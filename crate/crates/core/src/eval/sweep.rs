//! Per-relation MRR as a function of the mixing weight beta.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{evaluate, split_queries, EvalProtocol};
use crate::data::{Split, TripleStore};
use crate::error::{invalid, Result};
use crate::model::{InitConfig, ModelParams};
use crate::training::{train, TrainConfig, TrainData};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub betas: Vec<f64>,
    /// Training runs per beta, seeds `seed..seed + repeats`.
    pub repeats: usize,
    /// Retrain at each beta; otherwise rescore the template model.
    pub retrain: bool,
    pub split: Split,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub relation: u32,
    pub mrr: f64,
    /// Sample standard deviation across repeats, 0 for a single run.
    pub sd: f64,
}

/// Runs the sweep. `template` supplies geometry, likelihood settings and
/// variant (and the parameters themselves when rescoring); `init` seeds
/// fresh models when retraining.
pub fn beta_sweep(
    template: &ModelParams,
    store: &TripleStore,
    train_config: &TrainConfig,
    init: InitConfig,
    protocol: &EvalProtocol<'_>,
    spec: &SweepSpec,
) -> Result<Vec<SweepRow>> {
    if spec.betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
        return Err(invalid("beta values must lie in [0, 1]"));
    }
    let augmented = train_config.augment_reverse;
    let n_r = store.num_relations() as u32;
    let (queries, aug_filter) = split_queries(store, spec.split, protocol, augmented);
    let filter = aug_filter.as_ref().unwrap_or(&store.filter);
    let repeats = if spec.retrain { spec.repeats.max(1) } else { 1 };

    let mut rows = Vec::new();
    for &beta in &spec.betas {
        let mut per_rel: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
        for rep in 0..repeats {
            let mut tfd = template.tfd;
            tfd.beta = beta;
            let params = if spec.retrain {
                let seed = init.seed.wrapping_add(rep as u64);
                let mut fresh = ModelParams::init(
                    store.num_entities(),
                    template.num_relations(),
                    template.geometry,
                    tfd,
                    template.variant,
                    InitConfig { seed, ..init },
                )?;
                fresh.swap_transforms = template.swap_transforms;
                let cfg = TrainConfig {
                    seed: train_config.seed.wrapping_add(rep as u64),
                    ..train_config.clone()
                };
                let data = TrainData {
                    train: &store.train,
                    valid: &store.valid,
                    filter: &store.filter,
                    num_entities: store.num_entities(),
                    num_relations: store.num_relations(),
                };
                train(data, fresh, &cfg, protocol, &mut ())?.params
            } else {
                let mut p = template.clone();
                p.tfd = tfd;
                p
            };
            let mut report = evaluate(&params, &queries, filter, protocol)?;
            if augmented {
                report = report.fold_relations(n_r)?;
            }
            for (rel, m) in report.per_relation {
                per_rel.entry(rel).or_default().push(m.mrr);
            }
        }
        for (relation, mrrs) in per_rel {
            let n = mrrs.len() as f64;
            let mean = mrrs.iter().sum::<f64>() / n;
            let sd = if mrrs.len() > 1 {
                libm::sqrt(mrrs.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0))
            } else {
                0.0
            };
            rows.push(SweepRow {
                beta,
                relation,
                mrr: mean,
                sd,
            });
        }
    }
    Ok(rows)
}
