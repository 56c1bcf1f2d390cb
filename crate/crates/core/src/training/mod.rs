//! Negative-sampling training: loss, gradients, optimizers and the
//! minibatch loop with early stopping on validation MRR.

mod grad;
mod optim;
mod sampling;

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use grad::{gradients, tfd_index, GradientTape, SparseRows};
pub use optim::{OptimizerKind, OptimizerState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use sampling::{augment_reverse, sample_negatives, SampleMode};

use crate::data::FilterIndex;
use crate::error::{invalid, Error, Result};
use crate::eval::{self, EvalProtocol, ProtocolMode};
use crate::likelihood::softplus;
use crate::model::ModelParams;
use crate::Triple;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Negatives per positive; must be even.
    pub m_negatives: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub max_epochs: usize,
    /// Epochs between validation passes.
    pub eval_every: usize,
    /// Validation rounds without improvement before stopping.
    pub patience: usize,
    /// Train on reversed triples too; forces tail-only corruption.
    pub augment_reverse: bool,
    /// Also learn tau1, tau2, u, alpha and alpha'.
    pub train_tfd: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            m_negatives: 50,
            batch_size: 128,
            learning_rate: 0.01,
            optimizer: OptimizerKind::Adam,
            max_epochs: 100,
            eval_every: 5,
            patience: 10,
            augment_reverse: false,
            train_tfd: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_negatives % 2 != 0 {
            return Err(invalid("m_negatives must be even"));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.eval_every == 0 || self.patience == 0 {
            return Err(invalid(
                "batch_size, max_epochs, eval_every and patience must be positive",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate must be positive"));
        }
        Ok(())
    }

    pub fn sample_mode(&self) -> SampleMode {
        if self.augment_reverse {
            SampleMode::TailOnly
        } else {
            SampleMode::Both
        }
    }
}

/// Negative log-likelihood of `positives` (label 1) and `negatives` (label 0).
pub fn nll_loss(params: &ModelParams, positives: &[Triple], negatives: &[Triple]) -> Result<f64> {
    let mut loss = 0.0;
    for t in positives {
        loss += softplus(-params.score(t.head, t.rel, t.tail)?);
    }
    for t in negatives {
        loss += softplus(params.score(t.head, t.rel, t.tail)?);
    }
    Ok(loss)
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Loss per positive triple.
    pub mean_loss: f64,
    /// `NaN` on epochs without a validation pass.
    pub val_mrr: f64,
    pub val_hits10: f64,
    pub wall_seconds: f64,
}

/// Hooks into the training loop. `elapsed_seconds` supplies wall-clock time
/// for the log, which this crate cannot read itself.
pub trait TrainObserver {
    fn elapsed_seconds(&self) -> f64 {
        0.0
    }

    fn on_epoch(&mut self, _record: &EpochRecord) {}
}

impl TrainObserver for () {}

/// Triples and lookups the loop needs, already integer-encoded.
#[derive(Debug, Clone, Copy)]
pub struct TrainData<'a> {
    pub train: &'a [Triple],
    pub valid: &'a [Triple],
    /// All known triples, used to filter validation ranks.
    pub filter: &'a FilterIndex,
    pub num_entities: usize,
    pub num_relations: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation round (the last epoch when there
    /// is no validation data).
    pub params: ModelParams,
    pub log: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_mrr: f64,
}

/// Sample, differentiate and update for a single minibatch. Returns the
/// batch loss.
pub fn train_step<R: rand::Rng + ?Sized>(
    params: &mut ModelParams,
    state: &mut OptimizerState,
    batch: &[Triple],
    config: &TrainConfig,
    rng: &mut R,
    negatives: &mut Vec<Triple>,
) -> Result<f64> {
    negatives.clear();
    let n = params.num_entities() as u32;
    for &t in batch {
        sample_negatives(t, config.m_negatives, config.sample_mode(), n, rng, negatives);
    }
    let tape = gradients(params, batch, negatives, config.train_tfd)?;
    state.step(params, &tape, config.learning_rate);
    Ok(tape.loss)
}

/// Trains from `init` and returns the best-validation checkpoint.
///
/// With `augment_reverse`, `data` holds the original triples; reversed
/// copies get relation ids offset by `data.num_relations`, so `params` must
/// carry twice as many relations. Validation then ranks tails of both
/// directions (full-filtered protocol only).
pub fn train(
    data: TrainData<'_>,
    init: ModelParams,
    config: &TrainConfig,
    protocol: &EvalProtocol<'_>,
    observer: &mut dyn TrainObserver,
) -> Result<TrainOutcome> {
    config.validate()?;
    init.validate()?;
    let n_r = data.num_relations as u32;
    let expected_rel = if config.augment_reverse {
        2 * data.num_relations
    } else {
        data.num_relations
    };
    if init.num_relations() != expected_rel || init.num_entities() != data.num_entities {
        return Err(invalid("model size does not match the data"));
    }

    let mut train_set: Vec<Triple> = if config.augment_reverse {
        augment_reverse(data.train, n_r)
    } else {
        data.train.to_vec()
    };
    let augmented_eval = config.augment_reverse && protocol.mode == ProtocolMode::FullFiltered;
    let (valid_set, aug_filter);
    let filter = if augmented_eval {
        valid_set = augment_reverse(data.valid, n_r);
        aug_filter = augmented_filter(data.filter, n_r);
        &aug_filter
    } else {
        valid_set = data.valid.to_vec();
        data.filter
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init;
    let mut state = OptimizerState::new(config.optimizer, &params);
    let mut negatives = Vec::with_capacity(config.batch_size * config.m_negatives);
    let mut log = Vec::new();
    let mut best: Option<(ModelParams, usize, f64)> = None;
    let mut stale_rounds = 0;

    for epoch in 1..=config.max_epochs {
        train_set.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in train_set.chunks(config.batch_size) {
            total += train_step(&mut params, &mut state, batch, config, &mut rng, &mut negatives)?;
        }
        let mean_loss = total / train_set.len().max(1) as f64;
        if !mean_loss.is_finite() {
            return Err(Error::Diverged { epoch, loss: mean_loss });
        }

        let mut record = EpochRecord {
            epoch,
            mean_loss,
            val_mrr: f64::NAN,
            val_hits10: f64::NAN,
            wall_seconds: 0.0,
        };
        let mut stop = false;
        if !valid_set.is_empty() && (epoch % config.eval_every == 0 || epoch == config.max_epochs) {
            let report = eval::evaluate(&params, &valid_set, filter, protocol)?;
            record.val_mrr = report.mrr;
            record.val_hits10 = report.hits(10).unwrap_or(f64::NAN);
            match &best {
                Some((_, _, mrr)) if report.mrr <= *mrr => {
                    stale_rounds += 1;
                    stop = stale_rounds >= config.patience;
                }
                _ => {
                    best = Some((params.clone(), epoch, report.mrr));
                    stale_rounds = 0;
                }
            }
        }
        record.wall_seconds = observer.elapsed_seconds();
        observer.on_epoch(&record);
        log.push(record);
        if stop {
            break;
        }
    }

    let last_epoch = log.last().map_or(0, |r| r.epoch);
    let (params, best_epoch, best_val_mrr) = best.unwrap_or((params, last_epoch, f64::NAN));
    Ok(TrainOutcome {
        params,
        log,
        best_epoch,
        best_val_mrr,
    })
}

/// Filter index extended with the reverse of every known triple.
pub fn augmented_filter(filter: &FilterIndex, num_relations: u32) -> FilterIndex {
    let mut out = filter.clone();
    for t in filter.iter() {
        out.insert(Triple {
            head: t.tail,
            rel: t.rel + num_relations,
            tail: t.head,
        });
    }
    out
}
