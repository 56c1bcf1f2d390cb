//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pseudoe_core::data::{DatasetStats, NegativesTable, Split, TripleStore};
use pseudoe_core::eval::{beta_sweep, EvalProtocol, RankReport, SweepSpec};
use pseudoe_core::likelihood::sigmoid;
use pseudoe_core::training::{train, EpochRecord, TrainData, TrainObserver};
use pseudoe_core::ModelParams;

use crate::config::{Protocol, RunConfig};
use crate::{eval, io};

#[derive(Debug, Parser)]
#[command(name = "pseudoe", version, about = "Pseudo-Riemannian knowledge-graph embeddings")]
pub struct Cli {
    /// Evaluation worker threads (0 = one per core). `1` is fully deterministic.
    #[arg(long, global = true, env = "PSEUDOE_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model; writes model.ckpt, log.csv and config.resolved under --out.
    Train(TrainArgs),
    /// Rank a split with a saved model and write report.csv.
    Evaluate(EvaluateArgs),
    /// Top-scoring tails for one (head, relation) query.
    Rank(RankArgs),
    /// Per-relation MRR across mixing weights; writes sweep.csv.
    SweepBeta(SweepArgs),
    /// Entity, relation and split counts of a dataset.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Starting point: {wn18rr,fb15k,hetionet}-{mt,dt,both}.
    #[arg(long)]
    pub preset: Option<String>,
    /// `key = value` file applied over the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Single `key=value` override; repeatable, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Dataset directory holding train, valid and test files.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

impl ConfigArgs {
    /// Preset, then file, then `--set`, then dedicated flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.preset {
            Some(p) => RunConfig::preset(p)?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            c.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
        }
        for kv in &self.overrides {
            c.apply_override(kv)?;
        }
        if let Some(d) = &self.data {
            c.data = Some(d.clone());
        }
        if let Some(o) = &self.out {
            c.out = Some(o.clone());
        }
        if let Some(s) = self.seed {
            c.train.seed = s;
        }
        if let Some(e) = self.epochs {
            c.train.max_epochs = e;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Valid,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Valid => Split::Valid,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Full,
    Fixed,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    #[arg(long, value_enum, default_value = "full")]
    pub protocol: ProtocolArg,
    /// Fixed candidate lists, `head<TAB>relation<TAB>n1,n2,...`.
    #[arg(long)]
    pub negatives: Option<PathBuf>,
    /// Multiplies every node bias before ranking.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_b: Option<f64>,
    /// Adds one row per relation.
    #[arg(long)]
    pub per_relation: bool,
    /// Directory for report.csv (default: the checkpoint's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub head: String,
    /// Relation name; `name^-1` queries the reverse of an augmented model.
    #[arg(long)]
    pub relation: String,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_b: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Comma-separated mixing weights.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub betas: Vec<f64>,
    /// Rescore this model at each weight instead of retraining.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Training runs per weight when retraining.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, value_enum, default_value = "valid")]
    pub split: SplitArg,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Compare with published counts: wn18rr, fb15k-237 or hetionet.
    #[arg(long)]
    pub reference: Option<String>,
}

/// Runs a parsed command line, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let pool = eval::pool(cli.threads)?;
    match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, &pool, out),
        Command::Rank(a) => cmd_rank(&a, out),
        Command::SweepBeta(a) => cmd_sweep(&a, out),
        Command::Stats(a) => cmd_stats(&a, out),
    }
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| anyhow!("no {what} given (use --{what} or `{what} = ...`)"))
}

/// Fresh parameters sized for `store` under `config`.
pub fn init_model(config: &RunConfig, store: &TripleStore) -> Result<ModelParams> {
    let n_r = store.num_relations() * if config.train.augment_reverse { 2 } else { 1 };
    let mut m = ModelParams::init(
        store.num_entities(),
        n_r,
        config.geometry()?,
        config.tfd,
        config.variant,
        config.init(),
    )?;
    m.swap_transforms = config.swap_transforms;
    Ok(m)
}

struct Progress(Instant);

impl TrainObserver for Progress {
    fn elapsed_seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }

    fn on_epoch(&mut self, r: &EpochRecord) {
        if r.val_mrr.is_nan() {
            log::info!("epoch {} loss {:.5}", r.epoch, r.mean_loss);
        } else {
            log::info!(
                "epoch {} loss {:.5} val mrr {:.4} hits@10 {:.4}",
                r.epoch,
                r.mean_loss,
                r.val_mrr,
                r.val_hits10
            );
        }
    }
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let config = a.config.resolve()?;
    let data = require(&config.data, "data")?;
    let dir = require(&config.out, "out")?;
    let store = io::load_store(data)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut frozen = String::new();
    if let Some(p) = &a.config.preset {
        frozen.push_str(&format!("# preset {p}\n"));
    }
    frozen.push_str(&config.to_text());
    fs::write(dir.join(io::RESOLVED), frozen)?;

    let init = init_model(&config, &store)?;
    let train_data = TrainData {
        train: &store.train,
        valid: &store.valid,
        filter: &store.filter,
        num_entities: store.num_entities(),
        num_relations: store.num_relations(),
    };
    // validation always ranks against every entity; fixed lists usually cover test queries only
    let outcome = train(
        train_data,
        init,
        &config.train,
        &EvalProtocol::full_filtered(),
        &mut Progress(Instant::now()),
    )?;
    io::save_checkpoint(&dir.join(io::CHECKPOINT), &outcome.params)?;
    io::write_log(&dir.join(io::LOG), &outcome.log)?;
    writeln!(
        out,
        "trained {} epochs; best validation MRR {:.4} at epoch {}; wrote {}",
        outcome.log.len(),
        outcome.best_val_mrr,
        outcome.best_epoch,
        dir.display()
    )?;
    Ok(())
}

fn load_model_and_store(checkpoint: &Path, data: &Path) -> Result<(ModelParams, TripleStore)> {
    let params = io::load_checkpoint(checkpoint)?;
    let store = io::load_store(data)?;
    if params.num_entities() != store.num_entities() {
        bail!(
            "checkpoint has {} entities but {} has {}",
            params.num_entities(),
            data.display(),
            store.num_entities()
        );
    }
    let n_r = store.num_relations();
    if params.num_relations() != n_r && params.num_relations() != 2 * n_r {
        bail!(
            "checkpoint has {} relations but the dataset has {n_r}",
            params.num_relations()
        );
    }
    Ok((params, store))
}

fn scaled(params: ModelParams, gamma_b: Option<f64>) -> ModelParams {
    match gamma_b {
        Some(g) => params.scale_node_bias(g),
        None => params,
    }
}

fn print_report(out: &mut dyn Write, report: &RankReport, store: &TripleStore, per_relation: bool) -> Result<()> {
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    writeln!(
        out,
        "{:<24} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "relation", "count", "mrr", "hits@1", "hits@3", "hits@10"
    )?;
    writeln!(
        out,
        "{:<24} {:>8} {:>8.4} {:>8} {:>8} {:>8}",
        "all",
        report.len(),
        report.mrr,
        fmt(report.hits(1)),
        fmt(report.hits(3)),
        fmt(report.hits(10))
    )?;
    if per_relation {
        for (rel, m) in &report.per_relation {
            writeln!(
                out,
                "{:<24} {:>8} {:>8.4} {:>8} {:>8} {:>8}",
                io::relation_name(store, *rel),
                m.count,
                m.mrr,
                fmt(m.hits(1)),
                fmt(m.hits(3)),
                fmt(m.hits(10))
            )?;
        }
    }
    Ok(())
}

fn protocol_for<'a>(mode: Protocol, negatives: Option<&'a NegativesTable>) -> Result<EvalProtocol<'a>> {
    match (mode, negatives) {
        (Protocol::Full, _) => Ok(EvalProtocol::full_filtered()),
        (Protocol::Fixed, Some(t)) => Ok(EvalProtocol::fixed_negatives(t)),
        (Protocol::Fixed, None) => bail!("the fixed protocol needs --negatives"),
    }
}

fn cmd_evaluate(a: &EvaluateArgs, pool: &rayon::ThreadPool, out: &mut dyn Write) -> Result<()> {
    let (params, store) = load_model_and_store(&a.checkpoint, &a.data)?;
    let params = scaled(params, a.gamma_b);
    let table = a
        .negatives
        .as_deref()
        .map(|p| io::load_negatives(p, &store))
        .transpose()?;
    let mode = match a.protocol {
        ProtocolArg::Full => Protocol::Full,
        ProtocolArg::Fixed => Protocol::Fixed,
    };
    let protocol = protocol_for(mode, table.as_ref())?;
    let report = pool.install(|| eval::evaluate_split(&params, &store, a.split.into(), &protocol))?;
    print_report(out, &report, &store, a.per_relation)?;
    let dir = match &a.out {
        Some(d) => d.clone(),
        None => a
            .checkpoint
            .parent()
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    fs::create_dir_all(&dir)?;
    io::write_report(&dir.join(io::REPORT), &report, &store, a.per_relation)?;
    Ok(())
}

fn lookup(vocab: &pseudoe_core::data::Vocab, kind: &str, name: &str) -> Result<u32> {
    vocab.id(name).ok_or_else(|| {
        let near = vocab.near_misses(name, 5);
        if near.is_empty() {
            anyhow!("unknown {kind} `{name}`")
        } else {
            anyhow!("unknown {kind} `{name}`; closest: {}", near.join(", "))
        }
    })
}

fn cmd_rank(a: &RankArgs, out: &mut dyn Write) -> Result<()> {
    let (params, store) = load_model_and_store(&a.checkpoint, &a.data)?;
    let params = scaled(params, a.gamma_b);
    let head = lookup(&store.entities, "entity", &a.head)?;
    let rel = match a.relation.strip_suffix("^-1") {
        Some(base) if eval::is_augmented(&params, &store) => {
            lookup(&store.relations, "relation", base)? + store.num_relations() as u32
        }
        Some(_) => bail!("`{}`: this model has no reversed relations", a.relation),
        None => lookup(&store.relations, "relation", &a.relation)?,
    };
    let mut scores = Vec::new();
    params.score_all_tails(head, rel, &mut scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));
    let degrees = store.train_degrees();
    writeln!(
        out,
        "{:>5}  {:<32} {:>12} {:>12} {:>8}",
        "rank", "tail", "score", "probability", "degree"
    )?;
    for (i, &c) in order.iter().take(a.top).enumerate() {
        writeln!(
            out,
            "{:>5}  {:<32} {:>12.5} {:>12.6} {:>8}",
            i + 1,
            store.entities.name(c as u32).unwrap_or("?"),
            scores[c],
            sigmoid(scores[c]),
            degrees[c]
        )?;
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let config = a.config.resolve()?;
    let store = io::load_store(require(&config.data, "data")?)?;
    let dir = require(&config.out, "out")?;
    let table = config
        .negatives
        .as_deref()
        .map(|p| io::load_negatives(p, &store))
        .transpose()?;
    let protocol = protocol_for(config.protocol, table.as_ref())?;
    let template = match &a.checkpoint {
        Some(p) => {
            let (m, _) = load_model_and_store(p, require(&config.data, "data")?)?;
            m
        }
        None => init_model(&config, &store)?,
    };
    let mut train_config = config.train.clone();
    train_config.augment_reverse = eval::is_augmented(&template, &store);
    let spec = SweepSpec {
        betas: a.betas.clone(),
        repeats: a.repeats,
        retrain: a.checkpoint.is_none(),
        split: a.split.into(),
    };
    let rows = beta_sweep(&template, &store, &train_config, config.init(), &protocol, &spec)?;
    fs::create_dir_all(dir)?;
    io::write_sweep(&dir.join(io::SWEEP), &rows, &store)?;
    writeln!(out, "{:>6}  {:<24} {:>8} {:>8}", "beta", "relation", "mrr", "sd")?;
    for r in &rows {
        writeln!(
            out,
            "{:>6}  {:<24} {:>8.4} {:>8.4}",
            r.beta,
            io::relation_name(&store, r.relation),
            r.mrr,
            r.sd
        )?;
    }
    Ok(())
}

fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let store = io::load_store(&a.data)?;
    let s = store.stats();
    writeln!(out, "entities   {}", s.entities)?;
    writeln!(out, "relations  {}", s.relations)?;
    writeln!(out, "train      {}", s.train)?;
    writeln!(out, "valid      {}", s.valid)?;
    writeln!(out, "test       {}", s.test)?;
    writeln!(out, "unseen in train  {}", store.unseen_in_train)?;
    if let Some(name) = &a.reference {
        let expected = DatasetStats::reference(name).ok_or_else(|| anyhow!("no published counts for `{name}`"))?;
        let bad = s.mismatches(&expected);
        if bad.is_empty() {
            writeln!(out, "matches {name}")?;
        } else {
            bail!("counts differ from {name} in: {}", bad.join(", "));
        }
    }
    Ok(())
}
