//! Dataset files, checkpoints and CSV outputs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pseudoe_core::checkpoint;
use pseudoe_core::data::{parse_triples, NegativesTable, RawTriple, TripleStore};
use pseudoe_core::eval::{RankReport, SweepRow};
use pseudoe_core::training::EpochRecord;
use pseudoe_core::ModelParams;

pub const CHECKPOINT: &str = "model.ckpt";
pub const LOG: &str = "log.csv";
pub const RESOLVED: &str = "config.resolved";
pub const REPORT: &str = "report.csv";
pub const SWEEP: &str = "sweep.csv";

/// Reads one triple file.
pub fn load_triples(path: &Path) -> Result<Vec<RawTriple>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_triples(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `dir/{split}.txt`, falling back to `dir/{split}.tsv`.
fn split_file(dir: &Path, split: &str) -> Result<PathBuf> {
    for ext in ["txt", "tsv"] {
        let p = dir.join(format!("{split}.{ext}"));
        if p.is_file() {
            return Ok(p);
        }
    }
    bail!("no {split}.txt or {split}.tsv in {}", dir.display())
}

/// Loads the train, valid and test splits of a dataset directory.
pub fn load_store(dir: &Path) -> Result<TripleStore> {
    let train = load_triples(&split_file(dir, "train")?)?;
    let valid = load_triples(&split_file(dir, "valid")?)?;
    let test = load_triples(&split_file(dir, "test")?)?;
    let store = TripleStore::build(&train, &valid, &test);
    if store.unseen_in_train > 0 {
        log::warn!("{} entities never occur in the training split", store.unseen_in_train);
    }
    Ok(store)
}

pub fn load_negatives(path: &Path, store: &TripleStore) -> Result<NegativesTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NegativesTable::parse(&text, store).with_context(|| format!("parsing {}", path.display()))
}

pub fn save_checkpoint(path: &Path, params: &ModelParams) -> Result<()> {
    fs::write(path, checkpoint::encode(params)).with_context(|| format!("writing {}", path.display()))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    checkpoint::decode(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn opt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

pub fn write_log(path: &Path, log: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "mean_loss", "val_mrr", "val_hits10", "wall_seconds"])?;
    for r in log {
        w.write_record([
            r.epoch.to_string(),
            r.mean_loss.to_string(),
            opt(r.val_mrr),
            opt(r.val_hits10),
            r.wall_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Overall row named `all`, then one row per relation when `per_relation`.
pub fn write_report(path: &Path, report: &RankReport, store: &TripleStore, per_relation: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["relation", "count", "mrr", "hits1", "hits3", "hits10"])?;
    let hit = |h: Option<f64>| h.map_or(String::new(), |v| v.to_string());
    w.write_record([
        "all".to_string(),
        report.len().to_string(),
        report.mrr.to_string(),
        hit(report.hits(1)),
        hit(report.hits(3)),
        hit(report.hits(10)),
    ])?;
    if per_relation {
        for (rel, m) in &report.per_relation {
            w.write_record([
                relation_name(store, *rel),
                m.count.to_string(),
                m.mrr.to_string(),
                hit(m.hits(1)),
                hit(m.hits(3)),
                hit(m.hits(10)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, rows: &[SweepRow], store: &TripleStore) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["beta", "relation", "mrr", "sd"])?;
    for r in rows {
        w.write_record([
            r.beta.to_string(),
            relation_name(store, r.relation),
            r.mrr.to_string(),
            r.sd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Relation name, with reversed ids of an augmented model shown as `name^-1`.
pub fn relation_name(store: &TripleStore, rel: u32) -> String {
    let n_r = store.num_relations() as u32;
    let base = store.relations.name(rel % n_r.max(1)).unwrap_or("?");
    if rel >= n_r {
        format!("{base}^-1")
    } else {
        base.to_string()
    }
}
