//! Synthetic graphs and small helpers shared by the integration tests.

#![allow(dead_code)]

use pseudoe_core::data::FilterIndex;
use pseudoe_core::eval::EvalProtocol;
use pseudoe_core::training::{train, OptimizerKind, TrainConfig, TrainData, TrainOutcome};
use pseudoe_core::{GeometryConfig, InitConfig, ModelParams, TfdParams, Triple, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TREE: u32 = 0;
pub const CLIQUE: u32 = 1;

/// Likelihood settings of the WordNet presets.
pub fn wordnet_tfd(beta: f64) -> TfdParams {
    TfdParams {
        tau1: 0.29015,
        tau2: 0.21697,
        u: 0.040226,
        alpha: 0.3673,
        alpha_prime: 0.75182,
        k_scale: 1.0,
        beta,
    }
}

/// Binary tree `parent -> child` on `0..n` (relation [`TREE`]) plus
/// symmetric cliques over consecutive groups of `clique` nodes
/// (relation [`CLIQUE`]). Cliques include self-loops, so the relation is
/// "same group as".
pub fn tree_and_cliques(n: u32, clique: u32) -> Vec<Triple> {
    let mut out = Vec::new();
    for v in 1..n {
        out.push(Triple::new((v - 1) / 2, TREE, v));
    }
    for base in (0..n).step_by(clique as usize) {
        let end = (base + clique).min(n);
        for a in base..end {
            for b in base..end {
                out.push(Triple::new(a, CLIQUE, b));
            }
        }
    }
    out
}

/// Directed chain `i -> i+1` and skip edges `i -> i+2` on `0..n`, one
/// relation. Every `hold_every`-th unit edge is returned separately.
pub fn chain(n: u32, hold_every: u32) -> (Vec<Triple>, Vec<Triple>) {
    let (mut train, mut held) = (Vec::new(), Vec::new());
    for i in 0..n - 1 {
        let t = Triple::new(i, 0, i + 1);
        if i % hold_every == hold_every / 2 {
            held.push(t);
        } else {
            train.push(t);
        }
        if i + 2 < n {
            train.push(Triple::new(i, 0, i + 2));
        }
    }
    (train, held)
}

/// Chain of `layers` groups of `width` nodes, every node linked to every
/// node of the next group under one relation. Every `hold_every`-th edge
/// is returned separately.
pub fn layered_chain(layers: u32, width: u32, hold_every: usize) -> (Vec<Triple>, Vec<Triple>) {
    let (mut train, mut held) = (Vec::new(), Vec::new());
    let mut i = 0;
    for l in 0..layers - 1 {
        for a in 0..width {
            for b in 0..width {
                let t = Triple::new(l * width + a, 0, (l + 1) * width + b);
                if i % hold_every == hold_every / 2 {
                    held.push(t);
                } else {
                    train.push(t);
                }
                i += 1;
            }
        }
    }
    (train, held)
}

/// Preferential-attachment graph: each new node links to `per_node`
/// existing nodes drawn proportionally to degree + 1. One relation, edges
/// point from the newer node to the older one.
pub fn preferential_attachment(n: u32, per_node: usize, seed: u64) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n as usize];
    let mut out: Vec<Triple> = Vec::new();
    for v in 1..n {
        let mut chosen = Vec::new();
        for _ in 0..per_node.min(v as usize) {
            let total: usize = degree[..v as usize].iter().map(|d| d + 1).sum();
            let mut pick = rng.random_range(0..total);
            let mut target = 0;
            for (u, d) in degree[..v as usize].iter().enumerate() {
                if pick < d + 1 {
                    target = u as u32;
                    break;
                }
                pick -= d + 1;
            }
            if !chosen.contains(&target) {
                chosen.push(target);
            }
        }
        for t in chosen {
            degree[v as usize] += 1;
            degree[t as usize] += 1;
            out.push(Triple::new(v, 0, t));
        }
    }
    out
}

/// Degree-corrected block graph: `edges` distinct directed edges under one
/// relation. Endpoint weights fall off as `1 / rank` within each block;
/// a fraction `inside` of tails share the head's block.
pub fn skewed_blocks(n: u32, blocks: u32, edges: usize, inside: f64, seed: u64) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = |v: u32| v % blocks;
    let weight: Vec<f64> = (0..n).map(|v| 1.0 / (1.0 + (v / blocks) as f64)).collect();
    let draw = |rng: &mut ChaCha8Rng, pool: &[u32]| -> u32 {
        let total: f64 = pool.iter().map(|&v| weight[v as usize]).sum();
        let mut x = rng.random::<f64>() * total;
        for &v in pool {
            x -= weight[v as usize];
            if x <= 0.0 {
                return v;
            }
        }
        *pool.last().unwrap()
    };
    let all: Vec<u32> = (0..n).collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < edges {
        let h = draw(&mut rng, &all);
        let t = if rng.random::<f64>() < inside {
            let same: Vec<u32> = all.iter().copied().filter(|&v| block(v) == block(h)).collect();
            draw(&mut rng, &same)
        } else {
            draw(&mut rng, &all)
        };
        if h != t && seen.insert((h, t)) {
            out.push(Triple::new(h, 0, t));
        }
    }
    out
}

pub fn degrees(triples: &[Triple], n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for t in triples {
        d[t.head as usize] += 1;
        d[t.tail as usize] += 1;
    }
    d
}

pub fn filter_of(sets: &[&[Triple]]) -> FilterIndex {
    sets.iter().flat_map(|s| s.iter().copied()).collect()
}

pub struct Run<'a> {
    pub train: &'a [Triple],
    pub valid: &'a [Triple],
    pub num_entities: usize,
    pub num_relations: usize,
    pub geometry: GeometryConfig,
    pub tfd: TfdParams,
    pub variant: Variant,
    pub sigma_init: f64,
    pub config: TrainConfig,
}

impl Run<'_> {
    pub fn fit(&self) -> pseudoe_core::Result<TrainOutcome> {
        let filter = filter_of(&[self.train, self.valid]);
        let init = ModelParams::init(
            self.num_entities,
            self.num_relations,
            self.geometry,
            self.tfd,
            self.variant,
            InitConfig {
                sigma_init: self.sigma_init,
                seed: self.config.seed,
            },
        )
        .unwrap();
        let data = TrainData {
            train: self.train,
            valid: self.valid,
            filter: &filter,
            num_entities: self.num_entities,
            num_relations: self.num_relations,
        };
        train(data, init, &self.config, &EvalProtocol::full_filtered(), &mut ())
    }
}

/// Optimizer and learning rate pairs used by the synthetic runs.
pub fn optimizer_presets() -> [(OptimizerKind, f64); 3] {
    [
        (OptimizerKind::Sgd, 0.004),
        (OptimizerKind::Adam, 0.08),
        (OptimizerKind::Sm3, 0.08),
    ]
}
