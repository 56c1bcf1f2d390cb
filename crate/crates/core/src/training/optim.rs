//! Sparse first-order optimizers: plain SGD, Adam and SM3.
//!
//! Only rows present in the gradient tape are updated. Adam keeps dense
//! moment tables and a global step count for bias correction. SM3 covers the
//! node-coordinate table with its rows and columns and every other parameter
//! with singleton sets, so it degenerates to Adagrad outside the big table.

use alloc::vec;
use alloc::vec::Vec;

use super::grad::{tfd_index, GradientTape, SparseRows};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
    Sm3,
}

impl OptimizerKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Some(Self::Sgd),
            "adam" => Some(Self::Adam),
            "sm3" => Some(Self::Sm3),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sgd => "sgd",
            Self::Adam => "adam",
            Self::Sm3 => "sm3",
        }
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum GroupState {
    Sgd,
    Adam(Moments),
    /// One accumulator per coordinate.
    Sm3Diag(Vec<f64>),
    /// Row and column accumulators of a table.
    Sm3RowCol {
        rows: Vec<f64>,
        cols: Vec<f64>,
    },
}

impl GroupState {
    fn new(kind: OptimizerKind, rows: usize, width: usize, row_col: bool) -> Self {
        match kind {
            OptimizerKind::Sgd => GroupState::Sgd,
            OptimizerKind::Adam => GroupState::Adam(Moments {
                m: vec![0.0; rows * width],
                v: vec![0.0; rows * width],
            }),
            OptimizerKind::Sm3 if row_col => GroupState::Sm3RowCol {
                rows: vec![0.0; rows],
                cols: vec![0.0; width],
            },
            OptimizerKind::Sm3 => GroupState::Sm3Diag(vec![0.0; rows * width]),
        }
    }
}

/// Optimizer state for every parameter group of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    step: u64,
    groups: [GroupState; 6],
    tfd: GroupState,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, params: &ModelParams) -> Self {
        let n = params.num_entities();
        let n_r = params.num_relations();
        let p = params.geometry.signature.projected_dim();
        let groups = [
            GroupState::new(kind, n, params.geometry.signature.dim(), true),
            GroupState::new(kind, n, 1, false),
            GroupState::new(kind, n_r, p, false),
            GroupState::new(kind, n_r, p, false),
            GroupState::new(kind, n_r, params.n_t(), false),
            GroupState::new(kind, n_r, 1, false),
        ];
        Self {
            kind,
            step: 0,
            groups,
            tfd: GroupState::new(kind, 1, 5, false),
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// SM3 row/column accumulators of the node-coordinate table.
    pub fn sm3_cover_accumulators(&self) -> Option<(&[f64], &[f64])> {
        match &self.groups[0] {
            GroupState::Sm3RowCol { rows, cols } => Some((rows, cols)),
            _ => None,
        }
    }

    /// Applies one update with learning rate `lr`.
    pub fn step(&mut self, params: &mut ModelParams, tape: &GradientTape, lr: f64) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - libm::pow(ADAM_BETA1, t as f64);
        let bc2 = 1.0 - libm::pow(ADAM_BETA2, t as f64);
        let ctx = StepCtx { lr, bc1, bc2 };

        let [g0, g1, g2, g3, g4, g5] = &mut self.groups;
        update_group(g0, params.node_coords.as_mut_slice(), &tape.node_coords, ctx);
        update_group(g1, &mut params.node_bias, &tape.node_bias, ctx);
        update_group(g2, params.rel_u.as_mut_slice(), &tape.rel_u, ctx);
        update_group(g3, params.rel_r.as_mut_slice(), &tape.rel_r, ctx);
        update_group(g4, params.rel_h.as_mut_slice(), &tape.rel_h, ctx);
        update_group(g5, &mut params.rel_c, &tape.rel_c, ctx);

        if let Some(grad) = &tape.tfd {
            let tfd = &mut params.tfd;
            let mut vals = [tfd.tau1, tfd.tau2, tfd.u, tfd.alpha, tfd.alpha_prime];
            let mut rows = SparseRows::new(5);
            rows.row_mut(0).copy_from_slice(grad);
            update_group(&mut self.tfd, &mut vals, &rows, ctx);
            use tfd_index::*;
            tfd.tau1 = vals[TAU1].max(1e-6);
            tfd.tau2 = vals[TAU2].max(1e-6);
            tfd.u = vals[U].max(0.0);
            tfd.alpha = vals[ALPHA].clamp(0.0, 1.0);
            tfd.alpha_prime = vals[ALPHA_PRIME].clamp(0.0, 1.0);
        }
    }
}

#[derive(Clone, Copy)]
struct StepCtx {
    lr: f64,
    bc1: f64,
    bc2: f64,
}

fn update_group(state: &mut GroupState, data: &mut [f64], grads: &SparseRows, ctx: StepCtx) {
    let w = grads.width();
    match state {
        GroupState::Sgd => {
            for (i, g) in grads.iter() {
                for (p, g) in data[i * w..(i + 1) * w].iter_mut().zip(g) {
                    *p -= ctx.lr * g;
                }
            }
        }
        GroupState::Adam(Moments { m, v }) => {
            for (i, g) in grads.iter() {
                let range = i * w..(i + 1) * w;
                let (p, m, v) = (&mut data[range.clone()], &mut m[range.clone()], &mut v[range]);
                for a in 0..w {
                    m[a] = ADAM_BETA1 * m[a] + (1.0 - ADAM_BETA1) * g[a];
                    v[a] = ADAM_BETA2 * v[a] + (1.0 - ADAM_BETA2) * g[a] * g[a];
                    let m_hat = m[a] / ctx.bc1;
                    let v_hat = v[a] / ctx.bc2;
                    p[a] -= ctx.lr * m_hat / (libm::sqrt(v_hat) + ADAM_EPS);
                }
            }
        }
        GroupState::Sm3Diag(acc) => {
            for (i, g) in grads.iter() {
                for (a, &ga) in g.iter().enumerate() {
                    let idx = i * w + a;
                    acc[idx] += ga * ga;
                    if acc[idx] > 0.0 {
                        data[idx] -= ctx.lr * ga / libm::sqrt(acc[idx]);
                    }
                }
            }
        }
        GroupState::Sm3RowCol { rows, cols } => {
            // nu for every touched entry from the previous accumulators, then
            // fold the new maxima back into the covers
            let mut nus = Vec::with_capacity(grads.len() * w);
            for (i, g) in grads.iter() {
                for a in 0..w {
                    let nu = rows[i].min(cols[a]) + g[a] * g[a];
                    if nu > 0.0 {
                        data[i * w + a] -= ctx.lr * g[a] / libm::sqrt(nu);
                    }
                    nus.push(nu);
                }
            }
            for ((i, _), row_nu) in grads.iter().zip(nus.chunks(w.max(1))) {
                for (a, &nu) in row_nu.iter().enumerate() {
                    rows[i] = rows[i].max(nu);
                    cols[a] = cols[a].max(nu);
                }
            }
        }
    }
}
