//! Exact gradients of the negative-sampling loss.
//!
//! The score is a fixed composition (projection, relation maps, interval,
//! Fermi-Dirac factors, mixing, logit, biases), so the chain rule is written
//! out by hand rather than going through a general tape.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::likelihood::{log1mexp, sigmoid, softplus};
use crate::model::{ModelParams, Variant};
use crate::Triple;

/// Gradient rows keyed by row index; absent rows are exactly zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRows {
    width: usize,
    rows: BTreeMap<usize, Vec<f64>>,
}

impl SparseRows {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: BTreeMap::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.width;
        self.rows.entry(i).or_insert_with(|| vec![0.0; w])
    }

    pub fn get(&self, i: usize) -> Option<&[f64]> {
        self.rows.get(&i).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.rows.iter().map(|(i, r)| (*i, r.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn clear(&mut self) {
        self.rows.clear();
    }

    fn merge(&mut self, other: &SparseRows) {
        for (i, r) in other.iter() {
            for (a, b) in self.row_mut(i).iter_mut().zip(r) {
                *a += b;
            }
        }
    }
}

/// Index of the likelihood parameters in [`GradientTape::tfd`].
pub mod tfd_index {
    pub const TAU1: usize = 0;
    pub const TAU2: usize = 1;
    pub const U: usize = 2;
    pub const ALPHA: usize = 3;
    pub const ALPHA_PRIME: usize = 4;
}

/// Accumulated partial derivatives for one minibatch, laid out like
/// [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTape {
    pub node_coords: SparseRows,
    pub node_bias: SparseRows,
    pub rel_u: SparseRows,
    pub rel_r: SparseRows,
    pub rel_h: SparseRows,
    pub rel_c: SparseRows,
    /// `d loss / d (tau1, tau2, u, alpha, alpha')`, filled only when the
    /// likelihood parameters are trained.
    pub tfd: Option<[f64; 5]>,
    /// Loss of the batch the tape was built from.
    pub loss: f64,
}

impl GradientTape {
    pub fn new(params: &ModelParams, with_tfd: bool) -> Self {
        let p = params.geometry.signature.projected_dim();
        Self {
            node_coords: SparseRows::new(params.geometry.signature.dim()),
            node_bias: SparseRows::new(1),
            rel_u: SparseRows::new(p),
            rel_r: SparseRows::new(p),
            rel_h: SparseRows::new(params.n_t()),
            rel_c: SparseRows::new(1),
            tfd: with_tfd.then_some([0.0; 5]),
            loss: 0.0,
        }
    }

    pub fn clear(&mut self) {
        for g in self.groups_mut() {
            g.clear();
        }
        if let Some(t) = &mut self.tfd {
            *t = [0.0; 5];
        }
        self.loss = 0.0;
    }

    /// Sums another tape into this one.
    pub fn merge(&mut self, other: &GradientTape) {
        self.node_coords.merge(&other.node_coords);
        self.node_bias.merge(&other.node_bias);
        self.rel_u.merge(&other.rel_u);
        self.rel_r.merge(&other.rel_r);
        self.rel_h.merge(&other.rel_h);
        self.rel_c.merge(&other.rel_c);
        if let (Some(a), Some(b)) = (&mut self.tfd, &other.tfd) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.loss += other.loss;
    }

    fn groups_mut(&mut self) -> [&mut SparseRows; 6] {
        [
            &mut self.node_coords,
            &mut self.node_bias,
            &mut self.rel_u,
            &mut self.rel_r,
            &mut self.rel_h,
            &mut self.rel_c,
        ]
    }
}

/// Relation map applied to one side of the pair.
#[derive(Clone, Copy, PartialEq)]
enum SideMap {
    Identity,
    Translate,
    Scale,
}

fn side_maps(params: &ModelParams) -> (SideMap, SideMap) {
    if params.variant == Variant::MultiTime {
        (SideMap::Identity, SideMap::Identity)
    } else if params.swap_transforms {
        (SideMap::Scale, SideMap::Translate)
    } else {
        (SideMap::Translate, SideMap::Scale)
    }
}

/// Scratch buffers reused across triples.
pub(crate) struct Workspace {
    head_x: Vec<f64>,
    tail_x: Vec<f64>,
    dx: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(n_x: usize) -> Self {
        Self {
            head_x: vec![0.0; n_x],
            tail_x: vec![0.0; n_x],
            dx: vec![0.0; n_x],
        }
    }
}

fn map_side(params: &ModelParams, node: usize, k: usize, map: SideMap, x_out: &mut [f64]) -> (f64, f64) {
    let x = &params.node_coords.row(node)[params.n_t()..];
    let proj_t = params.projected_time(node, k);
    match map {
        SideMap::Identity => {
            x_out.copy_from_slice(x);
            (proj_t, proj_t)
        }
        SideMap::Translate => {
            let u = params.rel_u.row(k);
            for ((o, a), b) in x_out.iter_mut().zip(x).zip(&u[1..]) {
                *o = a + b;
            }
            (proj_t, proj_t + u[0])
        }
        SideMap::Scale => {
            let r = params.rel_r.row(k);
            for ((o, a), b) in x_out.iter_mut().zip(x).zip(&r[1..]) {
                *o = a * b;
            }
            (proj_t, proj_t * r[0])
        }
    }
}

/// Pushes `d loss / d (mapped time, mapped x)` of one side back to the
/// relation parameters and the node row.
#[allow(clippy::too_many_arguments)]
fn backprop_side(
    params: &ModelParams,
    tape: &mut GradientTape,
    node: usize,
    k: usize,
    map: SideMap,
    proj_t: f64,
    d_t: f64,
    d_x: &[f64],
) {
    let n_t = params.n_t();
    let row = params.node_coords.row(node);
    let x = &row[n_t..];
    let d_proj = match map {
        SideMap::Identity => {
            let g = tape.node_coords.row_mut(node);
            for (a, b) in g[n_t..].iter_mut().zip(d_x) {
                *a += b;
            }
            d_t
        }
        SideMap::Translate => {
            let gu = tape.rel_u.row_mut(k);
            gu[0] += d_t;
            for (a, b) in gu[1..].iter_mut().zip(d_x) {
                *a += b;
            }
            let g = tape.node_coords.row_mut(node);
            for (a, b) in g[n_t..].iter_mut().zip(d_x) {
                *a += b;
            }
            d_t
        }
        SideMap::Scale => {
            let r = params.rel_r.row(k);
            let gr = tape.rel_r.row_mut(k);
            gr[0] += proj_t * d_t;
            for ((a, b), xi) in gr[1..].iter_mut().zip(d_x).zip(x) {
                *a += b * xi;
            }
            let g = tape.node_coords.row_mut(node);
            for ((a, b), ri) in g[n_t..].iter_mut().zip(d_x).zip(&r[1..]) {
                *a += b * ri;
            }
            r[0] * d_t
        }
    };
    if params.variant.learns_projection() {
        let h = params.rel_h.row(k);
        let gh = tape.rel_h.row_mut(k);
        for (a, t) in gh.iter_mut().zip(&row[..n_t]) {
            *a += d_proj * t;
        }
        let g = tape.node_coords.row_mut(node);
        for (a, hi) in g[..n_t].iter_mut().zip(h) {
            *a += d_proj * hi;
        }
    } else {
        tape.node_coords.row_mut(node)[0] += d_proj;
    }
}

/// Adds the loss and gradient of one labelled triple to `tape`. Returns the
/// score.
pub(crate) fn accumulate(
    params: &ModelParams,
    triple: Triple,
    positive: bool,
    tape: &mut GradientTape,
    ws: &mut Workspace,
) -> Result<f64> {
    let (i, k, j) = (triple.head as usize, triple.rel as usize, triple.tail as usize);
    let p = &params.tfd;
    let (head_map, tail_map) = side_maps(params);

    let (head_proj, head_t) = map_side(params, i, k, head_map, &mut ws.head_x);
    let (tail_proj, tail_t) = map_side(params, j, k, tail_map, &mut ws.tail_x);
    let dt = params.geometry.displacement(head_t - tail_t);
    let mut dx2 = 0.0;
    for ((d, a), b) in ws.dx.iter_mut().zip(&ws.head_x).zip(&ws.tail_x) {
        *d = a - b;
        dx2 += *d * *d;
    }
    let s2 = -dt * dt + dx2;
    let w2 = dt * dt + dx2;
    let z1 = (s2 - p.u) / p.tau1;
    let z2 = -p.alpha * dt / p.tau2;
    let z3 = p.alpha_prime * dt / p.tau2;
    let zw = (w2 - p.u) / p.tau1;
    let log_tfd = -(softplus(z1) + softplus(z2) + softplus(z3)) / 3.0;
    let log_wick = -softplus(zw);
    let beta = p.beta;
    let lp = crate::likelihood::mix(log_tfd, log_wick, beta);
    if lp.is_nan() || lp >= 0.0 {
        return Err(Error::NonFinite {
            triple,
            what: "log-likelihood is not negative",
        });
    }
    let score = lp - log1mexp(lp) + params.bias_component(triple.head, triple.rel, triple.tail);
    let (loss, g) = if positive {
        (softplus(-score), sigmoid(score) - 1.0)
    } else {
        (softplus(score), sigmoid(score))
    };
    if !(loss.is_finite() && g.is_finite()) {
        return Err(Error::NonFinite { triple, what: "loss" });
    }
    tape.loss += loss;

    tape.node_bias.row_mut(i)[0] += g;
    tape.node_bias.row_mut(j)[0] += g;
    tape.rel_c.row_mut(k)[0] += g;

    // d score / d lp = 1 / (1 - e^lp)
    let d_lp = g / -libm::expm1(lp);
    let a = d_lp * (1.0 - beta) / 3.0;
    let b = d_lp * beta;
    let d_z1 = -a * sigmoid(z1);
    let d_z2 = -a * sigmoid(z2);
    let d_z3 = -a * sigmoid(z3);
    let d_zw = -b * sigmoid(zw);
    let d_s2 = d_z1 / p.tau1;
    let d_w2 = d_zw / p.tau1;
    let d_dt = 2.0 * dt * (d_w2 - d_s2) - d_z2 * p.alpha / p.tau2 + d_z3 * p.alpha_prime / p.tau2;
    let d_dx2 = d_s2 + d_w2;
    if !(d_dt.is_finite() && d_dx2.is_finite()) {
        return Err(Error::NonFinite {
            triple,
            what: "gradient",
        });
    }

    if let Some(gt) = &mut tape.tfd {
        use tfd_index::*;
        gt[TAU1] += -(d_z1 * z1 + d_zw * zw) / p.tau1;
        gt[U] += -(d_z1 + d_zw) / p.tau1;
        gt[TAU2] += -(d_z2 * z2 + d_z3 * z3) / p.tau2;
        gt[ALPHA] += -d_z2 * dt / p.tau2;
        gt[ALPHA_PRIME] += d_z3 * dt / p.tau2;
    }

    for d in ws.dx.iter_mut() {
        *d *= 2.0 * d_dx2;
    }
    backprop_side(params, tape, i, k, head_map, head_proj, d_dt, &ws.dx);
    for d in ws.dx.iter_mut() {
        *d = -*d;
    }
    backprop_side(params, tape, j, k, tail_map, tail_proj, -d_dt, &ws.dx);
    Ok(score)
}

/// Gradient of [`super::nll_loss`] over `positives` and `negatives`.
pub fn gradients(
    params: &ModelParams,
    positives: &[Triple],
    negatives: &[Triple],
    with_tfd: bool,
) -> Result<GradientTape> {
    let mut tape = GradientTape::new(params, with_tfd);
    let mut ws = Workspace::new(params.n_x());
    for &t in positives {
        params.check_ids(t.head, t.rel, t.tail)?;
        accumulate(params, t, true, &mut tape, &mut ws)?;
    }
    for &t in negatives {
        params.check_ids(t.head, t.rel, t.tail)?;
        accumulate(params, t, false, &mut tape, &mut ws)?;
    }
    Ok(tape)
}
