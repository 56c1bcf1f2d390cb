//! Parameter container and score functions.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_len, invalid, Error, Result};
use crate::geometry::{norm_sq, GeometryConfig, SpacetimePoint};
use crate::likelihood::{log_tfd_unchecked, log_wick_fd, logit_from_log, mix, sigmoid, TfdParams};
use crate::relmaps::{ProjectedPoint, RelationParams};

pub use crate::relmaps::Variant;

/// Row-major `rows x width` table of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    rows: usize,
    width: usize,
    data: Vec<f64>,
}

impl Table {
    pub fn zeros(rows: usize, width: usize) -> Self {
        Self::filled(rows, width, 0.0)
    }

    pub fn filled(rows: usize, width: usize, value: f64) -> Self {
        Self {
            rows,
            width,
            data: vec![value; rows * width],
        }
    }

    pub fn from_vec(rows: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * width, data.len())?;
        Ok(Self { rows, width, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    pub sigma_init: f64,
    pub seed: u64,
}

/// All learned state of a model plus the fixed geometry and likelihood
/// settings it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub geometry: GeometryConfig,
    pub tfd: TfdParams,
    pub variant: Variant,
    /// Scale the head and translate the tail instead of the reverse.
    pub swap_transforms: bool,
    /// `N x (n_t + n_x)`, time coordinates first.
    pub node_coords: Table,
    pub node_bias: Vec<f64>,
    /// `n_r x (1 + n_x)` translations.
    pub rel_u: Table,
    /// `n_r x (1 + n_x)` diagonal scalings.
    pub rel_r: Table,
    /// `n_r x n_t` time projection weights.
    pub rel_h: Table,
    pub rel_c: Vec<f64>,
}

/// The head and tail of one triple after the relation maps.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPair {
    pub head: ProjectedPoint,
    pub tail: ProjectedPoint,
}

impl ModelParams {
    /// Random initialisation: coordinates and translations from
    /// `N(0, sigma^2)`, projections from `N(0, 1/n_t)`, scalings at exactly
    /// one and all biases at zero.
    pub fn init(
        num_entities: usize,
        num_relations: usize,
        geometry: GeometryConfig,
        tfd: TfdParams,
        variant: Variant,
        init: InitConfig,
    ) -> Result<Self> {
        if num_entities == 0 || num_relations == 0 {
            return Err(invalid("need at least one entity and one relation"));
        }
        if !(init.sigma_init > 0.0 && init.sigma_init.is_finite()) {
            return Err(invalid("sigma_init must be positive"));
        }
        tfd.validate()?;
        let sig = geometry.signature;
        let (n_t, n_x) = (sig.n_t(), sig.n_x());
        if variant == Variant::DistMultTransE && n_t != 1 {
            return Err(invalid("the DT variant has a single time coordinate (n_t = 1)"));
        }
        if variant.learns_projection() && n_t >= num_relations && num_relations > 1 {
            log::warn!("n_t = {n_t} is not below the relation count {num_relations}; time axes are not shared");
        }

        let mut rng = ChaCha8Rng::seed_from_u64(init.seed);
        let coord_dist = Normal::new(0.0, init.sigma_init).map_err(|_| invalid("bad sigma"))?;
        let proj_dist = Normal::new(0.0, 1.0 / libm::sqrt(n_t as f64)).map_err(|_| invalid("bad n_t"))?;

        let mut node_coords = Table::zeros(num_entities, sig.dim());
        for v in node_coords.as_mut_slice() {
            *v = coord_dist.sample(&mut rng);
        }
        let mut rel_u = Table::zeros(num_relations, 1 + n_x);
        if variant.uses_endomorphisms() {
            for v in rel_u.as_mut_slice() {
                *v = coord_dist.sample(&mut rng);
            }
        }
        let rel_r = Table::filled(num_relations, 1 + n_x, 1.0);
        let mut rel_h = Table::filled(num_relations, n_t, 1.0);
        if variant.learns_projection() {
            for v in rel_h.as_mut_slice() {
                *v = proj_dist.sample(&mut rng);
            }
        }
        Ok(Self {
            geometry,
            tfd,
            variant,
            swap_transforms: false,
            node_coords,
            node_bias: vec![0.0; num_entities],
            rel_u,
            rel_r,
            rel_h,
            rel_c: vec![0.0; num_relations],
        })
    }

    pub fn num_entities(&self) -> usize {
        self.node_coords.rows()
    }

    pub fn num_relations(&self) -> usize {
        self.rel_c.len()
    }

    pub fn n_t(&self) -> usize {
        self.geometry.signature.n_t()
    }

    pub fn n_x(&self) -> usize {
        self.geometry.signature.n_x()
    }

    /// Checks table shapes against the geometry and that every value is finite.
    pub fn validate(&self) -> Result<()> {
        let (n, n_r) = (self.num_entities(), self.num_relations());
        let p = self.geometry.signature.projected_dim();
        check_len(self.geometry.signature.dim(), self.node_coords.width())?;
        check_len(n, self.node_bias.len())?;
        for (t, w) in [(&self.rel_u, p), (&self.rel_r, p), (&self.rel_h, self.n_t())] {
            check_len(n_r, t.rows())?;
            check_len(w, t.width())?;
        }
        if n == 0 || n_r == 0 {
            return Err(invalid("empty model"));
        }
        if self.variant == Variant::DistMultTransE && self.n_t() != 1 {
            return Err(invalid("the DT variant has a single time coordinate (n_t = 1)"));
        }
        self.tfd.validate()?;
        let finite = |s: &[f64]| s.iter().all(|v| v.is_finite());
        if !(finite(self.node_coords.as_slice())
            && finite(&self.node_bias)
            && finite(self.rel_u.as_slice())
            && finite(self.rel_r.as_slice())
            && finite(self.rel_h.as_slice())
            && finite(&self.rel_c))
        {
            return Err(invalid("model contains non-finite parameters"));
        }
        Ok(())
    }

    pub fn point(&self, node: usize) -> SpacetimePoint {
        SpacetimePoint::from_row(self.node_coords.row(node), self.n_t())
    }

    pub fn relation(&self, k: usize) -> RelationParams {
        RelationParams {
            u_vec: self.rel_u.row(k).to_vec(),
            r_diag: self.rel_r.row(k).to_vec(),
            h_vec: self.rel_h.row(k).to_vec(),
            c_bias: self.rel_c[k],
        }
    }

    pub(crate) fn check_ids(&self, head: u32, rel: u32, tail: u32) -> Result<()> {
        let n = self.num_entities();
        for id in [head, tail] {
            if id as usize >= n {
                return Err(Error::OutOfRange {
                    kind: "entity",
                    id: id as usize,
                    size: n,
                });
            }
        }
        if rel as usize >= self.num_relations() {
            return Err(Error::OutOfRange {
                kind: "relation",
                id: rel as usize,
                size: self.num_relations(),
            });
        }
        Ok(())
    }

    /// Projected time coordinate of `node` under relation `k`.
    #[inline]
    pub(crate) fn projected_time(&self, node: usize, k: usize) -> f64 {
        let row = self.node_coords.row(node);
        if self.variant.learns_projection() {
            self.rel_h
                .row(k)
                .iter()
                .zip(&row[..self.n_t()])
                .map(|(h, t)| h * t)
                .sum()
        } else {
            row[0]
        }
    }

    /// Writes the relation-mapped head (`is_head`) or tail of `node` into `out`.
    pub(crate) fn map_into(&self, node: usize, k: usize, is_head: bool, out: &mut ProjectedPoint) {
        let n_t = self.n_t();
        let x = &self.node_coords.row(node)[n_t..];
        let t = self.projected_time(node, k);
        out.x.clear();
        if !self.variant.uses_endomorphisms() {
            out.t = t;
            out.x.extend_from_slice(x);
            return;
        }
        if is_head != self.swap_transforms {
            let u = self.rel_u.row(k);
            out.t = t + u[0];
            out.x.extend(x.iter().zip(&u[1..]).map(|(a, b)| a + b));
        } else {
            let r = self.rel_r.row(k);
            out.t = t * r[0];
            out.x.extend(x.iter().zip(&r[1..]).map(|(a, b)| a * b));
        }
    }

    pub fn transform_pair(&self, head: u32, rel: u32, tail: u32) -> Result<TransformedPair> {
        self.check_ids(head, rel, tail)?;
        let mut pair = TransformedPair {
            head: ProjectedPoint { t: 0.0, x: Vec::new() },
            tail: ProjectedPoint { t: 0.0, x: Vec::new() },
        };
        self.map_into(head as usize, rel as usize, true, &mut pair.head);
        self.map_into(tail as usize, rel as usize, false, &mut pair.tail);
        Ok(pair)
    }

    /// `log F^(beta)` for two already-mapped points.
    #[inline]
    pub(crate) fn log_likelihood(&self, head: &ProjectedPoint, tail: &ProjectedPoint) -> f64 {
        let dt = self.geometry.displacement(head.t - tail.t);
        let dx2: f64 = head.x.iter().zip(&tail.x).map(|(a, b)| (a - b) * (a - b)).sum();
        let lt = log_tfd_unchecked(-dt * dt + dx2, dt, &self.tfd);
        let lw = log_wick_fd(dt * dt + dx2, &self.tfd);
        mix(lt, lw, self.tfd.beta)
    }

    /// Logit of the interpolated likelihood, the geometric part of the score.
    pub(crate) fn likelihood_logit(&self, head: &ProjectedPoint, tail: &ProjectedPoint) -> f64 {
        let lp = self.log_likelihood(head, tail);
        // k = 1 keeps lp < 0; the fallback only guards against rounding to 0
        logit_from_log(lp).unwrap_or(f64::INFINITY)
    }

    /// Full score: likelihood logit plus `b_head + b_tail + c_rel`.
    pub fn score(&self, head: u32, rel: u32, tail: u32) -> Result<f64> {
        let pair = self.transform_pair(head, rel, tail)?;
        Ok(self.likelihood_logit(&pair.head, &pair.tail) + self.bias_component(head, rel, tail))
    }

    /// The geometric (TFD) component of the score, without biases.
    pub fn tfd_component(&self, head: u32, rel: u32, tail: u32) -> Result<f64> {
        let pair = self.transform_pair(head, rel, tail)?;
        Ok(self.likelihood_logit(&pair.head, &pair.tail))
    }

    #[inline]
    pub(crate) fn bias_component(&self, head: u32, rel: u32, tail: u32) -> f64 {
        self.node_bias[head as usize] + self.node_bias[tail as usize] + self.rel_c[rel as usize]
    }

    pub fn probability(&self, head: u32, rel: u32, tail: u32) -> Result<f64> {
        Ok(sigmoid(self.score(head, rel, tail)?))
    }

    /// Scores every tail in `candidates` against a fixed `(head, rel)`.
    pub fn score_tails(&self, head: u32, rel: u32, candidates: &[u32], out: &mut Vec<f64>) -> Result<()> {
        self.check_ids(head, rel, head)?;
        let (h, k) = (head as usize, rel as usize);
        let mut hp = ProjectedPoint {
            t: 0.0,
            x: Vec::with_capacity(self.n_x()),
        };
        let mut tp = hp.clone();
        self.map_into(h, k, true, &mut hp);
        out.clear();
        out.reserve(candidates.len());
        for &c in candidates {
            if c as usize >= self.num_entities() {
                return Err(Error::OutOfRange {
                    kind: "entity",
                    id: c as usize,
                    size: self.num_entities(),
                });
            }
            self.map_into(c as usize, k, false, &mut tp);
            out.push(self.likelihood_logit(&hp, &tp) + self.bias_component(head, rel, c));
        }
        Ok(())
    }

    /// Scores all entities as tails of `(head, rel)`.
    pub fn score_all_tails(&self, head: u32, rel: u32, out: &mut Vec<f64>) -> Result<()> {
        let all: Vec<u32> = (0..self.num_entities() as u32).collect();
        self.score_tails(head, rel, &all, out)
    }

    /// Copy with every node bias multiplied by `gamma_b`.
    pub fn scale_node_bias(&self, gamma_b: f64) -> ModelParams {
        let mut out = self.clone();
        for b in &mut out.node_bias {
            *b *= gamma_b;
        }
        out
    }
}

/// DistMult: `sum_a x_i[a] x_r[a] x_j[a]`.
pub fn score_distmult(x_i: &[f64], x_r: &[f64], x_j: &[f64]) -> Result<f64> {
    check_len(x_i.len(), x_r.len())?;
    check_len(x_i.len(), x_j.len())?;
    Ok(x_i.iter().zip(x_r).zip(x_j).map(|((a, b), c)| a * b * c).sum())
}

/// TransE distance `|x_i + x_r - x_j|`. Smaller is better; rank by its
/// negation.
pub fn score_transe(x_i: &[f64], x_r: &[f64], x_j: &[f64]) -> Result<f64> {
    check_len(x_i.len(), x_r.len())?;
    check_len(x_i.len(), x_j.len())?;
    let d: Vec<f64> = x_i.iter().zip(x_r).zip(x_j).map(|((a, b), c)| a + b - c).collect();
    Ok(libm::sqrt(norm_sq(&d)))
}
