//! Relation-specific maps: time projection onto a `(1, n_x)` submanifold,
//! head translation and tail diagonal scaling.
//!
//! These are the reference forms of the maps. The model's scoring path fuses
//! them into a single pass but must agree with composing the functions here.

use alloc::vec::Vec;

use crate::error::{check_len, Result};
use crate::geometry::SpacetimePoint;

/// How relations act on node embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Multi-time only: a learned time projection, no translation or scaling.
    MultiTime,
    /// Translation on the head and diagonal scaling on the tail, identity
    /// projection (a single time coordinate).
    DistMultTransE,
    /// Projection followed by translation/scaling.
    Both,
}

impl Variant {
    pub fn learns_projection(self) -> bool {
        !matches!(self, Variant::DistMultTransE)
    }

    pub fn uses_endomorphisms(self) -> bool {
        !matches!(self, Variant::MultiTime)
    }

    pub fn tag(self) -> u64 {
        match self {
            Variant::MultiTime => 0,
            Variant::DistMultTransE => 1,
            Variant::Both => 2,
        }
    }

    pub fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(Variant::MultiTime),
            1 => Some(Variant::DistMultTransE),
            2 => Some(Variant::Both),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::MultiTime => "mt",
            Variant::DistMultTransE => "dt",
            Variant::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mt" => Some(Variant::MultiTime),
            "dt" => Some(Variant::DistMultTransE),
            "both" => Some(Variant::Both),
            _ => None,
        }
    }
}

/// A point on a single-time submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub t: f64,
    pub x: Vec<f64>,
}

impl ProjectedPoint {
    pub fn dim(&self) -> usize {
        1 + self.x.len()
    }
}

/// Parameters of one relation. `u_vec` and `r_diag` act on the projected
/// `(1 + n_x)` coordinates, time first.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationParams {
    pub u_vec: Vec<f64>,
    pub r_diag: Vec<f64>,
    pub h_vec: Vec<f64>,
    pub c_bias: f64,
}

/// `(t, x) -> (h . t, x)`.
pub fn time_project(p: &SpacetimePoint, h_vec: &[f64]) -> Result<ProjectedPoint> {
    check_len(p.t.len(), h_vec.len())?;
    let t = h_vec.iter().zip(&p.t).map(|(h, t)| h * t).sum();
    Ok(ProjectedPoint { t, x: p.x.clone() })
}

pub fn translate_head(p: &ProjectedPoint, u_vec: &[f64]) -> Result<ProjectedPoint> {
    check_len(p.dim(), u_vec.len())?;
    Ok(ProjectedPoint {
        t: p.t + u_vec[0],
        x: p.x.iter().zip(&u_vec[1..]).map(|(a, b)| a + b).collect(),
    })
}

pub fn scale_tail(p: &ProjectedPoint, r_diag: &[f64]) -> Result<ProjectedPoint> {
    check_len(p.dim(), r_diag.len())?;
    Ok(ProjectedPoint {
        t: p.t * r_diag[0],
        x: p.x.iter().zip(&r_diag[1..]).map(|(a, b)| a * b).collect(),
    })
}

/// Maps a head/tail pair onto the relation's submanifold.
///
/// The projection runs first; the head is then translated and the tail scaled
/// (swapped when `swap_transforms` is set, the MuRE assignment). The DT
/// variant has a single time coordinate and uses the identity projection.
pub fn transform_pair(
    head: &SpacetimePoint,
    tail: &SpacetimePoint,
    rel: &RelationParams,
    variant: Variant,
    swap_transforms: bool,
) -> Result<(ProjectedPoint, ProjectedPoint)> {
    let (h, t) = if variant.learns_projection() {
        (time_project(head, &rel.h_vec)?, time_project(tail, &rel.h_vec)?)
    } else {
        check_len(1, head.t.len())?;
        check_len(1, tail.t.len())?;
        (time_project(head, &[1.0])?, time_project(tail, &[1.0])?)
    };
    if !variant.uses_endomorphisms() {
        return Ok((h, t));
    }
    if swap_transforms {
        Ok((scale_tail(&h, &rel.r_diag)?, translate_head(&t, &rel.u_vec)?))
    } else {
        Ok((translate_head(&h, &rel.u_vec)?, scale_tail(&t, &rel.r_diag)?))
    }
}
