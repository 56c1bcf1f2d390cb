//! Binary checkpoint encoding.
//!
//! Layout, all fields little-endian and 8 bytes wide:
//!
//! ```text
//! "PSEUDOE1"
//! n_t, n_x, N, n_r, variant tag                      (u64)
//! tau1, tau2, u, alpha, alpha', k, beta              (f64)
//! cylinder circumference, 0.0 when time is not compact (f64)
//! node_coords (N x (n_t + n_x), row-major), node_bias (N)
//! per relation: u_vec (1 + n_x), r_diag (1 + n_x), h_vec (n_t), c_bias
//! ```
//!
//! Bit 8 of the variant tag records `swap_transforms`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{GeometryConfig, Signature};
use crate::likelihood::TfdParams;
use crate::model::{ModelParams, Table, Variant};

pub const MAGIC: &[u8; 8] = b"PSEUDOE1";
const SWAP_BIT: u64 = 1 << 8;

pub fn encode(params: &ModelParams) -> Vec<u8> {
    let (n_t, n_x) = (params.n_t(), params.n_x());
    let n = params.num_entities();
    let n_r = params.num_relations();
    let body = n * (n_t + n_x + 1) + n_r * (2 * (1 + n_x) + n_t + 1);
    let mut out = Vec::with_capacity(8 * (14 + body));
    out.extend_from_slice(MAGIC);
    let mut tag = params.variant.tag();
    if params.swap_transforms {
        tag |= SWAP_BIT;
    }
    for v in [n_t as u64, n_x as u64, n as u64, n_r as u64, tag] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let t = &params.tfd;
    let cyl = params.geometry.cylinder().unwrap_or(0.0);
    let mut put = |v: f64| out.extend_from_slice(&v.to_le_bytes());
    for v in [t.tau1, t.tau2, t.u, t.alpha, t.alpha_prime, t.k_scale, t.beta, cyl] {
        put(v);
    }
    params.node_coords.as_slice().iter().for_each(|&v| put(v));
    params.node_bias.iter().for_each(|&v| put(v));
    for k in 0..n_r {
        params.rel_u.row(k).iter().for_each(|&v| put(v));
        params.rel_r.row(k).iter().for_each(|&v| put(v));
        params.rel_h.row(k).iter().for_each(|&v| put(v));
        put(params.rel_c[k]);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn word(&mut self) -> Result<[u8; 8]> {
        let end = self.pos + 8;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().expect("8-byte slice"))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.word()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.word()?))
    }

    fn fill(&mut self, dst: &mut [f64]) -> Result<()> {
        for v in dst {
            *v = self.f64()?;
        }
        Ok(())
    }
}

pub fn decode(bytes: &[u8]) -> Result<ModelParams> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mut r = Reader { buf: bytes, pos: 8 };
    let dims = |v: u64| usize::try_from(v).map_err(|_| Error::Checkpoint("dimension overflow".into()));
    let n_t = dims(r.u64()?)?;
    let n_x = dims(r.u64()?)?;
    let n = dims(r.u64()?)?;
    let n_r = dims(r.u64()?)?;
    let tag = r.u64()?;
    let variant =
        Variant::from_tag(tag & !SWAP_BIT).ok_or_else(|| Error::Checkpoint(format!("unknown variant tag {tag}")))?;
    let tfd = TfdParams {
        tau1: r.f64()?,
        tau2: r.f64()?,
        u: r.f64()?,
        alpha: r.f64()?,
        alpha_prime: r.f64()?,
        k_scale: r.f64()?,
        beta: r.f64()?,
    };
    let cyl = r.f64()?;
    let geometry = GeometryConfig::new(Signature::new(n_t, n_x)?, if cyl == 0.0 { None } else { Some(cyl) })?;

    let p = 1 + n_x;
    let expected = n
        .checked_mul(n_t + n_x + 1)
        .and_then(|a| n_r.checked_mul(2 * p + n_t + 1).and_then(|b| a.checked_add(b)))
        .and_then(|w| w.checked_mul(8))
        .and_then(|b| b.checked_add(r.pos))
        .ok_or_else(|| Error::Checkpoint("size overflow".into()))?;
    if expected != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }

    let mut node_coords = Table::zeros(n, n_t + n_x);
    r.fill(node_coords.as_mut_slice())?;
    let mut node_bias = alloc::vec![0.0; n];
    r.fill(&mut node_bias)?;
    let mut rel_u = Table::zeros(n_r, p);
    let mut rel_r = Table::zeros(n_r, p);
    let mut rel_h = Table::zeros(n_r, n_t);
    let mut rel_c = alloc::vec![0.0; n_r];
    for (k, c) in rel_c.iter_mut().enumerate() {
        r.fill(rel_u.row_mut(k))?;
        r.fill(rel_r.row_mut(k))?;
        r.fill(rel_h.row_mut(k))?;
        *c = r.f64()?;
    }
    let params = ModelParams {
        geometry,
        tfd,
        variant,
        swap_transforms: tag & SWAP_BIT != 0,
        node_coords,
        node_bias,
        rel_u,
        rel_r,
        rel_h,
        rel_c,
    };
    params.validate()?;
    Ok(params)
}
