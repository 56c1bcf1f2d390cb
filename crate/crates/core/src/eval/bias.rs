//! Node-bias versus degree diagnostics.

use alloc::vec::Vec;

use crate::error::Result;
use crate::model::ModelParams;
use crate::Triple;

/// Pearson correlation; `NaN` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / libm::sqrt(sxx * syy)
}

/// Split of each score into its likelihood logit and node-bias parts.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasDegreeReport {
    /// `deg(head) + deg(tail)` per triple.
    pub degree: Vec<f64>,
    /// `b_head + b_tail` per triple.
    pub node_bias: Vec<f64>,
    /// Likelihood logit per triple.
    pub tfd: Vec<f64>,
    pub r_bias: f64,
    pub r_tfd: f64,
}

/// Correlates node degree with the bias and likelihood components of the
/// scores of `triples`.
pub fn score_components(params: &ModelParams, triples: &[Triple], degrees: &[usize]) -> Result<BiasDegreeReport> {
    let mut degree = Vec::with_capacity(triples.len());
    let mut node_bias = Vec::with_capacity(triples.len());
    let mut tfd = Vec::with_capacity(triples.len());
    for t in triples {
        tfd.push(params.tfd_component(t.head, t.rel, t.tail)?);
        node_bias.push(params.node_bias[t.head as usize] + params.node_bias[t.tail as usize]);
        degree.push((degrees[t.head as usize] + degrees[t.tail as usize]) as f64);
    }
    let r_bias = pearson(&degree, &node_bias);
    let r_tfd = pearson(&degree, &tfd);
    Ok(BiasDegreeReport {
        degree,
        node_bias,
        tfd,
        r_bias,
        r_tfd,
    })
}

/// Mean degree of the top-scoring tail over `queries` of `(head, relation)`.
pub fn mean_top_degree(params: &ModelParams, queries: &[(u32, u32)], degrees: &[usize]) -> Result<f64> {
    let mut scores = Vec::new();
    let mut total = 0.0;
    for &(h, r) in queries {
        params.score_all_tails(h, r, &mut scores)?;
        let best = scores
            .iter()
            .enumerate()
            .fold(
                (0usize, f64::NEG_INFINITY),
                |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc },
            )
            .0;
        total += degrees[best] as f64;
    }
    Ok(total / queries.len().max(1) as f64)
}
