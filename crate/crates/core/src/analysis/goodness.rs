//! The `(δ, μ)`-goodness property of a placement: every node holds at least
//! `δM` distinct files and every pair of nodes shares fewer than `μ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::placement::Placement;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessReport {
    pub pass: bool,
    pub delta: f64,
    pub mu: usize,
    /// Nodes with `t(u) < δM`, with their distinct counts.
    pub sparse_nodes: Vec<(NodeId, usize)>,
    /// Pairs `u < v` with `t(u, v) >= μ`, with their overlap.
    pub heavy_pairs: Vec<(NodeId, NodeId, usize)>,
}

/// `δ = (1 - α) / 3`.
pub fn default_delta(alpha: f64) -> f64 {
    (1.0 - alpha) / 3.0
}

/// `μ = ⌈5 / (1 - 2α)⌉`.
pub fn default_mu(alpha: f64) -> usize {
    libm::ceil(5.0 / (1.0 - 2.0 * alpha)) as usize
}

/// Checks goodness with the defaults derived from `alpha`.
pub fn goodness_check(p: &Placement, alpha: f64) -> Result<GoodnessReport> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(goodness_with(p, default_delta(alpha), default_mu(alpha)))
}

/// Checks goodness for explicit `delta` and `mu`. Only pairs that share a
/// replica set are examined, since every other pair has overlap zero.
pub fn goodness_with(p: &Placement, delta: f64, mu: usize) -> GoodnessReport {
    let n = p.n();
    let threshold = delta * p.cache_size() as f64;
    let sparse_nodes: Vec<(NodeId, usize)> = (0..n as u32)
        .map(NodeId)
        .map(|u| (u, p.distinct_count(u)))
        .filter(|&(_, t)| (t as f64) < threshold)
        .collect();

    let mut heavy_pairs = Vec::new();
    let max_distinct = (0..n as u32).map(|u| p.distinct_count(NodeId(u))).max().unwrap_or(0);
    // t(u, v) <= min(t(u), t(v)), so the pair clause can only fail when some
    // node holds at least mu distinct files
    if mu == 0 {
        heavy_pairs.extend((0..n as u32).flat_map(|u| {
            (u + 1..n as u32).map(move |v| (NodeId(u), NodeId(v)))
        }).map(|(u, v)| (u, v, p.overlap_count(u, v, usize::MAX))));
    } else if max_distinct >= mu {
        let mut pairs = Vec::new();
        for f in 1..=p.library_size() as u32 {
            let holders = p.replicas(f);
            for (i, &u) in holders.iter().enumerate() {
                if p.distinct_count(NodeId(u)) < mu {
                    continue;
                }
                for &v in &holders[i + 1..] {
                    if p.distinct_count(NodeId(v)) >= mu {
                        pairs.push((u, v));
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        for (u, v) in pairs {
            let t = p.overlap_count(NodeId(u), NodeId(v), mu);
            if t >= mu {
                heavy_pairs.push((NodeId(u), NodeId(v), p.overlap_count(NodeId(u), NodeId(v), usize::MAX)));
            }
        }
    }
    GoodnessReport { pass: sparse_nodes.is_empty() && heavy_pairs.is_empty(), delta, mu, sparse_nodes, heavy_pairs }
}
