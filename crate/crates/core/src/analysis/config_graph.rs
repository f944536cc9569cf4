//! The configuration graph `H`: servers are adjacent when they share a cached
//! file and lie within distance `2r` of each other.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::placement::Placement;
use crate::topology::{NodeId, TorusGeometry};

/// Undirected simple graph in compressed adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigGraph {
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
}

/// How [`build_config_graph`] enumerates candidate pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairScan {
    /// Pairs co-listed in some replica set, filtered by distance.
    ReplicaIndex,
    /// Nodes in `B_2r(u)`, filtered by a shared-file test.
    Ball,
}

impl ConfigGraph {
    fn from_edges(n: usize, mut edges: Vec<(u32, u32)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut degree = vec![0u32; n];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; edges.len() * 2];
        for &(u, v) in &edges {
            neighbors[cursor[u as usize] as usize] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize] as usize] = u;
            cursor[v as usize] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
        }
        Self { offsets, neighbors }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Sorted neighbours of `u`.
    pub fn neighbors(&self, u: NodeId) -> &[u32] {
        &self.neighbors[self.offsets[u.index()] as usize..self.offsets[u.index() + 1] as usize]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.neighbors(u).len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `e(H)`.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v.0).is_ok()
    }

    /// `histogram[d]` = number of nodes with degree `d`.
    pub fn degree_histogram(&self) -> Vec<u32> {
        let degrees = self.degrees();
        let max = degrees.iter().copied().max().unwrap_or(0) as usize;
        let mut h = vec![0u32; max + 1];
        for d in degrees {
            h[d as usize] += 1;
        }
        h
    }
}

/// Builds `H` exactly, choosing the cheaper of the two pair enumerations.
pub fn build_config_graph(p: &Placement, geo: &TorusGeometry, r: usize) -> Result<ConfigGraph> {
    let n = geo.n();
    let index_cost: usize = (1..=p.library_size() as u32).map(|f| p.replicas(f).len().pow(2) / 2).sum();
    let ball_cost = n * geo.ball_size(NodeId(0), 2 * r) / 2;
    let scan = if index_cost <= ball_cost { PairScan::ReplicaIndex } else { PairScan::Ball };
    build_config_graph_with(p, geo, r, scan)
}

/// Builds `H` with an explicit pair enumeration. Both routes give the same
/// graph.
pub fn build_config_graph_with(
    p: &Placement,
    geo: &TorusGeometry,
    r: usize,
    scan: PairScan,
) -> Result<ConfigGraph> {
    if r == 0 {
        return Err(Error::InvalidRadius);
    }
    let n = geo.n();
    if p.n() != n {
        return Err(Error::DimensionMismatch { what: "placement", expected: n, got: p.n() });
    }
    let reach = 2 * r;
    let mut edges = Vec::new();
    match scan {
        PairScan::ReplicaIndex => {
            for f in 1..=p.library_size() as u32 {
                let holders = p.replicas(f);
                for (i, &u) in holders.iter().enumerate() {
                    for &v in &holders[i + 1..] {
                        if geo.distance(NodeId(u), NodeId(v)) <= reach {
                            edges.push((u, v));
                        }
                    }
                }
            }
        }
        PairScan::Ball => {
            for u in 0..n as u32 {
                geo.for_each_in_ball(NodeId(u), reach, |v| {
                    if v.0 > u && p.shares_file(NodeId(u), v) {
                        edges.push((u, v.0));
                    }
                });
            }
        }
    }
    Ok(ConfigGraph::from_edges(n, edges))
}

/// Degree prediction `t̄² · |B_2r| / K`, where `t̄` is the mean
/// distinct count per node.
pub fn predicted_degree(p: &Placement, geo: &TorusGeometry, r: usize) -> f64 {
    let n = p.n();
    let mean_distinct =
        (0..n as u32).map(|u| p.distinct_count(NodeId(u)) as f64).sum::<f64>() / n as f64;
    let ball = geo.ball_size(NodeId(0), 2 * r) as f64;
    mean_distinct * mean_distinct * ball / p.library_size() as f64
}
