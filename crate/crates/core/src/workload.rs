//! Request generation.
//!
//! Requests are exactly `n_requests` sequential draws: the origin is uniform
//! over the nodes and the file is drawn from the popularity profile,
//! independently of the origin. Per-node arrival counts are therefore
//! multinomial and only approach Poisson(1) for large `n`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::placement::FileId;
use crate::popularity::PopularityProfile;
use crate::seed;
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Request {
    pub seq: u32,
    pub origin: NodeId,
    pub file: FileId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestStream {
    requests: Vec<Request>,
    n_nodes: usize,
    seed: u64,
}

impl RequestStream {
    /// Draws `n_requests` requests over `n_nodes` nodes. Each request
    /// consumes the origin draw first, then one `u64` for the file.
    pub fn generate(
        n_requests: usize,
        n_nodes: usize,
        profile: &PopularityProfile,
        seed: u64,
    ) -> Self {
        assert!(n_nodes >= 1, "request stream needs at least one node");
        let mut rng = seed::rng(seed);
        let requests = (0..n_requests)
            .map(|seq| {
                let origin = NodeId(rng.gen_range(0..n_nodes as u32));
                let file = profile.sample(&mut rng);
                Request { seq: seq as u32, origin, file }
            })
            .collect();
        Self { requests, n_nodes, seed }
    }

    /// Wraps explicit requests; `seq` is reassigned in order.
    pub fn from_requests(n_nodes: usize, requests: impl IntoIterator<Item = (NodeId, FileId)>) -> Self {
        let requests = requests
            .into_iter()
            .enumerate()
            .map(|(seq, (origin, file))| Request { seq: seq as u32, origin, file })
            .collect();
        Self { requests, n_nodes, seed: 0 }
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Seed the stream was generated from (0 for explicit streams).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `D_i`: number of requests originating at each node.
    pub fn per_node_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_nodes];
        for r in &self.requests {
            counts[r.origin.index()] += 1;
        }
        counts
    }
}
