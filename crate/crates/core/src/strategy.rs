//! Request assignment strategies and the sequential allocation loop.
//!
//! * **Nearest replica**: serve each request at the closest node caching the
//!   file; equidistant holders are chosen uniformly.
//! * **Two choices**: among the nodes within radius `r` of the origin that
//!   cache the file (origin included), sample an unordered pair uniformly and
//!   serve at the member with the smaller current load; ties are uniform.
//!
//! Both strategies only ever look at the replica set of the requested file,
//! and count a node once no matter how many copies it holds.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::placement::{FileId, Placement};
use crate::seed;
use crate::topology::{NodeId, TorusGeometry};
use crate::workload::{Request, RequestStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    NearestReplica,
    TwoChoices,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Radius {
    Bounded(usize),
    Unbounded,
}

/// What two-choices does when no replica lies within the radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Fallback {
    /// Serve at the nearest replica anywhere and count a fallback.
    #[default]
    NearestGlobal,
    /// Drop the request.
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Ignored by the nearest-replica strategy.
    pub radius: Radius,
    pub fallback: Fallback,
}

impl StrategyConfig {
    pub fn nearest_replica() -> Self {
        Self { kind: StrategyKind::NearestReplica, radius: Radius::Unbounded, fallback: Fallback::default() }
    }

    pub fn two_choices(radius: Radius) -> Self {
        Self { kind: StrategyKind::TwoChoices, radius, fallback: Fallback::default() }
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == StrategyKind::TwoChoices && self.radius == Radius::Bounded(0) {
            return Err(Error::InvalidRadius);
        }
        Ok(())
    }
}

/// Per-node assignment counters `T_i` plus running totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadState {
    pub loads: Vec<u32>,
    pub served: u64,
    pub fallbacks: u64,
    pub rejected: u64,
    pub hop_sum: u64,
}

impl LoadState {
    pub fn new(n: usize) -> Self {
        Self { loads: vec![0; n], served: 0, fallbacks: 0, rejected: 0, hop_sum: 0 }
    }

    fn record(&mut self, a: Assignment) {
        self.loads[a.server.index()] += 1;
        self.served += 1;
        self.hop_sum += a.hops as u64;
        if a.fallback {
            self.fallbacks += 1;
        }
    }

    pub fn max_load(&self) -> u32 {
        self.loads.iter().copied().max().unwrap_or(0)
    }
}

/// Where a request was served.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub server: NodeId,
    pub hops: usize,
    /// Served through the nearest-global fallback of two-choices.
    pub fallback: bool,
}

/// Collects the equidistant nearest holders of `file` into `buf` (ascending)
/// and returns their distance, or `None` when nobody caches the file.
pub(crate) fn nearest_holders(
    origin: NodeId,
    file: FileId,
    p: &Placement,
    geo: &TorusGeometry,
    buf: &mut Vec<u32>,
) -> Option<usize> {
    buf.clear();
    let holders = p.replicas(file);
    if holders.is_empty() {
        return None;
    }
    // scanning the list costs |S|, a ring search about n / |S|
    if holders.len() * holders.len() <= geo.n() {
        let mut best = usize::MAX;
        for &v in holders {
            let d = geo.distance(origin, NodeId(v));
            if d < best {
                best = d;
                buf.clear();
                buf.push(v);
            } else if d == best {
                buf.push(v);
            }
        }
        Some(best)
    } else {
        for d in 0..=geo.diameter() {
            geo.for_each_in_ring(origin, d, |v| {
                if p.caches(v, file) {
                    buf.push(v.0);
                }
            });
            if !buf.is_empty() {
                buf.sort_unstable();
                return Some(d);
            }
        }
        unreachable!("a holder exists within the diameter")
    }
}

/// Nodes within `radius` of `origin` caching `file`, ascending.
fn radius_candidates<'b>(
    origin: NodeId,
    file: FileId,
    radius: Radius,
    p: &'b Placement,
    geo: &TorusGeometry,
    buf: &'b mut Vec<u32>,
) -> &'b [u32] {
    let holders = p.replicas(file);
    let r = match radius {
        Radius::Bounded(r) if r < geo.diameter() => r,
        _ => return holders,
    };
    buf.clear();
    let ball_estimate = (2 * r * (r + 1) + 1).min(geo.n());
    if holders.len() <= ball_estimate {
        buf.extend(holders.iter().copied().filter(|&v| geo.distance(origin, NodeId(v)) <= r));
    } else {
        geo.for_each_in_ball(origin, r, |v| {
            if p.caches(v, file) {
                buf.push(v.0);
            }
        });
        buf.sort_unstable();
    }
    buf
}

/// Two distinct indices in `0..len`, uniform over the `len choose 2`
/// unordered pairs. Consumes exactly two draws.
pub fn sample_pair<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    assert!(len >= 2, "pair sampling needs two candidates");
    // uniform ordered pair of distinct indices, hence a uniform unordered pair
    let i = rng.gen_range(0..len);
    let mut j = rng.gen_range(0..len - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

fn pick_uniform<R: Rng + ?Sized>(candidates: &[u32], rng: &mut R) -> NodeId {
    let i = if candidates.len() > 1 { rng.gen_range(0..candidates.len()) } else { 0 };
    NodeId(candidates[i])
}

fn nearest_with(
    req: &Request,
    p: &Placement,
    geo: &TorusGeometry,
    rng: &mut (impl Rng + ?Sized),
    buf: &mut Vec<u32>,
) -> Option<Assignment> {
    let hops = nearest_holders(req.origin, req.file, p, geo, buf)?;
    Some(Assignment { server: pick_uniform(buf, rng), hops, fallback: false })
}

fn two_choice_with(
    req: &Request,
    p: &Placement,
    geo: &TorusGeometry,
    cfg: &StrategyConfig,
    loads: &[u32],
    rng: &mut (impl Rng + ?Sized),
    buf: &mut Vec<u32>,
) -> Option<Assignment> {
    let candidates = radius_candidates(req.origin, req.file, cfg.radius, p, geo, buf);
    let server = match candidates.len() {
        0 => {
            return match cfg.fallback {
                Fallback::Reject => None,
                Fallback::NearestGlobal => {
                    nearest_with(req, p, geo, rng, buf).map(|a| Assignment { fallback: true, ..a })
                }
            };
        }
        1 => NodeId(candidates[0]),
        f => {
            let (i, j) = sample_pair(f, rng);
            let (a, b) = (candidates[i], candidates[j]);
            let (la, lb) = (loads[a as usize], loads[b as usize]);
            let pick = if la != lb {
                if la < lb { a } else { b }
            } else if rng.gen::<bool>() {
                a
            } else {
                b
            };
            NodeId(pick)
        }
    };
    Some(Assignment { server, hops: geo.distance(req.origin, server), fallback: false })
}

fn apply(state: &mut LoadState, outcome: Option<Assignment>, p: &Placement, file: FileId) -> Option<Assignment> {
    match outcome {
        Some(a) => {
            debug_assert!(p.caches(a.server, file), "server must cache the requested file");
            state.record(a);
            Some(a)
        }
        None => {
            state.rejected += 1;
            None
        }
    }
}

/// Serves `req` at the nearest replica holder and updates `state`. Returns
/// `None` (and counts a rejection) when no node caches the file.
pub fn nearest_replica_assign<R: Rng + ?Sized>(
    req: &Request,
    p: &Placement,
    geo: &TorusGeometry,
    state: &mut LoadState,
    rng: &mut R,
) -> Option<Assignment> {
    let mut buf = Vec::new();
    let outcome = nearest_with(req, p, geo, rng, &mut buf);
    apply(state, outcome, p, req.file)
}

/// Serves `req` with proximity-aware two choices and updates `state`.
/// Returns `None` when the request is rejected.
pub fn two_choice_assign<R: Rng + ?Sized>(
    req: &Request,
    p: &Placement,
    geo: &TorusGeometry,
    cfg: &StrategyConfig,
    state: &mut LoadState,
    rng: &mut R,
) -> Option<Assignment> {
    let mut buf = Vec::new();
    let outcome = two_choice_with(req, p, geo, cfg, &state.loads, rng, &mut buf);
    apply(state, outcome, p, req.file)
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// `L = max_i T_i`.
    pub max_load: u32,
    /// `C`: mean hop count over served requests (0 when nothing was served).
    pub comm_cost: f64,
    pub served: u64,
    pub fallbacks: u64,
    pub rejected: u64,
    pub hop_sum: u64,
    /// `histogram[k]` is the number of nodes with load `k`; its last bucket
    /// is `max_load`.
    pub load_histogram: Vec<u32>,
    pub loads: Vec<u32>,
}

impl RunSummary {
    fn from_state(state: LoadState) -> Self {
        let max_load = state.max_load();
        let mut load_histogram = vec![0u32; max_load as usize + 1];
        for &t in &state.loads {
            load_histogram[t as usize] += 1;
        }
        let comm_cost = if state.served == 0 { 0.0 } else { state.hop_sum as f64 / state.served as f64 };
        Self {
            max_load,
            comm_cost,
            served: state.served,
            fallbacks: state.fallbacks,
            rejected: state.rejected,
            hop_sum: state.hop_sum,
            load_histogram,
            loads: state.loads,
        }
    }
}

/// Allocates every request of `stream` in sequence order. `tie_seed` seeds
/// the generator used for tie-breaks and pair sampling.
pub fn run(
    stream: &RequestStream,
    p: &Placement,
    geo: &TorusGeometry,
    cfg: &StrategyConfig,
    tie_seed: u64,
) -> Result<RunSummary> {
    cfg.validate()?;
    let n = geo.n();
    if p.n() != n {
        return Err(Error::DimensionMismatch { what: "placement", expected: n, got: p.n() });
    }
    if stream.n_nodes() != n {
        return Err(Error::DimensionMismatch { what: "request stream", expected: n, got: stream.n_nodes() });
    }
    let mut rng = seed::rng(tie_seed);
    let mut state = LoadState::new(n);
    let mut buf = Vec::new();
    for req in stream.requests() {
        let outcome = match cfg.kind {
            StrategyKind::NearestReplica => nearest_with(req, p, geo, &mut rng, &mut buf),
            StrategyKind::TwoChoices => two_choice_with(req, p, geo, cfg, &state.loads, &mut rng, &mut buf),
        };
        apply(&mut state, outcome, p, req.file);
    }
    Ok(RunSummary::from_state(state))
}
