//! Torus and bounded-grid geometry.
//!
//! Nodes are identified with coordinates `(x, y)`, `0 <= x, y < side`, and
//! indexed as `y * side + x`. On the torus the hop distance is the L1 metric
//! with wraparound; on the grid it is plain Manhattan distance.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest side accepted by [`TorusGeometry::bfs_distance_oracle`].
pub const ORACLE_MAX_SIDE: usize = 64;

/// Index of a server in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

/// A `side x side` lattice, with wraparound when `wrap` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGeometry {
    side: usize,
    wrap: bool,
}

/// Up to two coordinates at a fixed axis offset from a point.
#[derive(Clone, Copy)]
struct AxisHits {
    at: [usize; 2],
    len: usize,
}

impl AxisHits {
    fn iter(self) -> impl Iterator<Item = usize> {
        self.at.into_iter().take(self.len)
    }
}

impl TorusGeometry {
    /// Torus with the given side length.
    pub fn torus(side: usize) -> Result<Self> {
        Self::new(side, true)
    }

    /// Bounded grid with the given side length.
    pub fn grid(side: usize) -> Result<Self> {
        Self::new(side, false)
    }

    pub fn new(side: usize, wrap: bool) -> Result<Self> {
        if side < 2 || side > u16::MAX as usize {
            return Err(Error::InvalidSide(side));
        }
        Ok(Self { side, wrap })
    }

    /// Geometry with `n` nodes; `n` must be a perfect square.
    pub fn with_nodes(n: usize, wrap: bool) -> Result<Self> {
        let side = isqrt(n);
        if side * side != n || side < 2 {
            return Err(Error::NotSquare(n));
        }
        Self::new(side, wrap)
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn wraps(&self) -> bool {
        self.wrap
    }

    /// Number of nodes, `side²`.
    #[inline]
    pub fn n(&self) -> usize {
        self.side * self.side
    }

    /// Largest distance between two nodes.
    pub fn diameter(&self) -> usize {
        if self.wrap {
            2 * (self.side / 2)
        } else {
            2 * (self.side - 1)
        }
    }

    #[inline]
    pub fn node(&self, x: usize, y: usize) -> NodeId {
        debug_assert!(x < self.side && y < self.side);
        NodeId((y * self.side + x) as u32)
    }

    #[inline]
    pub fn coords(&self, u: NodeId) -> (usize, usize) {
        let i = u.index();
        (i % self.side, i / self.side)
    }

    #[inline]
    pub fn contains(&self, u: NodeId) -> bool {
        u.index() < self.n()
    }

    #[inline]
    fn axis_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        if self.wrap {
            d.min(self.side - d)
        } else {
            d
        }
    }

    /// Hop distance between two nodes.
    #[inline]
    pub fn distance(&self, u: NodeId, v: NodeId) -> usize {
        let (ux, uy) = self.coords(u);
        let (vx, vy) = self.coords(v);
        self.axis_distance(ux, vx) + self.axis_distance(uy, vy)
    }

    /// Coordinates at axis distance exactly `a` from `c`.
    #[inline]
    fn axis_hits(&self, c: usize, a: usize) -> AxisHits {
        let mut hits = AxisHits { at: [0; 2], len: 0 };
        if a == 0 {
            hits.at[0] = c;
            hits.len = 1;
        } else if self.wrap {
            if 2 * a < self.side {
                hits.at = [(c + a) % self.side, (c + self.side - a) % self.side];
                hits.len = 2;
            } else if 2 * a == self.side {
                hits.at[0] = (c + a) % self.side;
                hits.len = 1;
            }
        } else {
            if c + a < self.side {
                hits.at[hits.len] = c + a;
                hits.len += 1;
            }
            if c >= a {
                hits.at[hits.len] = c - a;
                hits.len += 1;
            }
        }
        hits
    }

    /// Calls `f` for every node at distance exactly `d` from `u`, in an
    /// unspecified but deterministic order.
    pub fn for_each_in_ring(&self, u: NodeId, d: usize, mut f: impl FnMut(NodeId)) {
        let (ux, uy) = self.coords(u);
        for ax in 0..=d {
            let xs = self.axis_hits(ux, ax);
            if xs.len == 0 {
                continue;
            }
            let ys = self.axis_hits(uy, d - ax);
            for y in ys.iter() {
                for x in xs.iter() {
                    f(self.node(x, y));
                }
            }
        }
    }

    /// Calls `f` for every node at distance at most `r` from `u`, ring by
    /// ring. Cost is proportional to the ball size.
    pub fn for_each_in_ball(&self, u: NodeId, r: usize, mut f: impl FnMut(NodeId)) {
        for d in 0..=r.min(self.diameter()) {
            self.for_each_in_ring(u, d, &mut f);
        }
    }

    /// The ball `B_r(u)`, including `u`, in ascending index order.
    pub fn ball(&self, u: NodeId, r: usize) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.for_each_in_ball(u, r, |v| out.push(v));
        out.sort_unstable();
        out
    }

    /// `|B_r(u)|` without materializing the ball.
    pub fn ball_size(&self, u: NodeId, r: usize) -> usize {
        let mut count = 0;
        self.for_each_in_ball(u, r, |_| count += 1);
        count
    }

    /// The 4-neighbourhood of `u` without duplicates (side 2 tori fold the
    /// left and right neighbours together).
    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let (ux, uy) = self.coords(u);
        let xs = self.axis_hits(ux, 1);
        let ys = self.axis_hits(uy, 1);
        xs.iter()
            .map(move |x| self.node(x, uy))
            .chain(ys.iter().map(move |y| self.node(ux, y)))
    }

    /// Breadth-first distances from `u` over the 4-neighbour adjacency.
    /// Independent of [`distance`](Self::distance); used to validate it.
    pub fn bfs_distance_oracle(&self, u: NodeId) -> Result<Vec<u32>> {
        if self.side > ORACLE_MAX_SIDE {
            return Err(Error::OracleTooLarge { side: self.side, max: ORACLE_MAX_SIDE });
        }
        let n = self.n();
        let mut dist = vec![u32::MAX; n];
        let mut queue = VecDeque::with_capacity(n);
        dist[u.index()] = 0;
        queue.push_back(u);
        while let Some(v) = queue.pop_front() {
            let (x, y) = self.coords(v);
            let step = |c: usize, delta: isize| -> Option<usize> {
                let next = c as isize + delta;
                if (0..self.side as isize).contains(&next) {
                    Some(next as usize)
                } else if self.wrap {
                    Some(next.rem_euclid(self.side as isize) as usize)
                } else {
                    None
                }
            };
            let candidates = [
                step(x, 1).map(|nx| (nx, y)),
                step(x, -1).map(|nx| (nx, y)),
                step(y, 1).map(|ny| (x, ny)),
                step(y, -1).map(|ny| (x, ny)),
            ];
            for (nx, ny) in candidates.into_iter().flatten() {
                let w = ny * self.side + nx;
                if dist[w] == u32::MAX {
                    dist[w] = dist[v.index()] + 1;
                    queue.push_back(NodeId(w as u32));
                }
            }
        }
        Ok(dist)
    }
}

pub(crate) fn isqrt(n: usize) -> usize {
    let mut s = libm::sqrt(n as f64) as usize;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s
}
