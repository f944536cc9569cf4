//! Per-file Voronoi tessellations.
//!
//! Every node is owned by a nearest holder of the file. A multi-source BFS
//! yields the distance field; the set of nearest holders of a node is the
//! union of the sets of its neighbours one step closer, and the owner is drawn
//! uniformly from that set, the same rule the nearest-replica strategy uses
//! for ties.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::placement::{FileId, Placement};
use crate::topology::{NodeId, TorusGeometry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoronoiTessellation {
    pub file: FileId,
    /// `owner[v]` is the cell center serving node `v`.
    pub owner: Vec<NodeId>,
    /// `distance[v]` is the hop distance from `v` to its owner.
    pub distance: Vec<u32>,
    /// `(center, size)` for every holder, ascending by center.
    pub cell_sizes: Vec<(NodeId, u32)>,
}

impl VoronoiTessellation {
    pub fn max_cell_size(&self) -> u32 {
        self.cell_sizes.iter().map(|&(_, s)| s).max().unwrap_or(0)
    }

    /// Members of every cell, grouped by center in ascending center order.
    pub fn cells(&self) -> Vec<(NodeId, Vec<NodeId>)> {
        let mut slot = vec![usize::MAX; self.owner.len()];
        let mut out: Vec<(NodeId, Vec<NodeId>)> = self
            .cell_sizes
            .iter()
            .enumerate()
            .map(|(i, &(c, s))| {
                slot[c.index()] = i;
                (c, Vec::with_capacity(s as usize))
            })
            .collect();
        for (v, o) in self.owner.iter().enumerate() {
            out[slot[o.index()]].1.push(NodeId(v as u32));
        }
        out
    }
}

/// Tessellation of the torus by the holders of `file`.
pub fn voronoi<R: Rng + ?Sized>(
    file: FileId,
    p: &Placement,
    geo: &TorusGeometry,
    rng: &mut R,
) -> Result<VoronoiTessellation> {
    let n = geo.n();
    if p.n() != n {
        return Err(Error::DimensionMismatch { what: "placement", expected: n, got: p.n() });
    }
    let holders = p.replicas(file);
    if holders.is_empty() {
        return Err(Error::NoReplicas(file));
    }

    let mut dist = vec![u32::MAX; n];
    let mut nearest: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut owner = vec![NodeId(0); n];
    let mut queue = VecDeque::with_capacity(n);
    for &h in holders {
        dist[h as usize] = 0;
        nearest[h as usize].push(h);
        queue.push_back(NodeId(h));
    }
    let mut scratch = Vec::new();
    while let Some(v) = queue.pop_front() {
        let dv = dist[v.index()];
        if dv > 0 {
            // every neighbour one step closer is already finalized
            scratch.clear();
            for w in geo.neighbors(v) {
                if dist[w.index()] == dv - 1 {
                    scratch.extend_from_slice(&nearest[w.index()]);
                }
            }
            scratch.sort_unstable();
            scratch.dedup();
            nearest[v.index()].extend_from_slice(&scratch);
        }
        for w in geo.neighbors(v) {
            if dist[w.index()] == u32::MAX {
                dist[w.index()] = dv + 1;
                queue.push_back(w);
            }
        }
    }

    // draw owners in node order so the tie-break stream is layout independent
    for v in 0..n {
        let set = &nearest[v];
        let pick = if set.len() > 1 { set[rng.gen_range(0..set.len())] } else { set[0] };
        owner[v] = NodeId(pick);
    }

    let mut sizes = vec![0u32; n];
    for o in &owner {
        sizes[o.index()] += 1;
    }
    let cell_sizes = holders.iter().map(|&h| (NodeId(h), sizes[h as usize])).collect();
    Ok(VoronoiTessellation { file, owner, distance: dist, cell_sizes })
}

/// Extent of a set of axis coordinates: the shortest covering interval, which
/// on the torus may wrap around.
fn axis_extent(occupied: &[bool], wrap: bool) -> usize {
    let side = occupied.len();
    let positions: Vec<usize> = (0..side).filter(|&i| occupied[i]).collect();
    let (first, last) = match (positions.first(), positions.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return 0,
    };
    if !wrap {
        return last - first + 1;
    }
    let mut max_gap = first + side - last;
    for w in positions.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    side - max_gap + 1
}

/// Side of the smallest axis-aligned (torus-aware) box covering `cell`:
/// the larger of the x and y extents.
pub fn bounding_box_side(cell: &[NodeId], geo: &TorusGeometry) -> usize {
    let side = geo.side();
    let mut xs = vec![false; side];
    let mut ys = vec![false; side];
    for &v in cell {
        let (x, y) = geo.coords(v);
        xs[x] = true;
        ys[y] = true;
    }
    axis_extent(&xs, geo.wraps()).max(axis_extent(&ys, geo.wraps()))
}

/// Summary of one file's tessellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellStats {
    pub file: FileId,
    pub cells: usize,
    pub max_cell_size: u32,
    /// Bounding-box side of the largest cell (first such center on ties).
    pub largest_cell_bbox_side: usize,
    /// Largest bounding-box side over all cells.
    pub max_bbox_side: usize,
    /// Largest owner distance, the cell radius.
    pub max_radius: u32,
}

/// Tessellates every file in `files` and reports its cell statistics.
pub fn max_cell_stats<R: Rng + ?Sized>(
    p: &Placement,
    geo: &TorusGeometry,
    rng: &mut R,
    files: impl IntoIterator<Item = FileId>,
) -> Result<Vec<CellStats>> {
    let mut out = Vec::new();
    for file in files {
        if file == 0 || file as usize > p.library_size() {
            return Err(Error::FileOutOfRange { file, library: p.library_size() });
        }
        let t = voronoi(file, p, geo, rng)?;
        let mut best: Option<(u32, usize)> = None;
        let mut max_bbox_side = 0;
        for (_, members) in t.cells() {
            let bbox = bounding_box_side(&members, geo);
            max_bbox_side = max_bbox_side.max(bbox);
            let size = members.len() as u32;
            if best.map_or(true, |(s, _)| size > s) {
                best = Some((size, bbox));
            }
        }
        let (max_cell_size, largest_cell_bbox_side) = best.unwrap_or((0, 0));
        out.push(CellStats {
            file,
            cells: t.cell_sizes.len(),
            max_cell_size,
            largest_cell_bbox_side,
            max_bbox_side,
            max_radius: t.distance.iter().copied().max().unwrap_or(0),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::PopularityProfile;
    use crate::seed;

    fn holders_at(geo: &TorusGeometry, at: &[(usize, usize)]) -> Placement {
        let n = geo.n();
        let slots = (0..n)
            .map(|i| if at.iter().any(|&(x, y)| geo.node(x, y).index() == i) { 1 } else { 2 })
            .collect();
        Placement::from_slots(n, 1, 2, slots).unwrap()
    }

    #[test]
    fn single_holder_owns_everything() {
        let g = TorusGeometry::torus(6).unwrap();
        let p = holders_at(&g, &[(3, 1)]);
        let t = voronoi(1, &p, &g, &mut seed::rng(0)).unwrap();
        assert_eq!(t.cell_sizes, alloc::vec![(g.node(3, 1), 36)]);
        assert_eq!(t.max_cell_size(), 36);
    }

    #[test]
    fn two_antipodal_holders() {
        let g = TorusGeometry::torus(4).unwrap();
        let p = holders_at(&g, &[(0, 0), (2, 2)]);
        let mut total_a = 0u64;
        let trials = 4000;
        for s in 0..trials {
            let t = voronoi(1, &p, &g, &mut seed::rng(s)).unwrap();
            let sum: u32 = t.cell_sizes.iter().map(|c| c.1).sum();
            assert_eq!(sum, 16);
            assert_eq!(t.owner[g.node(0, 0).index()], g.node(0, 0));
            assert_eq!(t.owner[g.node(2, 2).index()], g.node(2, 2));
            total_a += t.cell_sizes[0].1 as u64;
        }
        // symmetric instance: each center expects half of the torus
        let mean = total_a as f64 / trials as f64;
        assert!((mean - 8.0).abs() < 0.15, "mean cell size {mean}");
    }

    #[test]
    fn unplaced_file_errors() {
        let g = TorusGeometry::torus(3).unwrap();
        let p = Placement::from_slots(9, 1, 3, alloc::vec![1; 9]).unwrap();
        assert_eq!(voronoi(3, &p, &g, &mut seed::rng(0)), Err(Error::NoReplicas(3)));
    }

    #[test]
    fn axis_extent_wraps() {
        let mut occ = alloc::vec![false; 10];
        occ[0] = true;
        occ[9] = true;
        assert_eq!(axis_extent(&occ, true), 2);
        assert_eq!(axis_extent(&occ, false), 10);
        let all = alloc::vec![true; 10];
        assert_eq!(axis_extent(&all, true), 10);
    }

    #[test]
    fn single_global_replica_cell_is_whole_torus() {
        let g = TorusGeometry::torus(5).unwrap();
        let prof = PopularityProfile::uniform(1).unwrap();
        let p = Placement::place(25, 1, &prof, 0).unwrap();
        // every node holds the file: 25 singleton cells
        let stats = max_cell_stats(&p, &g, &mut seed::rng(1), [1]).unwrap();
        assert_eq!(stats[0].max_cell_size, 1);
        let p = holders_at(&g, &[(4, 4)]);
        let stats = max_cell_stats(&p, &g, &mut seed::rng(1), [1]).unwrap();
        assert_eq!(stats[0].max_cell_size, 25);
        assert_eq!(stats[0].largest_cell_bbox_side, 5);
    }
}
