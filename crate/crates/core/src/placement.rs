//! Proportional cache placement.
//!
//! Each node independently draws `M` files with replacement from the
//! popularity profile, so a node may hold duplicate copies of a file. The
//! placement keeps the raw slots, a per-node sorted list of distinct files and
//! the inverted index `file -> replica holders`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::popularity::PopularityProfile;
use crate::seed;
use crate::topology::NodeId;

/// 1-based file id (rank in the popularity profile).
pub type FileId = u32;

/// Compressed rows: `data[offsets[i]..offsets[i + 1]]` is row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Rows {
    offsets: Vec<u32>,
    data: Vec<u32>,
}

impl Rows {
    #[inline]
    fn row(&self, i: usize) -> &[u32] {
        &self.data[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    n: usize,
    cache_size: usize,
    library: usize,
    slots: Vec<FileId>,
    distinct: Rows,
    replicas: Rows,
}

impl Placement {
    /// Random proportional placement: `n` nodes each draw `m` iid files from
    /// `profile`. Node 0 draws first; every draw consumes one `u64`.
    pub fn place(n: usize, m: usize, profile: &PopularityProfile, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCacheSize(0));
        }
        if m == 0 {
            return Err(Error::InvalidCacheSize(m));
        }
        let mut rng = seed::rng(seed);
        let slots = (0..n * m).map(|_| profile.sample(&mut rng)).collect();
        Self::from_slots(n, m, profile.library_size(), slots)
    }

    /// Every node caches the whole library once (`M = K`, no duplicates).
    pub fn full_replication(n: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyLibrary);
        }
        let slots = (0..n).flat_map(|_| 1..=k as u32).collect();
        Self::from_slots(n, k, k, slots)
    }

    /// Builds a placement from explicit slots, `slots[v * m..(v + 1) * m]`
    /// belonging to node `v`.
    pub fn from_slots(n: usize, m: usize, k: usize, slots: Vec<FileId>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidCacheSize(if n == 0 { n } else { m }));
        }
        if k == 0 {
            return Err(Error::EmptyLibrary);
        }
        if slots.len() != n * m {
            return Err(Error::SlotCount { expected: n * m, got: slots.len() });
        }
        if let Some(&bad) = slots.iter().find(|&&f| f == 0 || f as usize > k) {
            return Err(Error::FileOutOfRange { file: bad, library: k });
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut data = Vec::with_capacity(slots.len());
        let mut row = Vec::with_capacity(m);
        offsets.push(0);
        for node in slots.chunks_exact(m) {
            row.clear();
            row.extend_from_slice(node);
            row.sort_unstable();
            row.dedup();
            data.extend_from_slice(&row);
            offsets.push(data.len() as u32);
        }
        let distinct = Rows { offsets, data };

        // counting sort by file; nodes are visited in ascending order so each
        // replica list comes out sorted
        let mut counts = vec![0u32; k + 1];
        for &f in &distinct.data {
            counts[f as usize] += 1;
        }
        let mut roff = vec![0u32; k + 1];
        for f in 1..=k {
            roff[f] = roff[f - 1] + counts[f];
        }
        let mut cursor = roff.clone();
        let mut rdata = vec![0u32; distinct.data.len()];
        for v in 0..n {
            for &f in distinct.row(v) {
                let c = &mut cursor[f as usize - 1];
                rdata[*c as usize] = v as u32;
                *c += 1;
            }
        }
        Ok(Self {
            n,
            cache_size: m,
            library: k,
            slots,
            distinct,
            replicas: Rows { offsets: roff, data: rdata },
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cache slots per node, `M`.
    #[inline]
    pub fn cache_size(&self) -> usize {
        self.cache_size
    }

    /// Library size, `K`.
    #[inline]
    pub fn library_size(&self) -> usize {
        self.library
    }

    /// All slots, node-major.
    pub fn slots(&self) -> &[FileId] {
        &self.slots
    }

    /// The `M` slots of node `u` in draw order.
    pub fn node_slots(&self, u: NodeId) -> &[FileId] {
        let m = self.cache_size;
        &self.slots[u.index() * m..(u.index() + 1) * m]
    }

    /// Sorted distinct files cached at `u`.
    #[inline]
    pub fn distinct_files(&self, u: NodeId) -> &[FileId] {
        self.distinct.row(u.index())
    }

    /// Sorted indices of the nodes holding at least one copy of `file`
    /// (the replica set `S_j`). Empty for ids outside the library.
    #[inline]
    pub fn replicas(&self, file: FileId) -> &[u32] {
        if file == 0 || file as usize > self.library {
            return &[];
        }
        self.replicas.row(file as usize - 1)
    }

    #[inline]
    pub fn caches(&self, u: NodeId, file: FileId) -> bool {
        self.distinct_files(u).binary_search(&file).is_ok()
    }

    /// `t(u)`: number of distinct files cached at `u`.
    #[inline]
    pub fn distinct_count(&self, u: NodeId) -> usize {
        self.distinct_files(u).len()
    }

    /// `T(u, v)` and `t(u, v)`: distinct files cached at both nodes.
    pub fn overlap(&self, u: NodeId, v: NodeId) -> Result<(usize, Vec<FileId>)> {
        if u == v {
            return Err(Error::SameNode(u.0));
        }
        let mut common = Vec::new();
        merge_common(self.distinct_files(u), self.distinct_files(v), |f| {
            common.push(f);
            true
        });
        Ok((common.len(), common))
    }

    /// `t(u, v)` without collecting the files; stops counting at `limit`.
    pub fn overlap_count(&self, u: NodeId, v: NodeId, limit: usize) -> usize {
        let mut count = 0;
        merge_common(self.distinct_files(u), self.distinct_files(v), |_| {
            count += 1;
            count < limit
        });
        count
    }

    /// True when `u` and `v` share at least one file.
    pub fn shares_file(&self, u: NodeId, v: NodeId) -> bool {
        self.overlap_count(u, v, 1) > 0
    }
}

/// Walks the intersection of two sorted lists; `f` returns false to stop.
fn merge_common(a: &[u32], b: &[u32], mut f: impl FnMut(u32) -> bool) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                if !f(a[i]) {
                    return;
                }
                i += 1;
                j += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_nodes(a: &[u32], b: &[u32], k: usize) -> Placement {
        assert_eq!(a.len(), b.len());
        let mut slots = a.to_vec();
        slots.extend_from_slice(b);
        Placement::from_slots(2, a.len(), k, slots).unwrap()
    }

    #[test]
    fn single_file_library() {
        let p = Placement::place(4, 3, &PopularityProfile::uniform(1).unwrap(), 9).unwrap();
        assert!(p.slots().iter().all(|&f| f == 1));
        assert_eq!(p.replicas(1), &[0, 1, 2, 3]);
    }

    #[test]
    fn distinct_counts() {
        let p = Placement::from_slots(2, 4, 9, vec![7, 7, 7, 7, 1, 2, 2, 5]).unwrap();
        assert_eq!(p.distinct_count(NodeId(0)), 1);
        assert_eq!(p.distinct_count(NodeId(1)), 3);
        let single = Placement::place(10, 1, &PopularityProfile::uniform(50).unwrap(), 3).unwrap();
        for v in 0..10 {
            assert_eq!(single.distinct_count(NodeId(v)), 1);
        }
    }

    #[test]
    fn overlap_cases() {
        let p = two_nodes(&[1, 2], &[3, 4], 4);
        assert_eq!(p.overlap(NodeId(0), NodeId(1)).unwrap(), (0, vec![]));
        let p = Placement::from_slots(2, 3, 9, vec![1, 2, 2, 2, 9, 9]).unwrap();
        assert_eq!(p.overlap(NodeId(0), NodeId(1)).unwrap(), (1, vec![2]));
        assert_eq!(p.overlap(NodeId(0), NodeId(0)), Err(Error::SameNode(0)));
    }

    #[test]
    fn slot_conservation() {
        let prof = PopularityProfile::zipf(30, 0.9).unwrap();
        for (n, m) in [(1, 1), (9, 4), (100, 7)] {
            let p = Placement::place(n, m, &prof, 5).unwrap();
            assert_eq!(p.slots().len(), n * m);
        }
    }

    #[test]
    fn full_replication_holds_everything() {
        let p = Placement::full_replication(9, 5).unwrap();
        for f in 1..=5 {
            assert_eq!(p.replicas(f).len(), 9);
        }
        assert_eq!(p.distinct_count(NodeId(3)), 5);
    }

    #[test]
    fn from_slots_validation() {
        assert!(matches!(
            Placement::from_slots(2, 2, 3, vec![1, 2, 3]),
            Err(Error::SlotCount { .. })
        ));
        assert!(matches!(
            Placement::from_slots(1, 2, 3, vec![1, 4]),
            Err(Error::FileOutOfRange { file: 4, .. })
        ));
        assert!(matches!(
            Placement::from_slots(1, 1, 3, vec![0]),
            Err(Error::FileOutOfRange { file: 0, .. })
        ));
    }

    #[test]
    fn zero_replica_files_are_allowed() {
        let p = Placement::from_slots(2, 1, 3, vec![1, 1]).unwrap();
        assert!(p.replicas(2).is_empty());
        assert!(p.replicas(3).is_empty());
        assert!(p.replicas(99).is_empty());
    }

    #[test]
    fn placement_is_deterministic() {
        let prof = PopularityProfile::zipf(100, 0.8).unwrap();
        let a = Placement::place(64, 5, &prof, 77).unwrap();
        let b = Placement::place(64, 5, &prof, 77).unwrap();
        let c = Placement::place(64, 5, &prof, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
