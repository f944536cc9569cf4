use cachenet_core::{NodeId, TorusGeometry};
use proptest::prelude::*;

fn all_nodes(g: &TorusGeometry) -> impl Iterator<Item = NodeId> {
    (0..g.n() as u32).map(NodeId)
}

#[test]
fn distance_matches_bfs_all_pairs() {
    for side in 3..=16 {
        for wrap in [true, false] {
            let g = TorusGeometry::new(side, wrap).unwrap();
            for u in all_nodes(&g) {
                let bfs = g.bfs_distance_oracle(u).unwrap();
                assert_eq!(bfs.len(), g.n());
                for v in all_nodes(&g) {
                    assert_eq!(g.distance(u, v), bfs[v.index()] as usize, "side {side} wrap {wrap}");
                }
            }
        }
    }
}

#[test]
fn ball_matches_bfs_filter() {
    for side in 3..=16 {
        for wrap in [true, false] {
            let g = TorusGeometry::new(side, wrap).unwrap();
            for u in all_nodes(&g) {
                let bfs = g.bfs_distance_oracle(u).unwrap();
                for r in 0..=g.diameter() + 1 {
                    let expect: Vec<NodeId> =
                        all_nodes(&g).filter(|v| bfs[v.index()] as usize <= r).collect();
                    assert_eq!(g.ball(u, r), expect, "side {side} wrap {wrap} r {r}");
                }
            }
        }
    }
}

#[test]
fn metric_axioms_exhaustive() {
    for side in [3, 4, 5, 7] {
        for wrap in [true, false] {
            let g = TorusGeometry::new(side, wrap).unwrap();
            for u in all_nodes(&g) {
                for v in all_nodes(&g) {
                    let duv = g.distance(u, v);
                    assert_eq!(duv, g.distance(v, u));
                    assert_eq!(duv == 0, u == v);
                    for w in all_nodes(&g) {
                        assert!(g.distance(u, w) <= duv + g.distance(v, w));
                    }
                }
            }
        }
    }
}

#[test]
fn torus_ball_cardinality_formula() {
    for side in 3..=30 {
        let g = TorusGeometry::torus(side).unwrap();
        for r in (0..).take_while(|r| 2 * r < side) {
            let expect = 2 * r * (r + 1) + 1;
            for u in all_nodes(&g) {
                assert_eq!(g.ball_size(u, r), expect, "side {side} r {r}");
            }
        }
    }
}

#[test]
fn balls_are_nested() {
    let g = TorusGeometry::torus(9).unwrap();
    let u = g.node(4, 7);
    for r in 0..10 {
        let small = g.ball(u, r);
        let big = g.ball(u, r + 1);
        assert!(small.iter().all(|v| big.binary_search(v).is_ok()));
    }
}

#[test]
fn even_side_antipode_is_unambiguous() {
    let g = TorusGeometry::torus(8).unwrap();
    assert_eq!(g.distance(g.node(0, 0), g.node(4, 4)), 8);
    assert_eq!(g.diameter(), 8);
    let ring: usize = g.ball_size(g.node(0, 0), 8) - g.ball_size(g.node(0, 0), 7);
    assert_eq!(ring, 1);
}

proptest! {
    #[test]
    fn coordinates_round_trip(side in 2usize..300, seed in any::<u64>()) {
        let g = TorusGeometry::torus(side).unwrap();
        let i = (seed % g.n() as u64) as u32;
        let (x, y) = g.coords(NodeId(i));
        prop_assert_eq!(g.node(x, y), NodeId(i));
        prop_assert_eq!(i as usize, y * side + x);
    }

    #[test]
    fn distance_formula(side in 2usize..500, a in any::<u64>(), b in any::<u64>(), wrap in any::<bool>()) {
        let g = TorusGeometry::new(side, wrap).unwrap();
        let u = NodeId((a % g.n() as u64) as u32);
        let v = NodeId((b % g.n() as u64) as u32);
        let (ux, uy) = g.coords(u);
        let (vx, vy) = g.coords(v);
        let axis = |p: usize, q: usize| {
            let d = p.abs_diff(q);
            if wrap { d.min(side - d) } else { d }
        };
        prop_assert_eq!(g.distance(u, v), axis(ux, vx) + axis(uy, vy));
        prop_assert!(g.distance(u, v) <= g.diameter());
    }

    #[test]
    fn ring_members_have_exact_distance(side in 2usize..40, a in any::<u64>(), d in 0usize..45, wrap in any::<bool>()) {
        let g = TorusGeometry::new(side, wrap).unwrap();
        let u = NodeId((a % g.n() as u64) as u32);
        let mut seen = Vec::new();
        g.for_each_in_ring(u, d, |v| seen.push(v));
        let count = seen.len();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), count, "ring must not repeat nodes");
        for v in seen {
            prop_assert_eq!(g.distance(u, v), d);
        }
    }
}
