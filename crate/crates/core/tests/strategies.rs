use cachenet_core::seed::{self, Stream};
use cachenet_core::strategy::{nearest_replica_assign, run, sample_pair, two_choice_assign};
use cachenet_core::{
    Fallback, LoadState, NodeId, Placement, PopularityProfile, Radius, Request, RequestStream,
    StrategyConfig, TorusGeometry,
};
use rand::Rng;

fn setup(side: usize, k: usize, m: usize, gamma: f64, s: u64) -> (TorusGeometry, Placement, RequestStream) {
    let g = TorusGeometry::torus(side).unwrap();
    let prof = PopularityProfile::zipf(k, gamma).unwrap();
    let p = Placement::place(g.n(), m, &prof, seed::derive(s, Stream::Placement, 0)).unwrap();
    let r = RequestStream::generate(g.n(), g.n(), &prof, seed::derive(s, Stream::Workload, 0));
    (g, p, r)
}

#[test]
fn nearest_replica_is_minimal() {
    // brute-force scan over all holders for 1000+ audited assignments, on
    // both the list-scan and the ring-scan paths
    let mut audited = 0;
    for (side, k, m) in [(20, 30, 2), (24, 4, 3), (15, 200, 1), (30, 60, 1)] {
        let (g, p, stream) = setup(side, k, m, 0.6, side as u64);
        let mut st = LoadState::new(g.n());
        let mut rng = seed::rng(1);
        for req in stream.requests() {
            let holders = p.replicas(req.file);
            match nearest_replica_assign(req, &p, &g, &mut st, &mut rng) {
                None => assert!(holders.is_empty()),
                Some(a) => {
                    audited += 1;
                    assert!(p.caches(a.server, req.file));
                    assert_eq!(a.hops, g.distance(req.origin, a.server));
                    let best = holders.iter().map(|&v| g.distance(req.origin, NodeId(v))).min().unwrap();
                    assert_eq!(a.hops, best);
                }
            }
        }
    }
    assert!(audited >= 1000);
}

#[test]
fn nearest_replica_tie_is_fair() {
    let g = TorusGeometry::torus(5).unwrap();
    let a = g.node(0, 1);
    let b = g.node(1, 0);
    let slots = (0..25u32).map(|i| if i == a.0 || i == b.0 { 1 } else { 2 }).collect();
    let p = Placement::from_slots(25, 1, 2, slots).unwrap();
    let req = Request { seq: 0, origin: g.node(0, 0), file: 1 };
    let trials = 10_000;
    let mut hits_a = 0;
    for t in 0..trials {
        let mut st = LoadState::new(25);
        let got = nearest_replica_assign(&req, &p, &g, &mut st, &mut seed::substream(5, Stream::TieBreak, t)).unwrap();
        assert_eq!(got.hops, 1);
        if got.server == a {
            hits_a += 1;
        }
    }
    let frac = hits_a as f64 / trials as f64;
    assert!((frac - 0.5).abs() <= 0.03, "fraction {frac}");
}

#[test]
fn pair_sampling_is_uniform() {
    let mut counts = [[0u32; 4]; 4];
    let mut rng = seed::rng(42);
    let trials = 100_000;
    for _ in 0..trials {
        let (i, j) = sample_pair(4, &mut rng);
        assert_ne!(i, j);
        counts[i.min(j)][i.max(j)] += 1;
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let f = counts[i][j] as f64 / trials as f64;
            assert!((f - 1.0 / 6.0).abs() <= 0.02, "pair ({i},{j}) frequency {f}");
        }
    }
}

#[test]
fn two_choice_winner_distribution() {
    // four candidates with strictly increasing loads: the lighter member of
    // a uniform pair wins, so node ranks win 3/6, 2/6, 1/6, 0
    let g = TorusGeometry::torus(4).unwrap();
    let holders = [0u32, 5, 10, 15];
    let slots = (0..16u32).map(|i| if holders.contains(&i) { 1 } else { 2 }).collect();
    let p = Placement::from_slots(16, 1, 2, slots).unwrap();
    let cfg = StrategyConfig::two_choices(Radius::Unbounded);
    let mut wins = [0u32; 4];
    let mut rng = seed::rng(9);
    let trials = 60_000;
    for _ in 0..trials {
        let mut st = LoadState::new(16);
        for (rank, &h) in holders.iter().enumerate() {
            st.loads[h as usize] = rank as u32 + 1;
        }
        let a = two_choice_assign(&Request { seq: 0, origin: NodeId(3), file: 1 }, &p, &g, &cfg, &mut st, &mut rng).unwrap();
        wins[holders.iter().position(|&h| h == a.server.0).unwrap()] += 1;
    }
    let expect = [0.5, 1.0 / 3.0, 1.0 / 6.0, 0.0];
    for (w, e) in wins.iter().zip(expect) {
        assert!((*w as f64 / trials as f64 - e).abs() < 0.01);
    }
}

#[test]
fn two_choice_respects_radius() {
    for (r, m) in [(1, 3), (2, 2), (4, 1), (7, 5)] {
        let (g, p, stream) = setup(15, 40, m, 0.0, r as u64 * 13 + m as u64);
        let cfg = StrategyConfig::two_choices(Radius::Bounded(r));
        let mut st = LoadState::new(g.n());
        let mut rng = seed::rng(2);
        for req in stream.requests() {
            if let Some(a) = two_choice_assign(req, &p, &g, &cfg, &mut st, &mut rng) {
                assert!(p.caches(a.server, req.file));
                if !a.fallback {
                    assert!(a.hops <= r);
                } else {
                    // fallback only when nothing in range caches the file
                    assert!(p.replicas(req.file).iter().all(|&v| g.distance(req.origin, NodeId(v)) > r));
                }
            }
        }
        assert_eq!(st.served + st.rejected, g.n() as u64);
    }
}

#[test]
fn candidate_routes_agree() {
    // radius candidates via the replica list and via the ball scan must give
    // the same run; a huge radius forces the unbounded path
    let (g, p, stream) = setup(20, 3, 4, 0.0, 77);
    let a = run(&stream, &p, &g, &StrategyConfig::two_choices(Radius::Bounded(1_000)), 5).unwrap();
    let b = run(&stream, &p, &g, &StrategyConfig::two_choices(Radius::Unbounded), 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn conservation_and_determinism() {
    let configs = [
        StrategyConfig::nearest_replica(),
        StrategyConfig::two_choices(Radius::Unbounded),
        StrategyConfig::two_choices(Radius::Bounded(2)),
        StrategyConfig::two_choices(Radius::Bounded(2)).with_fallback(Fallback::Reject),
    ];
    for s in 0..5 {
        let (g, p, stream) = setup(20, 300, 2, 0.9, s);
        for cfg in &configs {
            let a = run(&stream, &p, &g, cfg, s).unwrap();
            assert_eq!(a.loads.iter().map(|&t| t as u64).sum::<u64>() + a.rejected, stream.len() as u64);
            assert_eq!(a.served + a.rejected, stream.len() as u64);
            assert_eq!(a.max_load, *a.loads.iter().max().unwrap());
            assert_eq!(a, run(&stream, &p, &g, cfg, s).unwrap());
        }
    }
}

/// Classical two-choice balls into bins, written independently of the
/// strategy code.
fn classical_two_choice(n: usize, seed: u64) -> u32 {
    let mut rng = seed::rng(seed);
    let mut bins = vec![0u32; n];
    for _ in 0..n {
        let a = rng.gen_range(0..n);
        let b = loop {
            let b = rng.gen_range(0..n);
            if b != a {
                break b;
            }
        };
        let pick = match bins[a].cmp(&bins[b]) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => if rng.gen::<bool>() { a } else { b },
        };
        bins[pick] += 1;
    }
    bins.into_iter().max().unwrap()
}

#[test]
fn full_replication_reduces_to_balls_into_bins() {
    let side = 100;
    let g = TorusGeometry::torus(side).unwrap();
    let p = Placement::full_replication(g.n(), 4).unwrap();
    let prof = PopularityProfile::uniform(4).unwrap();
    let seeds = 20;
    let (mut ours, mut theirs) = (0.0, 0.0);
    for s in 0..seeds {
        let stream = RequestStream::generate(g.n(), g.n(), &prof, seed::derive(s, Stream::Workload, 0));
        let m = run(&stream, &p, &g, &StrategyConfig::two_choices(Radius::Unbounded), seed::derive(s, Stream::TieBreak, 0)).unwrap();
        assert_eq!(m.rejected, 0);
        ours += m.max_load as f64;
        theirs += classical_two_choice(g.n(), seed::derive(s, Stream::Replication, 0)) as f64;
    }
    let (ours, theirs) = (ours / seeds as f64, theirs / seeds as f64);
    assert!((ours - theirs).abs() <= 1.0, "strategy {ours} vs classical {theirs}");
    assert!((2.0..=5.0).contains(&ours));
}

#[test]
fn two_choices_dominates_nearest_with_large_caches() {
    // 45x45 torus, K = 500, M = 50: paired seeds
    let seeds = 200;
    let (mut one, mut two) = (0.0, 0.0);
    for s in 0..seeds {
        let (g, p, stream) = setup(45, 500, 50, 0.0, 1000 + s);
        let t = seed::derive(s, Stream::TieBreak, 0);
        one += run(&stream, &p, &g, &StrategyConfig::nearest_replica(), t).unwrap().max_load as f64;
        two += run(&stream, &p, &g, &StrategyConfig::two_choices(Radius::Unbounded), t).unwrap().max_load as f64;
    }
    assert!(two <= one, "two choices {} vs nearest {}", two / seeds as f64, one / seeds as f64);
}
