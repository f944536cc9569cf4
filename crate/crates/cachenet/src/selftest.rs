//! Oracle checks that run from the binary, without the test harness.

use cachenet_core::analysis::{build_config_graph, goodness_with, predicted_cost, voronoi};
use cachenet_core::seed::{self, Stream};
use cachenet_core::strategy::{run, sample_pair};
use cachenet_core::{
    NodeId, Placement, PopularityProfile, Radius, RequestStream, StrategyConfig, TorusGeometry,
};

use crate::experiment::{run_experiment, RunOptions};
use crate::spec::ExperimentSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> CheckResult {
    match f() {
        Ok(detail) => CheckResult { name, pass: true, detail },
        Err(detail) => CheckResult { name, pass: false, detail },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn geometry() -> Result<String, String> {
    let mut pairs = 0usize;
    for side in 3..=16 {
        for wrap in [true, false] {
            let g = TorusGeometry::new(side, wrap).map_err(|e| e.to_string())?;
            for u in 0..g.n() as u32 {
                let u = NodeId(u);
                let bfs = g.bfs_distance_oracle(u).map_err(|e| e.to_string())?;
                for (v, &d) in bfs.iter().enumerate() {
                    let got = g.distance(u, NodeId(v as u32));
                    ensure(got == d as usize, || format!("side {side} wrap {wrap}: d({u:?}, {v}) = {got}, BFS {d}"))?;
                }
                for r in 0..=g.diameter() {
                    let expect: Vec<NodeId> =
                        (0..g.n() as u32).map(NodeId).filter(|v| bfs[v.index()] as usize <= r).collect();
                    ensure(g.ball(u, r) == expect, || format!("side {side} wrap {wrap}: ball({u:?}, {r}) differs"))?;
                    if wrap && 2 * r < side {
                        ensure(g.ball_size(u, r) == 2 * r * (r + 1) + 1, || format!("ball size side {side} r {r}"))?;
                    }
                }
                pairs += g.n();
            }
        }
    }
    Ok(format!("{pairs} pairs agree with BFS"))
}

fn nearest_minimal() -> Result<String, String> {
    let g = TorusGeometry::torus(20).unwrap();
    let prof = PopularityProfile::uniform(40).unwrap();
    let p = Placement::place(g.n(), 2, &prof, 1).unwrap();
    let stream = RequestStream::generate(g.n(), g.n(), &prof, 2);
    let s = run(&stream, &p, &g, &StrategyConfig::nearest_replica(), 3).map_err(|e| e.to_string())?;
    // C equals the mean brute-force nearest distance over served requests
    let mut total = 0usize;
    let mut served = 0u64;
    for r in stream.requests() {
        if let Some(best) = p.replicas(r.file).iter().map(|&v| g.distance(r.origin, NodeId(v))).min() {
            total += best;
            served += 1;
        }
    }
    ensure(served == s.served && total as u64 == s.hop_sum, || {
        format!("hop sum {} vs brute force {total}", s.hop_sum)
    })?;
    Ok(format!("{served} requests at minimal distance"))
}

fn pair_uniformity() -> Result<String, String> {
    let mut counts = [[0u32; 4]; 4];
    let mut rng = seed::rng(42);
    let trials = 100_000;
    for _ in 0..trials {
        let (i, j) = sample_pair(4, &mut rng);
        counts[i.min(j)][i.max(j)] += 1;
    }
    let worst = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .map(|(i, j)| (counts[i][j] as f64 / trials as f64 - 1.0 / 6.0).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 0.02, || format!("pair frequency off by {worst}"))?;
    Ok(format!("max deviation {worst:.4}"))
}

fn voronoi_oracle() -> Result<String, String> {
    for (side, wrap) in [(7, true), (8, false), (12, true)] {
        let g = TorusGeometry::new(side, wrap).unwrap();
        let p = Placement::place(g.n(), 1, &PopularityProfile::uniform(5).unwrap(), side as u64).unwrap();
        for f in (1..=5).filter(|&f| !p.replicas(f).is_empty()) {
            let t = voronoi(f, &p, &g, &mut seed::substream(1, Stream::Voronoi, f as u64)).map_err(|e| e.to_string())?;
            for v in 0..g.n() as u32 {
                let v = NodeId(v);
                let best = p.replicas(f).iter().map(|&h| g.distance(v, NodeId(h))).min().unwrap();
                ensure(p.caches(t.owner[v.index()], f) && g.distance(v, t.owner[v.index()]) == best, || {
                    format!("side {side}: owner of {v:?} is not a nearest holder")
                })?;
            }
        }
    }
    Ok("owners are nearest holders".into())
}

fn config_graph_oracle() -> Result<String, String> {
    let g = TorusGeometry::torus(9).unwrap();
    let p = Placement::place(81, 3, &PopularityProfile::uniform(20).unwrap(), 5).unwrap();
    let h = build_config_graph(&p, &g, 2).map_err(|e| e.to_string())?;
    let mut edges = 0;
    for u in 0..81u32 {
        for v in u + 1..81 {
            let (u, v) = (NodeId(u), NodeId(v));
            let expect = g.distance(u, v) <= 4 && p.shares_file(u, v);
            edges += expect as usize;
            ensure(h.has_edge(u, v) == expect, || format!("edge {u:?}-{v:?}"))?;
        }
    }
    ensure(edges == h.edge_count(), || "edge count".into())?;
    Ok(format!("{edges} edges match the definition"))
}

fn goodness_oracle() -> Result<String, String> {
    let p = Placement::place(49, 5, &PopularityProfile::uniform(10).unwrap(), 8).unwrap();
    let r = goodness_with(&p, 0.0, 3);
    let mut brute = Vec::new();
    for u in 0..49u32 {
        for v in u + 1..49 {
            let t = p.overlap(NodeId(u), NodeId(v)).map_err(|e| e.to_string())?.0;
            if t >= 3 {
                brute.push((NodeId(u), NodeId(v), t));
            }
        }
    }
    ensure(r.heavy_pairs == brute, || "heavy pairs differ from the all-pairs scan".into())?;
    Ok(format!("{} heavy pairs match", brute.len()))
}

fn cost_closed_form() -> Result<String, String> {
    let u = PopularityProfile::uniform(100).unwrap();
    let a = predicted_cost(&u, 1);
    let b = predicted_cost(&u, 100);
    let b_expect = 1.0 / (1.0 - 0.99f64.powi(100)).sqrt();
    ensure((a - 10.0).abs() < 1e-9 && (b - b_expect).abs() < 1e-9, || format!("got {a}, {b}"))?;
    Ok(format!("C(100,1) = {a:.4}, C(100,100) = {b:.4}"))
}

fn harness_determinism() -> Result<String, String> {
    let spec = ExperimentSpec::from_json(
        r#"{"name":"selftest","geometry":{"side":12},"K":20,"M":[1,4],
            "strategies":[{"kind":"nearest_replica"},{"kind":"two_choices","radius":[1,"unbounded"]}],
            "replications":4,"base_seed":11}"#,
    )
    .map_err(|e| e.to_string())?;
    let a = run_experiment(&spec, &RunOptions { threads: Some(1), ..Default::default() }).map_err(|e| e.to_string())?;
    let b = run_experiment(&spec, &RunOptions::default()).map_err(|e| e.to_string())?;
    let (ca, cb) = (a.runs_table().to_csv_string().unwrap(), b.runs_table().to_csv_string().unwrap());
    ensure(ca == cb, || "reruns differ".into())?;
    let full = StrategyConfig::two_choices(Radius::Unbounded);
    ensure(a.records.iter().any(|r| r.strategy == full), || "missing config".into())?;
    Ok(format!("{} runs, byte-identical CSV", a.records.len()))
}

/// Runs every check. Each conservation violation inside the experiment
/// check surfaces as a failure.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("geometry vs BFS", geometry),
        check("nearest replica minimality", nearest_minimal),
        check("pair sampling uniformity", pair_uniformity),
        check("voronoi owners", voronoi_oracle),
        check("configuration graph", config_graph_oracle),
        check("goodness pair scan", goodness_oracle),
        check("cost closed form", cost_closed_form),
        check("harness determinism", harness_determinism),
    ]
}
