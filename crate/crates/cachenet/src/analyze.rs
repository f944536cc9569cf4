//! Seeded sweeps over the structural analyses: Voronoi cell sizes,
//! configuration-graph degrees and placement goodness.
//!
//! Sample `i` places files with `derive(derive(base, Replication, i), Placement, 0)`,
//! the same placement seed that replication `i` of an experiment uses.

use cachenet_core::analysis::{
    build_config_graph, default_delta, default_mu, goodness_check, max_cell_stats, predicted_degree,
};
use cachenet_core::seed::{self, Stream};
use cachenet_core::{Placement, PopularityProfile, TorusGeometry};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};
use crate::spec::{Rule, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    Voronoi,
    Confgraph,
    Goodness,
}

/// A versioned analysis sweep stored as JSON, e.g.
///
/// ```json
/// { "name": "goodness", "analysis": "goodness", "n": 4096, "K": "n",
///   "M": 12, "alpha": 0.3, "seeds": 100, "base_seed": 7 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRecipe {
    pub name: String,
    #[serde(default = "one")]
    pub version: u32,
    pub analysis: AnalysisKind,
    pub n: usize,
    #[serde(rename = "K")]
    pub library: Value,
    #[serde(rename = "M")]
    pub cache: Value,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "yes")]
    pub wrap: bool,
    /// Goodness only.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Configuration graph only.
    #[serde(default)]
    pub r: Option<Value>,
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn one() -> u32 {
    1
}

fn yes() -> bool {
    true
}

impl AnalysisRecipe {
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn params(&self) -> Result<SweepParams> {
        let n = self.n;
        Ok(SweepParams {
            n,
            k: Rule::from_value(&self.library)?.eval_count(n, "K")?,
            m: Rule::from_value(&self.cache)?.eval_count(n, "M")?,
            gamma: self.gamma,
            wrap: self.wrap,
            seeds: self.seeds,
            base_seed: self.base_seed,
        })
    }

    pub fn radius(&self) -> Result<usize> {
        let r = self.r.as_ref().ok_or_else(|| HarnessError::InvalidSpec("confgraph recipe needs `r`".into()))?;
        Rule::from_value(r)?.eval_count(self.n, "r")
    }

    pub fn alpha(&self) -> Result<f64> {
        self.alpha.ok_or_else(|| HarnessError::InvalidSpec("goodness recipe needs `alpha`".into()))
    }
}

/// Shared sweep parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// Zipf exponent; `None` for uniform popularity.
    pub gamma: Option<f64>,
    pub wrap: bool,
    pub seeds: usize,
    pub base_seed: u64,
}

impl SweepParams {
    pub fn uniform(n: usize, k: usize, m: usize, seeds: usize, base_seed: u64) -> Self {
        SweepParams { n, k, m, gamma: None, wrap: true, seeds, base_seed }
    }

    fn geometry(&self) -> Result<TorusGeometry> {
        Ok(TorusGeometry::with_nodes(self.n, self.wrap)?)
    }

    fn run_seed(&self, i: usize) -> u64 {
        seed::derive(self.base_seed, Stream::Replication, i as u64)
    }

    fn placement(&self, i: usize) -> Result<Placement> {
        let profile = match self.gamma {
            None => PopularityProfile::uniform(self.k)?,
            Some(g) => PopularityProfile::zipf(self.k, g)?,
        };
        Ok(Placement::place(self.n, self.m, &profile, seed::derive(self.run_seed(i), Stream::Placement, 0))?)
    }

    fn check(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(HarnessError::InvalidSpec("seeds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiSample {
    pub seed: u64,
    /// Largest cell over all placed files.
    pub max_cell_size: u32,
    /// Largest cell bounding-box side over all cells of all placed files.
    pub max_bbox_side: usize,
    pub unplaced_files: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiSweep {
    pub samples: Vec<VoronoiSample>,
    /// `8 K ln n / M`
    pub cell_bound: f64,
    /// `2 * 5 sqrt(K ln n / M)`
    pub bbox_bound: f64,
}

impl VoronoiSweep {
    pub fn within_cell_bound(&self) -> usize {
        self.samples.iter().filter(|s| s.max_cell_size as f64 <= self.cell_bound).count()
    }

    pub fn within_bbox_bound(&self) -> usize {
        self.samples.iter().filter(|s| s.max_bbox_side as f64 <= self.bbox_bound).count()
    }
}

/// Tessellates every placed file for each seed.
pub fn voronoi_sweep(params: &SweepParams) -> Result<VoronoiSweep> {
    params.check()?;
    let geo = params.geometry()?;
    let samples = (0..params.seeds)
        .into_par_iter()
        .map(|i| {
            let p = params.placement(i)?;
            let placed: Vec<u32> = (1..=params.k as u32).filter(|&f| !p.replicas(f).is_empty()).collect();
            let mut rng = seed::substream(params.run_seed(i), Stream::Voronoi, 0);
            let stats = max_cell_stats(&p, &geo, &mut rng, placed.iter().copied())?;
            Ok(VoronoiSample {
                seed: params.run_seed(i),
                max_cell_size: stats.iter().map(|s| s.max_cell_size).max().unwrap_or(0),
                max_bbox_side: stats.iter().map(|s| s.max_bbox_side).max().unwrap_or(0),
                unplaced_files: params.k - placed.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x = params.k as f64 * (params.n as f64).ln() / params.m as f64;
    Ok(VoronoiSweep { samples, cell_bound: 8.0 * x, bbox_bound: 2.0 * 5.0 * x.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfGraphSample {
    pub seed: u64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
    pub edges: usize,
    /// `t̄² |B_2r| / K`
    pub predicted_degree: f64,
}

impl ConfGraphSample {
    /// `max / min` degree; infinite when some node is isolated.
    pub fn degree_ratio(&self) -> f64 {
        if self.min_degree == 0 {
            f64::INFINITY
        } else {
            self.max_degree as f64 / self.min_degree as f64
        }
    }

    pub fn mean_over_predicted(&self) -> f64 {
        self.mean_degree / self.predicted_degree
    }
}

pub fn confgraph_sweep(params: &SweepParams, r: usize) -> Result<Vec<ConfGraphSample>> {
    params.check()?;
    let geo = params.geometry()?;
    (0..params.seeds)
        .into_par_iter()
        .map(|i| {
            let p = params.placement(i)?;
            let h = build_config_graph(&p, &geo, r)?;
            let degrees = h.degrees();
            Ok(ConfGraphSample {
                seed: params.run_seed(i),
                min_degree: degrees.iter().copied().min().unwrap_or(0) as usize,
                max_degree: degrees.iter().copied().max().unwrap_or(0) as usize,
                mean_degree: 2.0 * h.edge_count() as f64 / params.n as f64,
                edges: h.edge_count(),
                predicted_degree: predicted_degree(&p, &geo, r),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessSample {
    pub seed: u64,
    pub pass: bool,
    pub sparse_nodes: usize,
    pub heavy_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessSweep {
    pub delta: f64,
    pub mu: usize,
    pub samples: Vec<GoodnessSample>,
}

impl GoodnessSweep {
    pub fn passes(&self) -> usize {
        self.samples.iter().filter(|s| s.pass).count()
    }

    pub fn pass_rate(&self) -> f64 {
        self.passes() as f64 / self.samples.len() as f64
    }
}

pub fn goodness_sweep(params: &SweepParams, alpha: f64) -> Result<GoodnessSweep> {
    params.check()?;
    let samples = (0..params.seeds)
        .into_par_iter()
        .map(|i| {
            let rep = goodness_check(&params.placement(i)?, alpha)?;
            Ok(GoodnessSample {
                seed: params.run_seed(i),
                pass: rep.pass,
                sparse_nodes: rep.sparse_nodes.len(),
                heavy_pairs: rep.heavy_pairs.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GoodnessSweep { delta: default_delta(alpha), mu: default_mu(alpha), samples })
}
