//! Running experiment specs: seeded replications in parallel, per-run
//! records and per-config aggregates.
//!
//! Replication `i` of every config uses the run seed
//! `derive(base_seed, Replication, i)`, and the placement, request stream and
//! tie-break substreams are derived from that run seed. All strategies of a
//! scenario therefore see the same placement and stream within a
//! replication, which makes strategy comparisons paired.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cachenet_core::seed::{self, Stream};
use cachenet_core::strategy::run;
use cachenet_core::{
    Placement, PopularityProfile, RequestStream, RunSummary, StrategyConfig, TorusGeometry,
};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::plot::render_svg;
use crate::spec::{radius_label, strategy_name, ExperimentSpec, PlacementMode, Scenario};
use crate::table::{fmt_f64, Table, AGGREGATE_COLUMNS, RUN_COLUMNS};

pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Runtime overrides, typically from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub base_seed: Option<u64>,
    pub budget: Option<usize>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

/// One run's outputs with the config that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub config_index: usize,
    pub replication: usize,
    pub scenario: Scenario,
    pub strategy: StrategyConfig,
    pub seed: u64,
    pub summary: RunSummary,
    pub runtime_ms: f64,
}

impl MetricsRecord {
    pub fn csv_row(&self, record_runtime: bool) -> Vec<String> {
        let s = &self.summary;
        vec![
            strategy_name(self.strategy.kind).to_string(),
            self.scenario.n.to_string(),
            self.scenario.k.to_string(),
            self.scenario.m.to_string(),
            radius_label(&self.strategy),
            fmt_f64(self.scenario.gamma_value()),
            self.seed.to_string(),
            s.max_load.to_string(),
            fmt_f64(s.comm_cost),
            s.served.to_string(),
            s.fallbacks.to_string(),
            s.rejected.to_string(),
            if record_runtime { format!("{:.3}", self.runtime_ms) } else { "0".to_string() },
        ]
    }
}

/// Mean, standard error and 95% normal CI of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let se = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        } else {
            0.0
        };
        Summary { mean, se, ci_low: mean - 1.96 * se, ci_high: mean + 1.96 * se }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub scenario: Scenario,
    pub strategy: StrategyConfig,
    pub runs: usize,
    pub max_load: Summary,
    pub comm_cost: Summary,
    pub served: u64,
    pub fallbacks: u64,
    pub rejected: u64,
}

impl Aggregate {
    fn csv_row(&self) -> Vec<String> {
        let mut row = vec![
            strategy_name(self.strategy.kind).to_string(),
            self.scenario.n.to_string(),
            self.scenario.k.to_string(),
            self.scenario.m.to_string(),
            radius_label(&self.strategy),
            fmt_f64(self.scenario.gamma_value()),
            self.runs.to_string(),
        ];
        for s in [self.max_load, self.comm_cost] {
            row.extend([s.mean, s.se, s.ci_low, s.ci_high].map(fmt_f64));
        }
        row.extend([self.served, self.fallbacks, self.rejected].map(|v| v.to_string()));
        row
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub base_seed: u64,
    /// Sorted by `(config_index, replication)`.
    pub records: Vec<MetricsRecord>,
    /// One per config, in config order.
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentResult {
    pub fn runs_table(&self) -> Table {
        let mut t = Table::new(RUN_COLUMNS);
        for r in &self.records {
            t.push(r.csv_row(self.spec.record_runtime));
        }
        t
    }

    pub fn aggregate_table(&self) -> Table {
        let mut t = Table::new(AGGREGATE_COLUMNS);
        for a in &self.aggregates {
            t.push(a.csv_row());
        }
        t
    }

    /// Writes the per-run CSV, the aggregate CSV and the optional SVG under
    /// `out_dir`. Returns the written paths.
    pub fn write_outputs(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        let o = &self.spec.outputs;
        let name = &self.spec.name;
        let runs_path = out_dir.join(o.csv.clone().unwrap_or_else(|| format!("{name}_runs.csv")));
        let agg_path = out_dir.join(o.aggregate_csv.clone().unwrap_or_else(|| format!("{name}_aggregate.csv")));
        let runs = self.runs_table();
        runs.write_csv(&runs_path)?;
        self.aggregate_table().write_csv(&agg_path)?;
        let mut written = vec![runs_path, agg_path];
        if let (Some(svg), Some(plot)) = (&o.svg, &o.plot) {
            let path = out_dir.join(svg);
            let doc = render_svg(&runs, plot)?;
            std::fs::write(&path, doc).map_err(crate::error::io_err(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn build_inputs(sc: &Scenario, run_seed: u64) -> Result<(TorusGeometry, Placement, RequestStream)> {
    let geo = TorusGeometry::new(sc.side, sc.wrap)?;
    let profile = match sc.gamma {
        None => PopularityProfile::uniform(sc.k)?,
        Some(g) => PopularityProfile::zipf(sc.k, g)?,
    };
    let placement = match sc.placement {
        PlacementMode::Proportional => {
            Placement::place(sc.n, sc.m, &profile, seed::derive(run_seed, Stream::Placement, 0))?
        }
        PlacementMode::Full => Placement::full_replication(sc.n, sc.k)?,
    };
    let stream =
        RequestStream::generate(sc.n_requests, sc.n, &profile, seed::derive(run_seed, Stream::Workload, 0));
    Ok((geo, placement, stream))
}

fn check_conservation(s: &RunSummary, requests: usize) -> Result<()> {
    let assigned: u64 = s.loads.iter().map(|&t| t as u64).sum();
    if assigned != s.served || s.served + s.rejected != requests as u64 {
        return Err(HarnessError::Conservation { served: s.served, rejected: s.rejected, requests });
    }
    Ok(())
}

/// Runs every (config, replication) cell of `spec`.
///
/// Results do not depend on the thread count or scheduling order.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentResult> {
    let groups = spec.expand()?;
    let budget = opts.budget.or(spec.budget).unwrap_or(DEFAULT_BUDGET);
    let runs = groups.iter().map(|g| g.strategies.len()).sum::<usize>() * spec.replications;
    if runs > budget {
        return Err(HarnessError::BudgetExceeded { runs, budget });
    }
    for g in &groups {
        for s in &g.strategies {
            s.validate()?;
        }
    }
    let base_seed = opts.base_seed.unwrap_or(spec.base_seed);
    let record_runtime = spec.record_runtime;

    let mut offsets = Vec::with_capacity(groups.len());
    let mut next = 0;
    for g in &groups {
        offsets.push(next);
        next += g.strategies.len();
    }
    let cells: Vec<(usize, usize)> =
        (0..groups.len()).flat_map(|g| (0..spec.replications).map(move |rep| (g, rep))).collect();

    let work = || {
        cells
            .par_iter()
            .map(|&(gi, rep)| -> Result<Vec<MetricsRecord>> {
                let group = &groups[gi];
                let sc = group.scenario;
                let run_seed = seed::derive(base_seed, Stream::Replication, rep as u64);
                let (geo, placement, stream) = build_inputs(&sc, run_seed)?;
                let tie = seed::derive(run_seed, Stream::TieBreak, 0);
                group
                    .strategies
                    .iter()
                    .enumerate()
                    .map(|(si, cfg)| {
                        let start = record_runtime.then(Instant::now);
                        let summary = run(&stream, &placement, &geo, cfg, tie)?;
                        let runtime_ms = start.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3);
                        check_conservation(&summary, stream.len())?;
                        Ok(MetricsRecord {
                            config_index: offsets[gi] + si,
                            replication: rep,
                            scenario: sc,
                            strategy: *cfg,
                            seed: run_seed,
                            summary,
                            runtime_ms,
                        })
                    })
                    .collect()
            })
            .collect::<Result<Vec<Vec<MetricsRecord>>>>()
    };
    let nested = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| HarnessError::InvalidSpec(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let mut records: Vec<MetricsRecord> = nested.into_iter().flatten().collect();
    records.sort_by_key(|r| (r.config_index, r.replication));

    let aggregates = records
        .chunk_by(|a, b| a.config_index == b.config_index)
        .map(|rs| {
            let loads: Vec<f64> = rs.iter().map(|r| r.summary.max_load as f64).collect();
            let costs: Vec<f64> = rs.iter().map(|r| r.summary.comm_cost).collect();
            Aggregate {
                scenario: rs[0].scenario,
                strategy: rs[0].strategy,
                runs: rs.len(),
                max_load: Summary::of(&loads),
                comm_cost: Summary::of(&costs),
                served: rs.iter().map(|r| r.summary.served).sum(),
                fallbacks: rs.iter().map(|r| r.summary.fallbacks).sum(),
                rejected: rs.iter().map(|r| r.summary.rejected).sum(),
            }
        })
        .collect();

    Ok(ExperimentResult { spec: spec.clone(), base_seed, records, aggregates })
}
