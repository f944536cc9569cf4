//! Command-line interface.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use cachenet_core::analysis::{build_config_graph, voronoi};
use cachenet_core::seed::{self, Stream};
use cachenet_core::{Placement, PopularityProfile, RequestStream, TorusGeometry};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analyze::{confgraph_sweep, goodness_sweep, voronoi_sweep, AnalysisKind, AnalysisRecipe, SweepParams};
use crate::experiment::{run_experiment, RunOptions};
use crate::plot::{render_svg, PlotSpec};
use crate::snapshot;
use crate::spec::{ExperimentSpec, Rule};
use crate::table::Table;

#[derive(Parser, Debug)]
#[command(name = "cachenet", version, about = "Load balancing in cache networks on a torus")]
pub struct Cli {
    /// Base seed, overriding the spec's `base_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "CACHENET_THREADS")]
    pub threads: Option<usize>,
    /// Maximum number of runs an experiment may expand to.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an experiment spec and write its CSV (and SVG) outputs.
    Run { spec: PathBuf },
    /// Render a CSV table to SVG.
    Plot { csv: PathBuf, plot_spec: PathBuf },
    /// Seeded sweeps over the structural analyses.
    Analyze {
        #[arg(value_enum)]
        kind: AnalysisKind,
        /// Take every parameter from an analysis recipe instead of flags.
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[command(flatten)]
        params: AnalyzeArgs,
    },
    /// Write a placement, request stream, tessellation or degree histogram.
    Dump {
        #[arg(value_enum)]
        kind: DumpKind,
        #[command(flatten)]
        params: AnalyzeArgs,
        /// Placement snapshot format.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// File whose tessellation to dump.
        #[arg(long, default_value_t = 1)]
        file: u32,
    },
    /// Run the built-in oracle checks.
    Selftest,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum DumpKind {
    Placement,
    Requests,
    Tessellation,
    Degrees,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Format {
    Text,
    Binary,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Node count (a perfect square).
    #[arg(long, default_value_t = 2025)]
    pub n: usize,
    /// Library size, a number or a rule such as `n`.
    #[arg(long = "K", default_value = "100")]
    pub k: String,
    /// Cache size, a number or a rule such as `n^0.3`. Defaults to
    /// `round(n^alpha)` for goodness, `n^0.3` for confgraph and 4 otherwise.
    #[arg(long = "M")]
    pub m: Option<String>,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    /// Strategy radius for the configuration graph; defaults to `n^0.35`.
    #[arg(long)]
    pub r: Option<String>,
    /// Zipf exponent; uniform popularity when absent.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    /// Bounded grid instead of a torus.
    #[arg(long)]
    pub grid: bool,
    /// Also write per-seed results to this CSV, relative to `--out`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn eval_rule(text: &str, n: usize, what: &str) -> anyhow::Result<usize> {
    let v = Rule::parse(text)?.eval(n).with_context(|| format!("{what} cannot be unbounded"))?;
    if v < 1.0 || v.fract() != 0.0 {
        bail!("{what} must be a positive integer, got {v}");
    }
    Ok(v as usize)
}

impl AnalyzeArgs {
    fn sweep(&self, kind: Option<AnalysisKind>, base_seed: u64) -> anyhow::Result<SweepParams> {
        let n = self.n;
        let k = eval_rule(&self.k, n, "K")?;
        let m = match (&self.m, kind) {
            (Some(m), _) => eval_rule(m, n, "M")?,
            (None, Some(AnalysisKind::Goodness)) => ((n as f64).powf(self.alpha).round() as usize).max(1),
            (None, Some(AnalysisKind::Confgraph)) => eval_rule("n^0.3", n, "M")?,
            (None, _) => 4,
        };
        Ok(SweepParams { n, k, m, gamma: self.gamma, wrap: !self.grid, seeds: self.seeds, base_seed })
    }

    fn radius(&self) -> anyhow::Result<usize> {
        eval_rule(self.r.as_deref().unwrap_or("n^0.35"), self.n, "r")
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn analyze(cli: &Cli, kind: AnalysisKind, recipe: Option<&Path>, args: &AnalyzeArgs) -> anyhow::Result<()> {
    let recipe = recipe
        .map(|path| AnalysisRecipe::load(path).with_context(|| format!("loading {}", path.display())))
        .transpose()?;
    let (p, radius, alpha) = match &recipe {
        Some(r) => {
            if r.analysis != kind {
                bail!("recipe `{}` is a {:?} analysis, not {:?}", r.name, r.analysis, kind);
            }
            let mut p = r.params()?;
            if let Some(s) = cli.seed {
                p.base_seed = s;
            }
            let radius = if kind == AnalysisKind::Confgraph { r.radius()? } else { 0 };
            let alpha = if kind == AnalysisKind::Goodness { r.alpha()? } else { 0.0 };
            (p, radius, alpha)
        }
        None => {
            let radius = if kind == AnalysisKind::Confgraph { args.radius()? } else { 0 };
            (args.sweep(Some(kind), cli.seed.unwrap_or(0))?, radius, args.alpha)
        }
    };
    let mut table;
    match kind {
        AnalysisKind::Voronoi => {
            let s = voronoi_sweep(&p)?;
            table = Table::new(["seed", "max_cell_size", "max_bbox_side", "unplaced_files"]);
            for v in &s.samples {
                table.push(vec![
                    v.seed.to_string(),
                    v.max_cell_size.to_string(),
                    v.max_bbox_side.to_string(),
                    v.unplaced_files.to_string(),
                ]);
            }
            println!("voronoi n={} K={} M={} seeds={}", p.n, p.k, p.m, p.seeds);
            println!(
                "max cell <= {:.1}: {}/{}; bounding box <= {:.1}: {}/{}",
                s.cell_bound,
                s.within_cell_bound(),
                p.seeds,
                s.bbox_bound,
                s.within_bbox_bound(),
                p.seeds
            );
        }
        AnalysisKind::Confgraph => {
            let r = radius;
            let s = confgraph_sweep(&p, r)?;
            table = Table::new(["seed", "min_degree", "max_degree", "mean_degree", "predicted_degree", "edges"]);
            for c in &s {
                table.push(vec![
                    c.seed.to_string(),
                    c.min_degree.to_string(),
                    c.max_degree.to_string(),
                    format!("{:.3}", c.mean_degree),
                    format!("{:.3}", c.predicted_degree),
                    c.edges.to_string(),
                ]);
            }
            let worst_ratio = s.iter().map(|c| c.degree_ratio()).fold(0.0, f64::max);
            let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), c| {
                (lo.min(c.mean_over_predicted()), hi.max(c.mean_over_predicted()))
            });
            println!("confgraph n={} K={} M={} r={} seeds={}", p.n, p.k, p.m, r, p.seeds);
            println!("max/min degree ratio: worst {worst_ratio:.3}; mean/predicted degree in [{lo:.3}, {hi:.3}]");
        }
        AnalysisKind::Goodness => {
            let s = goodness_sweep(&p, alpha)?;
            table = Table::new(["seed", "pass", "sparse_nodes", "heavy_pairs"]);
            for g in &s.samples {
                table.push(vec![
                    g.seed.to_string(),
                    g.pass.to_string(),
                    g.sparse_nodes.to_string(),
                    g.heavy_pairs.to_string(),
                ]);
            }
            println!(
                "goodness n={} K={} M={} alpha={} delta={:.4} mu={} seeds={}",
                p.n, p.k, p.m, alpha, s.delta, s.mu, p.seeds
            );
            println!("pass rate: {}/{} ({:.3})", s.passes(), p.seeds, s.pass_rate());
        }
    }
    if let Some(csv) = &args.csv {
        let path = cli.out.join(csv);
        table.write_csv(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn dump(cli: &Cli, kind: DumpKind, args: &AnalyzeArgs, format: Format, file: u32) -> anyhow::Result<()> {
    let p = args.sweep(None, cli.seed.unwrap_or(0))?;
    let run_seed = seed::derive(p.base_seed, Stream::Replication, 0);
    let geo = TorusGeometry::with_nodes(p.n, p.wrap)?;
    let profile = match p.gamma {
        None => PopularityProfile::uniform(p.k)?,
        Some(g) => PopularityProfile::zipf(p.k, g)?,
    };
    let placement = || Placement::place(p.n, p.m, &profile, seed::derive(run_seed, Stream::Placement, 0));
    let (name, path) = match (kind, format) {
        (DumpKind::Placement, Format::Text) => ("placement", "placement.txt"),
        (DumpKind::Placement, Format::Binary) => ("placement", "placement.bin"),
        (DumpKind::Requests, _) => ("requests", "requests.csv"),
        (DumpKind::Tessellation, _) => ("tessellation", "tessellation.csv"),
        (DumpKind::Degrees, _) => ("degree histogram", "degrees.csv"),
    };
    let path = cli.out.join(path);
    let mut w = create(&path)?;
    match kind {
        DumpKind::Placement => match format {
            Format::Text => snapshot::write_placement_text(&placement()?, &mut w)?,
            Format::Binary => snapshot::write_placement_binary(&placement()?, &mut w)?,
        },
        DumpKind::Requests => {
            let s = RequestStream::generate(p.n, p.n, &profile, seed::derive(run_seed, Stream::Workload, 0));
            snapshot::write_requests_csv(&s, &mut w)?
        }
        DumpKind::Tessellation => {
            let mut rng = seed::substream(run_seed, Stream::Voronoi, 0);
            snapshot::write_tessellation_csv(&voronoi(file, &placement()?, &geo, &mut rng)?, &mut w)?
        }
        DumpKind::Degrees => {
            snapshot::write_degree_histogram_csv(&build_config_graph(&placement()?, &geo, args.radius()?)?, &mut w)?
        }
    }
    w.flush()?;
    println!("wrote {name} to {}", path.display());
    Ok(())
}

fn execute(cli: &Cli) -> anyhow::Result<ExitCode> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        // a second call in the same process fails; the pool it set stays
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Run { spec } => {
            let s = ExperimentSpec::load(spec).with_context(|| format!("loading {}", spec.display()))?;
            let opts = RunOptions { base_seed: cli.seed, budget: cli.budget, threads: None };
            let result = run_experiment(&s, &opts)?;
            println!("{}: {} runs over {} configs", s.name, result.records.len(), result.aggregates.len());
            for a in &result.aggregates {
                println!(
                    "  {:<15} n={:<6} K={:<6} M={:<5} r={:<5} gamma={:<4} L={:.3} ± {:.3}  C={:.3} ± {:.3}  fallbacks={} rejected={}",
                    crate::spec::strategy_name(a.strategy.kind),
                    a.scenario.n,
                    a.scenario.k,
                    a.scenario.m,
                    crate::spec::radius_label(&a.strategy),
                    a.scenario.gamma_value(),
                    a.max_load.mean,
                    1.96 * a.max_load.se,
                    a.comm_cost.mean,
                    1.96 * a.comm_cost.se,
                    a.fallbacks,
                    a.rejected
                );
            }
            for path in result.write_outputs(&cli.out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Plot { csv, plot_spec } => {
            let table = Table::read_csv(csv)?;
            let spec = PlotSpec::load(plot_spec)?;
            let svg = render_svg(&table, &spec)?;
            let stem = plot_spec.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "plot".into());
            let path = cli.out.join(format!("{stem}.svg"));
            let mut w = create(&path)?;
            w.write_all(svg.as_bytes())?;
            w.flush()?;
            println!("wrote {}", path.display());
        }
        Command::Analyze { kind, recipe, params } => analyze(cli, *kind, recipe.as_deref(), params)?,
        Command::Dump { kind, params, format, file } => dump(cli, *kind, params, *format, *file)?,
        Command::Selftest => {
            let results = crate::selftest::run_all();
            let mut failed = 0;
            for c in &results {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += !c.pass as usize;
            }
            println!("{}/{} checks passed", results.len() - failed, results.len());
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Parses `args` and runs the command. Usage errors exit through clap;
/// everything else prints `error: ...` and returns failure.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
