//! Experiment harness for the cachenet simulator: JSON experiment specs,
//! seeded parallel replications, CSV tables, line fits, SVG plots, snapshot
//! formats and the `cachenet` command line.

pub mod analyze;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod plot;
pub mod selftest;
pub mod snapshot;
pub mod spec;
pub mod table;

pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, Aggregate, ExperimentResult, MetricsRecord, RunOptions};
pub use fit::{fit_loglog, LineFit, Transform};
pub use plot::{render_svg, PlotSpec};
pub use spec::ExperimentSpec;
pub use table::Table;
