//! Structural objects behind the strategies' behaviour.

pub mod config_graph;
pub mod cost;
pub mod goodness;
pub mod voronoi;

pub use config_graph::{build_config_graph, build_config_graph_with, predicted_degree, ConfigGraph, PairScan};
pub use cost::{cost_regime, predicted_cost, zipf_cost_sum, CostRegime, RegimeEstimate};
pub use goodness::{default_delta, default_mu, goodness_check, goodness_with, GoodnessReport};
pub use voronoi::{bounding_box_side, max_cell_stats, voronoi, CellStats, VoronoiTessellation};
