use std::path::PathBuf;

#[derive(thiserror::Error, Debug)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("experiment needs {runs} runs, budget is {budget}")]
    BudgetExceeded { runs: usize, budget: usize },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("table is empty")]
    EmptyTable,
    #[error("column `{column}` row {row}: `{value}` is not a number")]
    NotNumeric { column: String, row: usize, value: String },
    #[error("fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all x values are equal; slope is undefined")]
    DegenerateX,
    #[error("invalid plot: {0}")]
    InvalidPlot(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error("run broke conservation: served {served} + rejected {rejected} != {requests} requests")]
    Conservation { served: u64, rejected: u64, requests: usize },
    #[error(transparent)]
    Model(#[from] cachenet_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
