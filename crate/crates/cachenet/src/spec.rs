//! Declarative experiment specs.
//!
//! A spec is a JSON document describing a sweep over geometry, library size,
//! cache size, popularity and strategy. Numeric parameters accept a single
//! value, a list, or a power-law rule string evaluated against the node count:
//! `"n"`, `"n^0.35"`, a constant like `"12"`, or `"unbounded"` for the radius.
//! Rules round up to the next integer.
//!
//! ```json
//! {
//!   "name": "tradeoff",
//!   "geometry": { "n": 2025, "wrap": true },
//!   "K": 500,
//!   "M": [1, 10, 50],
//!   "profile": { "kind": "uniform" },
//!   "strategies": [
//!     { "kind": "nearest_replica" },
//!     { "kind": "two_choices", "radius": [1, 2, 4, "unbounded"] }
//!   ],
//!   "replications": 100,
//!   "base_seed": 7
//! }
//! ```

use std::fmt;
use std::path::Path;

use cachenet_core::{Fallback, Radius, StrategyConfig, StrategyKind};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};
use crate::plot::PlotSpec;

/// A parameter value: a number or a rule string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
}

/// One value or a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Many(Vec<Value>),
    One(Value),
}

impl Sweep {
    fn values(&self) -> &[Value] {
        match self {
            Sweep::Many(v) => v,
            Sweep::One(v) => std::slice::from_ref(v),
        }
    }

    fn rules(&self, what: &str) -> Result<Vec<Rule>> {
        let values = self.values();
        if values.is_empty() {
            return Err(HarnessError::InvalidSpec(format!("{what}: sweep list is empty")));
        }
        values.iter().map(Rule::from_value).collect()
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

/// Parsed parameter rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Const(f64),
    /// `n^c`
    Power(f64),
    Unbounded,
}

impl Rule {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || HarnessError::InvalidSpec(format!("cannot parse rule `{s}`"));
        if matches!(t.as_str(), "unbounded" | "inf" | "infinity") {
            return Ok(Rule::Unbounded);
        }
        if t == "n" {
            return Ok(Rule::Power(1.0));
        }
        if let Some(exp) = t.strip_prefix("n^") {
            let c: f64 = exp.trim().parse().map_err(|_| bad())?;
            if !c.is_finite() || c < 0.0 {
                return Err(bad());
            }
            return Ok(Rule::Power(c));
        }
        let c: f64 = t.parse().map_err(|_| bad())?;
        if !c.is_finite() {
            return Err(bad());
        }
        Ok(Rule::Const(c))
    }

    pub(crate) fn from_value(v: &Value) -> Result<Self> {
        match v {
            Value::Number(x) => Ok(Rule::Const(*x)),
            Value::Text(s) => Rule::parse(s),
        }
    }

    /// Value for `n` nodes, rounded up; `None` when unbounded.
    pub fn eval(&self, n: usize) -> Option<f64> {
        match *self {
            Rule::Const(c) => Some(c),
            // absorb float fuzz such as 4096^0.5 = 64.00000000000001
            Rule::Power(c) => Some(((n as f64).powf(c) - 1e-9).ceil()),
            Rule::Unbounded => None,
        }
    }

    pub(crate) fn eval_count(&self, n: usize, what: &str) -> Result<usize> {
        let v = self
            .eval(n)
            .ok_or_else(|| HarnessError::InvalidSpec(format!("{what} cannot be unbounded")))?;
        if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(HarnessError::InvalidSpec(format!("{what} must be a positive integer, got {v}")));
        }
        Ok(v as usize)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Const(c) => write!(f, "{c}"),
            Rule::Power(c) => write!(f, "n^{c}"),
            Rule::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default)]
    pub n: Option<Sweep>,
    #[serde(default)]
    pub side: Option<Sweep>,
    #[serde(default = "default_true")]
    pub wrap: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gammas {
    Many(Vec<f64>),
    One(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    #[default]
    Uniform,
    Zipf { gamma: Gammas },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlacementMode {
    /// Every node draws `M` files with replacement from the popularity profile.
    #[default]
    Proportional,
    /// Every node caches the whole library (`M = K`).
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FallbackSpec {
    #[default]
    NearestGlobal,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    NearestReplica,
    TwoChoices {
        #[serde(default = "unbounded")]
        radius: Sweep,
        #[serde(default)]
        fallback: FallbackSpec,
    },
}

fn unbounded() -> Sweep {
    Sweep::One(Value::Text("unbounded".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Per-run CSV; defaults to `<name>_runs.csv`.
    #[serde(default)]
    pub csv: Option<String>,
    /// Aggregate CSV; defaults to `<name>_aggregate.csv`.
    #[serde(default)]
    pub aggregate_csv: Option<String>,
    /// SVG rendered from the per-run table with `plot`.
    #[serde(default)]
    pub svg: Option<String>,
    #[serde(default)]
    pub plot: Option<PlotSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default = "default_version")]
    pub version: u32,
    pub geometry: GeometrySpec,
    #[serde(rename = "K")]
    pub library: Sweep,
    /// Required for proportional placement; ignored (forced to K) for full.
    #[serde(rename = "M", default)]
    pub cache: Option<Sweep>,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default)]
    pub placement: PlacementMode,
    pub strategies: Vec<StrategySpec>,
    /// Requests per run; defaults to `n`.
    #[serde(default)]
    pub n_requests: Option<Value>,
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Upper bound on the number of runs.
    #[serde(default)]
    pub budget: Option<usize>,
    /// Record wall-clock time per run. Off by default so reruns produce
    /// byte-identical CSV; the `runtime_ms` column is then 0.
    #[serde(default)]
    pub record_runtime: bool,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_version() -> u32 {
    1
}

/// Everything that determines the placement and request stream of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub side: usize,
    pub wrap: bool,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// Zipf exponent; `None` for the uniform profile.
    pub gamma: Option<f64>,
    pub placement: PlacementMode,
    pub n_requests: usize,
}

impl Scenario {
    pub fn gamma_value(&self) -> f64 {
        self.gamma.unwrap_or(0.0)
    }
}

/// A scenario together with the strategies run against it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGroup {
    pub scenario: Scenario,
    pub strategies: Vec<StrategyConfig>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    fn invalid(msg: impl Into<String>) -> HarnessError {
        HarnessError::InvalidSpec(msg.into())
    }

    fn sides(&self) -> Result<Vec<usize>> {
        let g = &self.geometry;
        match (&g.n, &g.side) {
            (Some(n), None) => n
                .rules("geometry.n")?
                .iter()
                .map(|r| {
                    let n = r.eval_count(1, "geometry.n")?;
                    let side = (n as f64).sqrt().round() as usize;
                    if side * side != n || side < 2 {
                        return Err(Self::invalid(format!("geometry.n = {n} is not a square of a side >= 2")));
                    }
                    Ok(side)
                })
                .collect(),
            (None, Some(s)) => s
                .rules("geometry.side")?
                .iter()
                .map(|r| {
                    let side = r.eval_count(1, "geometry.side")?;
                    if side < 2 {
                        return Err(Self::invalid("geometry.side must be >= 2"));
                    }
                    Ok(side)
                })
                .collect(),
            _ => Err(Self::invalid("geometry needs exactly one of `n` or `side`")),
        }
    }

    fn gammas(&self) -> Result<Vec<Option<f64>>> {
        match &self.profile {
            ProfileSpec::Uniform => Ok(vec![None]),
            ProfileSpec::Zipf { gamma } => {
                let list = match gamma {
                    Gammas::Many(v) => v.clone(),
                    Gammas::One(g) => vec![*g],
                };
                if list.is_empty() {
                    return Err(Self::invalid("profile.gamma: sweep list is empty"));
                }
                if let Some(g) = list.iter().find(|g| !g.is_finite() || **g < 0.0) {
                    return Err(Self::invalid(format!("profile.gamma must be finite and >= 0, got {g}")));
                }
                Ok(list.into_iter().map(Some).collect())
            }
        }
    }

    fn strategies_for(&self, n: usize) -> Result<Vec<StrategyConfig>> {
        if self.strategies.is_empty() {
            return Err(Self::invalid("strategies: list is empty"));
        }
        let mut out = Vec::new();
        for s in &self.strategies {
            match s {
                StrategySpec::NearestReplica => out.push(StrategyConfig::nearest_replica()),
                StrategySpec::TwoChoices { radius, fallback } => {
                    let fallback = match fallback {
                        FallbackSpec::NearestGlobal => Fallback::NearestGlobal,
                        FallbackSpec::Reject => Fallback::Reject,
                    };
                    for rule in radius.rules("radius")? {
                        let radius = match rule {
                            Rule::Unbounded => Radius::Unbounded,
                            r => Radius::Bounded(r.eval_count(n, "radius")?),
                        };
                        out.push(StrategyConfig::two_choices(radius).with_fallback(fallback));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Validates the spec and expands it into scenario groups, in the fixed
    /// order geometry, K, M, gamma.
    pub fn expand(&self) -> Result<Vec<ScenarioGroup>> {
        if self.replications == 0 {
            return Err(Self::invalid("replications must be at least 1"));
        }
        if self.name.trim().is_empty() {
            return Err(Self::invalid("name must not be empty"));
        }
        let k_rules = self.library.rules("K")?;
        let m_rules = match (self.placement, &self.cache) {
            (PlacementMode::Proportional, Some(m)) => Some(m.rules("M")?),
            (PlacementMode::Proportional, None) => return Err(Self::invalid("M is required for proportional placement")),
            (PlacementMode::Full, _) => None,
        };
        let gammas = self.gammas()?;
        let mut groups = Vec::new();
        for side in self.sides()? {
            let n = side * side;
            let n_requests = match &self.n_requests {
                None => n,
                Some(v) => Rule::from_value(v)?
                    .eval(n)
                    .filter(|x| *x >= 0.0 && x.fract() == 0.0)
                    .ok_or_else(|| Self::invalid("n_requests must be a non-negative integer"))?
                    as usize,
            };
            let strategies = self.strategies_for(n)?;
            for kr in &k_rules {
                let k = kr.eval_count(n, "K")?;
                let ms = match &m_rules {
                    Some(rules) => rules.iter().map(|r| r.eval_count(n, "M")).collect::<Result<Vec<_>>>()?,
                    None => vec![k],
                };
                for &m in &ms {
                    for &gamma in &gammas {
                        groups.push(ScenarioGroup {
                            scenario: Scenario {
                                side,
                                wrap: self.geometry.wrap,
                                n,
                                k,
                                m,
                                gamma,
                                placement: self.placement,
                                n_requests,
                            },
                            strategies: strategies.clone(),
                        });
                    }
                }
            }
        }
        Ok(groups)
    }

    /// Total number of runs the spec expands to.
    pub fn total_runs(&self) -> Result<usize> {
        Ok(self.expand()?.iter().map(|g| g.strategies.len()).sum::<usize>() * self.replications)
    }
}

/// Label used for a strategy kind in tables.
pub fn strategy_name(kind: StrategyKind) -> &'static str {
    match kind {
        StrategyKind::NearestReplica => "nearest_replica",
        StrategyKind::TwoChoices => "two_choices",
    }
}

/// Radius label used in tables: `-` for nearest replica, `inf` for unbounded.
pub fn radius_label(cfg: &StrategyConfig) -> String {
    match (cfg.kind, cfg.radius) {
        (StrategyKind::NearestReplica, _) => "-".to_string(),
        (_, Radius::Unbounded) => "inf".to_string(),
        (_, Radius::Bounded(r)) => r.to_string(),
    }
}
