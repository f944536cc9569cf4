//! Least-squares line fits against transformed x.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Ln,
    #[serde(rename = "lnln")]
    LnLn,
    /// `sqrt(x)`, meant for ratio columns such as K/M.
    SqrtRatio,
}

impl Transform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Ln => x.ln(),
            Transform::LnLn => x.ln().ln(),
            Transform::SqrtRatio => x.sqrt(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "identity" | "linear" => Some(Transform::Identity),
            "ln" | "log" => Some(Transform::Ln),
            "lnln" | "loglog" => Some(Transform::LnLn),
            "sqrt" | "sqrt_ratio" => Some(Transform::SqrtRatio),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares of `y` on `x`.
///
/// R² is 1 when `y` is constant (the line is exact).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    assert_eq!(xs.len(), ys.len(), "x and y lengths differ");
    let n = xs.len();
    if n < 3 {
        return Err(HarnessError::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 1e-12 * (1.0 + mx * mx) * nf) || !sxx.is_finite() {
        return Err(HarnessError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LineFit { slope, intercept, r_squared, points: n })
}

/// Fits `y`, or `ln y` when `log_y` is set, against `transform(x)`. A power
/// law exponent is the slope of the `Ln` fit with `log_y`.
pub fn fit_transformed(xs: &[f64], ys: &[f64], transform: Transform, log_y: bool) -> Result<LineFit> {
    let tx: Vec<f64> = xs.iter().map(|&x| transform.apply(x)).collect();
    let ty: Vec<f64> = if log_y { ys.iter().map(|y| y.ln()).collect() } else { ys.to_vec() };
    if tx.iter().chain(&ty).any(|v| !v.is_finite()) {
        return Err(HarnessError::InvalidSpec("transform produced a non-finite value".into()));
    }
    fit_line(&tx, &ty)
}

/// Averages `y_col` per distinct `x_col` value, then fits the means against
/// `transform(x)`.
///
/// Per-run tables hold many rows per x; fitting the means is what the
/// trend checks want (the R² of the raw cloud mostly measures run noise).
pub fn fit_loglog(table: &Table, x_col: &str, y_col: &str, transform: Transform) -> Result<LineFit> {
    let (xs, ys) = mean_by_x(table, x_col, y_col)?;
    fit_transformed(&xs, &ys, transform, false)
}

/// Distinct x values in ascending order with the mean y at each.
pub fn mean_by_x(table: &Table, x_col: &str, y_col: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs = table.numeric(x_col)?;
    let ys = table.numeric(y_col)?;
    if xs.is_empty() {
        return Err(HarnessError::EmptyTable);
    }
    let mut pairs: Vec<(f64, f64)> = xs.into_iter().zip(ys).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for group in pairs.chunk_by(|a, b| a.0 == b.0) {
        let mean = group.iter().map(|p| p.1).sum::<f64>() / group.len() as f64;
        pts.push((group[0].0, mean));
    }
    Ok(pts.into_iter().unzip())
}
