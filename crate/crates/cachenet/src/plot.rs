//! Deterministic SVG line charts from tables.
//!
//! Rows are grouped into series by `group_by`, then into points by
//! `point_by` (or by the x value when `point_by` is empty). Each point sits at
//! the mean x and mean y of its rows; with more than one row the vertical
//! error bar spans the 95% normal-approximation CI of the mean y.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};
use crate::table::{parse_number, Table};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 70.0;
const LEGEND_WIDTH: f64 = 170.0;
/// Vertical pitch of legend rows; text is 12px.
pub const LEGEND_PITCH: f64 = 18.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    #[serde(default)]
    pub group_by: Vec<String>,
    #[serde(default)]
    pub point_by: Vec<String>,
    /// Keep only rows whose column equals the given value.
    #[serde(default)]
    pub filter: BTreeMap<String, String>,
    #[serde(default)]
    pub log_x: bool,
    #[serde(default)]
    pub log_y: bool,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub x_label: Option<String>,
    #[serde(default)]
    pub y_label: Option<String>,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
    #[serde(default = "default_true")]
    pub error_bars: bool,
}

fn default_width() -> u32 {
    720
}

fn default_height() -> u32 {
    480
}

fn default_true() -> bool {
    true
}

impl PlotSpec {
    pub fn new(x: &str, y: &str) -> Self {
        PlotSpec {
            x: x.into(),
            y: y.into(),
            group_by: Vec::new(),
            point_by: Vec::new(),
            filter: BTreeMap::new(),
            log_x: false,
            log_y: false,
            title: None,
            x_label: None,
            y_label: None,
            width: default_width(),
            height: default_height(),
            error_bars: true,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub x: f64,
    pub y: f64,
    /// Half-width of the 95% CI of the mean y; 0 for single-row points.
    pub y_err: f64,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<SeriesPoint>,
}

fn key_of(row: &[String], cols: &[usize], headers: &[String]) -> Vec<(String, String)> {
    cols.iter().map(|&i| (headers[i].clone(), row[i].clone())).collect()
}

/// Orders keys numerically where both sides parse, textually otherwise.
fn cmp_keys(a: &[(String, String)], b: &[(String, String)]) -> std::cmp::Ordering {
    for ((_, x), (_, y)) in a.iter().zip(b) {
        let o = match (parse_number(x), parse_number(y)) {
            (Some(p), Some(q)) => p.total_cmp(&q),
            _ => x.cmp(y),
        };
        if o.is_ne() {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Groups the table into series as described in the module docs.
pub fn build_series(table: &Table, spec: &PlotSpec) -> Result<Vec<Series>> {
    if table.is_empty() {
        return Err(HarnessError::EmptyTable);
    }
    let filtered = table.filter_eq(spec.filter.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    let xs = filtered.numeric(&spec.x)?;
    let ys = filtered.numeric(&spec.y)?;
    let idx = |cols: &[String]| cols.iter().map(|c| filtered.column_index(c)).collect::<Result<Vec<_>>>();
    let group_cols = idx(&spec.group_by)?;
    let point_cols = idx(&spec.point_by)?;
    if filtered.is_empty() {
        return Err(HarnessError::InvalidPlot("filter removed every row".into()));
    }

    type Key = Vec<(String, String)>;
    let mut groups: Vec<(Key, Vec<(Key, Vec<usize>)>)> = Vec::new();
    for (i, row) in filtered.rows.iter().enumerate() {
        let g = key_of(row, &group_cols, &filtered.headers);
        let p = if point_cols.is_empty() {
            vec![(spec.x.clone(), crate::table::fmt_f64(xs[i]))]
        } else {
            key_of(row, &point_cols, &filtered.headers)
        };
        let gi = match groups.iter().position(|(k, _)| *k == g) {
            Some(gi) => gi,
            None => {
                groups.push((g, Vec::new()));
                groups.len() - 1
            }
        };
        let pts = &mut groups[gi].1;
        match pts.iter_mut().find(|(k, _)| *k == p) {
            Some((_, rows)) => rows.push(i),
            None => pts.push((p, vec![i])),
        }
    }
    groups.sort_by(|a, b| cmp_keys(&a.0, &b.0));

    let mut out = Vec::with_capacity(groups.len());
    for (gkey, mut pts) in groups {
        pts.sort_by(|a, b| cmp_keys(&a.0, &b.0));
        let mut points: Vec<SeriesPoint> = pts
            .iter()
            .map(|(_, rows)| {
                let k = rows.len() as f64;
                let x = rows.iter().map(|&i| xs[i]).sum::<f64>() / k;
                let y = rows.iter().map(|&i| ys[i]).sum::<f64>() / k;
                let y_err = if rows.len() > 1 {
                    let var = rows.iter().map(|&i| (ys[i] - y).powi(2)).sum::<f64>() / (k - 1.0);
                    1.96 * (var / k).sqrt()
                } else {
                    0.0
                };
                SeriesPoint { x, y, y_err, rows: rows.len() }
            })
            .collect();
        if point_cols.is_empty() {
            points.sort_by(|a, b| a.x.total_cmp(&b.x));
        }
        let label = if gkey.is_empty() {
            spec.y.clone()
        } else {
            gkey.iter().map(|(c, v)| format!("{c}={v}")).collect::<Vec<_>>().join(", ")
        };
        out.push(Series { label, points });
    }
    Ok(out)
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool, name: &str) -> Result<Axis> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            if !v.is_finite() {
                return Err(HarnessError::InvalidPlot(format!("{name} has a non-finite value")));
            }
            if log && v <= 0.0 {
                return Err(HarnessError::InvalidPlot(format!("log axis {name} has a non-positive value {v}")));
            }
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if lo == hi {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            lo -= pad;
            hi += pad;
        } else {
            let pad = (hi - lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
        Ok(Axis { lo, hi, log })
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.max(f64::MIN_POSITIVE).log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn tick_values(&self) -> Vec<f64> {
        (0..TICKS)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / (TICKS - 1) as f64;
                if self.log {
                    10f64.powf(t)
                } else {
                    t
                }
            })
            .collect()
    }
}

/// Four significant digits, no trailing zeros.
fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-3..6).contains(&mag) {
        return format!("{v:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Legend rows as `(x, y, width, height)` boxes, for layout checks.
pub fn legend_boxes(series_count: usize, spec: &PlotSpec) -> Vec<(f64, f64, f64, f64)> {
    let x = spec.width as f64 - LEGEND_WIDTH + 10.0;
    (0..series_count)
        .map(|i| (x, MARGIN_TOP + i as f64 * LEGEND_PITCH, LEGEND_WIDTH - 20.0, LEGEND_PITCH - 4.0))
        .collect()
}

/// Renders the SVG document. Output depends only on the table and spec.
pub fn render_svg(table: &Table, spec: &PlotSpec) -> Result<String> {
    if spec.width < 320 || spec.height < 240 {
        return Err(HarnessError::InvalidPlot("plot must be at least 320x240".into()));
    }
    let series = build_series(table, spec)?;
    let all = || series.iter().flat_map(|s| s.points.iter());
    let ax = Axis::fit(all().map(|p| p.x), spec.log_x, &spec.x)?;
    let ys = all().flat_map(|p| {
        let e = if spec.error_bars { p.y_err } else { 0.0 };
        [p.y - e, p.y + e]
    });
    let ys: Vec<f64> = if spec.log_y { ys.filter(|v| *v > 0.0).collect() } else { ys.collect() };
    let ay = Axis::fit(ys.into_iter().chain(all().map(|p| p.y)), spec.log_y, &spec.y)?;

    // grow the canvas if the legend would run past the bottom
    let legend_bottom = MARGIN_TOP + series.len() as f64 * LEGEND_PITCH;
    let height = (spec.height as f64).max(legend_bottom + MARGIN_BOTTOM);
    let width = spec.width as f64;
    let plot_w = width - MARGIN_LEFT - LEGEND_WIDTH;
    let plot_h = height - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |v: f64| MARGIN_LEFT + ax.frac(v) * plot_w;
    let py = |v: f64| MARGIN_TOP + (1.0 - ay.frac(v)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = width,
        h = height
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    if let Some(t) = &spec.title {
        let _ = writeln!(
            s,
            r#"<text class="title" x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            esc(t)
        );
    }
    let _ = writeln!(
        s,
        r##"<rect class="frame" x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333"/>"##
    );
    for v in ax.tick_values() {
        let x = px(v);
        let _ = writeln!(
            s,
            r##"<line class="tick" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#333"/><text x="{x:.2}" y="{ty:.2}" text-anchor="middle">{}</text>"##,
            fmt_tick(v),
            y0 = MARGIN_TOP + plot_h,
            y1 = MARGIN_TOP + plot_h + 5.0,
            ty = MARGIN_TOP + plot_h + 19.0
        );
    }
    for v in ay.tick_values() {
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line class="tick" x1="{x0:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="#333"/><text x="{tx:.2}" y="{ty:.2}" text-anchor="end">{}</text>"##,
            fmt_tick(v),
            x0 = MARGIN_LEFT - 5.0,
            tx = MARGIN_LEFT - 8.0,
            ty = y + 4.0
        );
    }
    let log_note = |log: bool| if log { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        MARGIN_TOP + plot_h + 40.0,
        esc(spec.x_label.as_deref().unwrap_or(&spec.x)),
        log_note(spec.log_x)
    );
    let _ = writeln!(
        s,
        r#"<text class="axis-label" transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        esc(spec.y_label.as_deref().unwrap_or(&spec.y)),
        log_note(spec.log_y)
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser.points.iter().map(|p| format!("{:.2},{:.2}", px(p.x), py(p.y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            esc(&ser.label),
            pts.join(" ")
        );
        for p in &ser.points {
            let (cx, cy) = (px(p.x), py(p.y));
            if spec.error_bars && p.y_err > 0.0 {
                let lo = if spec.log_y { (p.y - p.y_err).max(10f64.powf(ay.lo)) } else { p.y - p.y_err };
                let _ = writeln!(
                    s,
                    r#"<line class="error-bar" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    py(lo),
                    py(p.y + p.y_err)
                );
            }
            let _ = writeln!(s, r#"<circle class="marker" cx="{cx:.2}" cy="{cy:.2}" r="2.5" fill="{color}"/>"#);
        }
    }

    for ((i, ser), (lx, ly, _, _)) in series.iter().enumerate().zip(legend_boxes(series.len(), spec)) {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<g class="legend-entry"><line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            ly + 7.0,
            lx + 20.0,
            ly + 7.0,
            lx + 26.0,
            ly + 11.0,
            esc(&ser.label)
        );
    }
    if spec.error_bars {
        let _ = writeln!(
            s,
            r#"<text class="note" x="{MARGIN_LEFT}" y="{:.2}" font-size="10">error bars: 95% CI of the mean, normal approximation over replications</text>"#,
            height - 10.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, &str, &str)]) -> Table {
        let mut t = Table::new(["M", "n", "max_load"]);
        for (m, n, l) in rows {
            t.push(vec![m.to_string(), n.to_string(), l.to_string()]);
        }
        t
    }

    #[test]
    fn single_series_two_points() {
        let t = table(&[("1", "100", "3"), ("1", "400", "4")]);
        let svg = render_svg(&t, &PlotSpec::new("n", "max_load")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 2);
    }

    #[test]
    fn legend_per_group() {
        let t = table(&[("1", "100", "3"), ("2", "100", "2"), ("10", "100", "1"), ("2", "400", "3")]);
        let mut spec = PlotSpec::new("n", "max_load");
        spec.group_by = vec!["M".into()];
        let svg = render_svg(&t, &spec).unwrap();
        assert_eq!(svg.matches("class=\"legend-entry\"").count(), 3);
        // numeric ordering of groups
        let labels: Vec<&str> = svg.split("data-label=\"").skip(1).map(|s| s.split('"').next().unwrap()).collect();
        assert_eq!(labels, ["M=1", "M=2", "M=10"]);
    }

    #[test]
    fn deterministic_and_errors() {
        let t = table(&[("1", "100", "3"), ("1", "100", "5"), ("1", "400", "4")]);
        let mut spec = PlotSpec::new("n", "max_load");
        spec.log_x = true;
        assert_eq!(render_svg(&t, &spec).unwrap(), render_svg(&t, &spec).unwrap());
        assert!(render_svg(&t, &spec).unwrap().contains("class=\"error-bar\""));
        assert!(matches!(render_svg(&Table::new(["n"]), &spec), Err(HarnessError::EmptyTable)));
        assert!(matches!(render_svg(&t, &PlotSpec::new("n", "nope")), Err(HarnessError::UnknownColumn(_))));
        let zero = table(&[("1", "0", "3"), ("1", "1", "3")]);
        assert!(matches!(render_svg(&zero, &spec), Err(HarnessError::InvalidPlot(_))));
    }

    #[test]
    fn ticks() {
        assert_eq!(fmt_tick(2.5), "2.5");
        assert_eq!(fmt_tick(1234.0), "1234");
        assert_eq!(fmt_tick(0.012345), "0.01235");
    }
}
