//! In-memory string tables backed by CSV.

use std::path::Path;

use crate::error::{io_err, HarnessError, Result};

/// Per-run CSV columns, in order.
pub const RUN_COLUMNS: [&str; 13] = [
    "strategy", "n", "K", "M", "r", "gamma", "seed", "max_load", "comm_cost", "served", "fallbacks",
    "rejected", "runtime_ms",
];

/// Aggregate CSV columns, in order.
pub const AGGREGATE_COLUMNS: [&str; 18] = [
    "strategy",
    "n",
    "K",
    "M",
    "r",
    "gamma",
    "runs",
    "mean_max_load",
    "se_max_load",
    "ci95_low_max_load",
    "ci95_high_max_load",
    "mean_comm_cost",
    "se_comm_cost",
    "ci95_low_comm_cost",
    "ci95_high_comm_cost",
    "total_served",
    "total_fallbacks",
    "total_rejected",
];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// Column parsed as floats. `inf` parses as infinity.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(row, r)| {
                parse_number(&r[i]).ok_or_else(|| HarnessError::NotNumeric {
                    column: name.to_string(),
                    row,
                    value: r[i].clone(),
                })
            })
            .collect()
    }

    /// Rows where every `(column, value)` pair matches exactly.
    pub fn filter_eq<'a>(&self, conditions: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Table> {
        let conds = conditions
            .into_iter()
            .map(|(c, v)| Ok((self.column_index(c)?, v)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Table {
            headers: self.headers.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| conds.iter().all(|&(i, v)| values_match(&r[i], v)))
                .cloned()
                .collect(),
        })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv_str(text: &str) -> Result<Table> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        Ok(Table { headers, rows })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        std::fs::write(path, self.to_csv_string()?).map_err(io_err(path))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Table> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_csv_str(&text)
    }
}

pub(crate) fn parse_number(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "unbounded" => Some(f64::INFINITY),
        t => t.parse().ok(),
    }
}

/// Numeric cells compare by value so that `"2"` matches `"2.0"`.
fn values_match(cell: &str, want: &str) -> bool {
    if cell == want {
        return true;
    }
    matches!((parse_number(cell), parse_number(want)), (Some(a), Some(b)) if a == b)
}

/// Float formatting shared by every writer: shortest round-trip repr.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x}")
}
