//! Observed multivariate time series and its CSV ingestion.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Real,
    Binary,
}

impl FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(ColumnKind::Real),
            "binary" | "bin" => Ok(ColumnKind::Binary),
            other => Err(Error::Parse(format!("unknown column kind `{other}`"))),
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnKind::Real => f.write_str("real"),
            ColumnKind::Binary => f.write_str("binary"),
        }
    }
}

/// An `n × p` series; row `t` is the observation `x_t`.
///
/// Entries are finite and binary-tagged columns hold only 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: Vec<f64>,
    n: usize,
    p: usize,
    kinds: Vec<ColumnKind>,
}

impl TimeSeries {
    /// Builds a series from row-major data.
    pub fn new(data: Vec<f64>, p: usize, kinds: Vec<ColumnKind>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidSeries("dimension must be at least 1".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(p) {
            return Err(Error::InvalidSeries(format!(
                "{} values cannot form rows of width {p}",
                data.len()
            )));
        }
        if kinds.len() != p {
            return Err(Error::InvalidSeries(format!(
                "{} column kinds for {p} columns",
                kinds.len()
            )));
        }
        let n = data.len() / p;
        for (i, &v) in data.iter().enumerate() {
            let (t, c) = (i / p, i % p);
            if !v.is_finite() {
                return Err(Error::InvalidSeries(format!("non-finite value at row {t}, column {c}")));
            }
            if kinds[c] == ColumnKind::Binary && v != 0.0 && v != 1.0 {
                return Err(Error::InvalidSeries(format!(
                    "binary column {c} holds {v} at row {t}"
                )));
            }
        }
        Ok(Self { data, n, p, kinds })
    }

    /// All-real series from row-major data.
    pub fn real(data: Vec<f64>, p: usize) -> Result<Self> {
        Self::new(data, p, vec![ColumnKind::Real; p])
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::real(values, 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    /// Row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, t: usize, c: usize) -> f64 {
        self.data[t * self.p + c]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.p..(t + 1) * self.p]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|t| self.get(t, c)).collect()
    }

    /// Series with rows taken in the given order.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::Shape(format!("order of length {} for {} rows", order.len(), self.n)));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &t in order {
            data.extend_from_slice(self.row(t));
        }
        Self::new(data, self.p, self.kinds.clone())
    }

    /// Standardizes every real column to zero mean and unit population
    /// variance (divisor `n`). Binary columns pass through.
    pub fn standard_scale(&self) -> Result<Self> {
        let mut data = self.data.clone();
        let n = self.n as f64;
        for c in 0..self.p {
            if self.kinds[c] == ColumnKind::Binary {
                continue;
            }
            let col = self.column(c);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            if !(sd > 0.0) || sd <= f64::EPSILON * mean.abs().max(1.0) {
                return Err(Error::DegenerateScale(c));
            }
            for t in 0..self.n {
                data[t * self.p + c] = (col[t] - mean) / sd;
            }
        }
        Self::new(data, self.p, self.kinds.clone())
    }

    /// Reads numeric CSV: one row per time step, optional single header row.
    pub fn read_csv<R: Read>(reader: R, kinds: Option<Vec<ColumnKind>>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut data = Vec::new();
        let mut width = None;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                rec.iter().map(|f| f.parse::<f64>()).collect();
            let row = match parsed {
                Ok(row) => row,
                Err(_) if i == 0 => continue, // header
                Err(e) => return Err(Error::Parse(format!("row {}: {e}", i + 1))),
            };
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Parse(format!(
                        "row {} has {} fields, expected {w}",
                        i + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            data.extend(row);
        }
        let p = width.ok_or_else(|| Error::InvalidSeries("no data rows".into()))?;
        let kinds = kinds.unwrap_or_else(|| vec![ColumnKind::Real; p]);
        Self::new(data, p, kinds)
    }

    /// Loads `path`; column kinds come from `<path>.kinds` when that file exists.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let sidecar = kinds_sidecar_path(path);
        let kinds = if sidecar.exists() {
            Some(parse_kinds(&std::fs::read_to_string(&sidecar)?)?)
        } else {
            None
        };
        Self::read_csv(std::fs::File::open(path)?, kinds)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.data.len() * 20);
        for t in 0..self.n {
            let row: Vec<String> = self.row(t).iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn kinds_sidecar_path(data: &Path) -> std::path::PathBuf {
    let mut s = data.as_os_str().to_owned();
    s.push(".kinds");
    s.into()
}

/// Parses a column-kind declaration such as `binary,real` (commas or newlines).
pub fn parse_kinds(text: &str) -> Result<Vec<ColumnKind>> {
    text.split([',', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty() && !s.starts_with('#'))
        .map(str::parse)
        .collect()
}
