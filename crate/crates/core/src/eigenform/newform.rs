//! Genus-1 newform coefficient files.
//!
//! Two text formats are read:
//!
//! * `csv`: a header `level=<N>,weight=<k>,label=<text>` followed by `p,a(p)` lines;
//! * `qexp`: the same header (optionally behind `#`) followed by `n a(n)` lines.
//!
//! Blank lines and `#` comments are skipped in the body.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EigenformError;
use crate::sums::is_prime;

/// Slack on the Deligne bound `|a(p)| p^{−(k−1)/2} ≤ 2` checked at ingest.
pub const DELIGNE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NewformFormat {
    Csv,
    Qexp,
}

impl FromStr for NewformFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "qexp" | "qexp_text" | "text" => Ok(Self::Qexp),
            other => Err(format!("unknown newform format `{other}` (expected csv or qexp)")),
        }
    }
}

impl NewformFormat {
    /// `.csv` files are CSV, everything else q-expansion text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Qexp,
        }
    }
}

/// Prime where the raw coefficient exceeds the Deligne bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanujanViolation {
    pub p: u64,
    pub ap: i128,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewformGL2 {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    /// Raw Hecke eigenvalues `a(p)` keyed by prime.
    pub coeffs: BTreeMap<u64, i128>,
    /// `a(n)` for `n = 0..=M` when the source listed every `n ≤ M` (`a(0)` unused).
    pub table: Option<Vec<i128>>,
    pub warnings: Vec<RamanujanViolation>,
}

impl NewformGL2 {
    /// Builds the record and runs the ingest-time Deligne check.
    pub fn new(label: String, level: u64, weight: u32, coeffs: BTreeMap<u64, i128>, table: Option<Vec<i128>>) -> Self {
        let mut f = Self { label, level, weight, coeffs, table, warnings: Vec::new() };
        f.warnings = f
            .coeffs
            .iter()
            .filter(|(&p, _)| !f.level.is_multiple_of(p))
            .filter_map(|(&p, &ap)| {
                let normalized = ap as f64 * (p as f64).powf(-(f64::from(weight) - 1.0) / 2.0);
                (normalized.abs() > 2.0 + DELIGNE_TOLERANCE).then_some(RamanujanViolation { p, ap, normalized })
            })
            .collect();
        f
    }

    /// `Δ` from the built-in eta-product engine, with coefficients for `n ≤ nterms`.
    pub fn delta(nterms: usize) -> Result<Self, EigenformError> {
        let tau = super::delta::delta_qexp(nterms)?;
        let coeffs = (2..=nterms as u64).filter(|&n| is_prime(n)).map(|p| (p, tau[p as usize])).collect();
        Ok(Self::new("Delta".to_string(), 1, 12, coeffs, Some(tau)))
    }

    pub fn is_ramanujan(&self) -> bool {
        self.warnings.is_empty()
    }

    /// `ã(p) = a(p) p^{−(k−1)/2}`.
    pub fn normalized_ap(&self, p: u64) -> Result<f64, EigenformError> {
        if self.level.is_multiple_of(p) {
            return Err(EigenformError::RamifiedPrime(p));
        }
        let ap = *self.coeffs.get(&p).ok_or(EigenformError::MissingCoefficient(p))?;
        Ok(ap as f64 * (p as f64).powf(-(f64::from(self.weight) - 1.0) / 2.0))
    }

    /// Largest prime with a known coefficient.
    pub fn max_prime(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    /// q-expansion text with a `#` header, readable back by [`parse_newform`].
    pub fn to_qexp_text(&self) -> String {
        let mut out = format!("# level={},weight={},label={}\n", self.level, self.weight, self.label);
        match &self.table {
            Some(t) => {
                for (n, a) in t.iter().enumerate().skip(1) {
                    let _ = writeln!(out, "{n} {a}");
                }
            }
            None => {
                for (p, a) in &self.coeffs {
                    let _ = writeln!(out, "{p} {a}");
                }
            }
        }
        out
    }
}

struct Header {
    level: u64,
    weight: u32,
    label: Option<String>,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header, EigenformError> {
    let err = |msg: String| EigenformError::Parse { line: lineno, msg };
    let body = line.trim().trim_start_matches('#').trim();
    let (mut level, mut weight, mut label) = (None, None, None);
    for field in body.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value in header, found `{}`", field.trim())))?;
        let value = value.trim();
        match key.trim() {
            "level" => level = Some(value.parse::<u64>().map_err(|_| err(format!("invalid level `{value}`")))?),
            "weight" => weight = Some(value.parse::<u32>().map_err(|_| err(format!("invalid weight `{value}`")))?),
            "label" => label = Some(value.to_string()),
            other => return Err(err(format!("unknown header key `{other}`"))),
        }
    }
    let level = level.filter(|&n| n >= 1).ok_or_else(|| err("header needs level >= 1".into()))?;
    let weight = weight.filter(|&k| k >= 1).ok_or_else(|| err("header needs weight >= 1".into()))?;
    Ok(Header { level, weight, label })
}

/// Parses newform text; `default_label` is used when the header has none.
pub fn parse_newform(text: &str, format: NewformFormat, default_label: &str) -> Result<NewformGL2, EigenformError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, htext) = lines.next().ok_or(EigenformError::Parse { line: 0, msg: "empty file".into() })?;
    let header = parse_header(htext, hline)?;

    let mut entries: BTreeMap<u64, i128> = BTreeMap::new();
    let mut last_line = hline;
    for (lineno, line) in lines.filter(|(_, l)| !l.starts_with('#')) {
        last_line = lineno;
        let err = |msg: String| EigenformError::Parse { line: lineno, msg };
        let (n, a) = match format {
            NewformFormat::Csv => line.split_once(',').map(|(n, a)| (n.trim(), a.trim())),
            NewformFormat::Qexp => {
                let mut it = line.split_whitespace();
                match (it.next(), it.next(), it.next()) {
                    (Some(n), Some(a), None) => Some((n, a)),
                    _ => None,
                }
            }
        }
        .ok_or_else(|| err(format!("expected two fields, found `{line}`")))?;
        let n: u64 = n.parse().map_err(|_| err(format!("invalid index `{n}`")))?;
        let a: i128 = a.parse().map_err(|_| err(format!("invalid coefficient `{a}`")))?;
        if n == 0 {
            return Err(err("index must be positive".into()));
        }
        if n == 1 && a != 1 {
            return Err(err(format!("a(1) must be 1 for a normalized newform, found {a}")));
        }
        if entries.insert(n, a).is_some() {
            return Err(err(format!("duplicate index {n}")));
        }
    }
    if entries.is_empty() {
        return Err(EigenformError::Parse { line: last_line, msg: "no coefficients".into() });
    }

    let max_n = *entries.keys().next_back().expect("non-empty");
    let contiguous = entries.len() as u64 == max_n;
    let table = contiguous.then(|| std::iter::once(0).chain(entries.values().copied()).collect());
    let coeffs = entries.into_iter().filter(|(n, _)| is_prime(*n)).collect();
    let label = header.label.unwrap_or_else(|| default_label.to_string());
    Ok(NewformGL2::new(label, header.level, header.weight, coeffs, table))
}

/// Reads a newform file; the label defaults to the file stem.
pub fn load_newform(path: &Path, format: NewformFormat) -> Result<NewformGL2, EigenformError> {
    let text = std::fs::read_to_string(path).map_err(|e| EigenformError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("newform");
    parse_newform(&text, format, stem)
}
