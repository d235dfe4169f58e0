//! Typed result tables with a `#`-prefixed metadata header.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Text,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Int => "int",
            Kind::Float => "float",
            Kind::Text => "text",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "int" => Some(Kind::Int),
            "float" => Some(Kind::Float),
            "text" => Some(Kind::Text),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn kind(&self) -> Kind {
        match self {
            Cell::Int(_) => Kind::Int,
            Cell::Float(_) => Kind::Float,
            Cell::Text(_) => Kind::Text,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(i) => Some(i as f64),
            Cell::Float(x) => Some(x),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // shortest representation that parses back to the same bits
            Cell::Float(x) => format!("{x:e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Ordered `key = value` header lines.
    pub metadata: Vec<(String, String)>,
}

pub const WALL_TIME_KEY: &str = "wall_time_s";

impl ResultTable {
    pub fn new(columns: &[(&str, Kind)]) -> Self {
        Self {
            columns: columns
                .iter()
                .map(|&(n, k)| Column {
                    name: n.to_string(),
                    kind: k,
                })
                .collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        for (c, col) in row.iter().zip(&self.columns) {
            assert_eq!(c.kind(), col.kind, "column {}", col.name);
        }
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Metadata entries under `prefix.`, with the prefix stripped.
    pub fn meta_section(&self, prefix: &str) -> BTreeMap<String, String> {
        let p = format!("{prefix}.");
        self.metadata
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(&p).map(|s| (s.to_string(), v.clone())))
            .collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let schema: Vec<String> = self.columns.iter().map(|c| format!("{}:{}", c.name, c.kind.name())).collect();
        let _ = writeln!(out, "# schema = {}", schema.join(","));
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(out, "{}", names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Everything after the metadata header.
    pub fn body(csv: &str) -> String {
        csv.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = vec![];
        let mut schema = None;
        let mut lines = text.lines().peekable();
        while let Some(line) = lines.peek() {
            let Some(rest) = line.strip_prefix('#') else { break };
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| CliError::Table(format!("metadata line `{line}`")))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k == "schema" {
                schema = Some(v);
            } else {
                metadata.push((k, v));
            }
            lines.next();
        }
        let schema = schema.ok_or_else(|| CliError::Table("missing schema line".into()))?;
        let mut columns = vec![];
        for item in schema.split(',') {
            let (n, k) = item
                .split_once(':')
                .and_then(|(n, k)| Some((n, Kind::parse(k)?)))
                .ok_or_else(|| CliError::Table(format!("schema entry `{item}`")))?;
            columns.push(Column {
                name: n.to_string(),
                kind: k,
            });
        }
        let header = lines.next().ok_or_else(|| CliError::Table("missing header row".into()))?;
        let names: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        if header.split(',').collect::<Vec<_>>() != names {
            return Err(CliError::Table(format!("header `{header}` does not match schema")));
        }
        let mut rows = vec![];
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(CliError::Table(format!("row {}: {} fields, expected {}", i + 1, fields.len(), columns.len())));
            }
            let row = fields
                .iter()
                .zip(&columns)
                .map(|(f, c)| {
                    let bad = || CliError::Table(format!("row {}: `{f}` is not {}", i + 1, c.kind.name()));
                    Ok(match c.kind {
                        Kind::Int => Cell::Int(f.parse().map_err(|_| bad())?),
                        Kind::Float => Cell::Float(f.parse().map_err(|_| bad())?),
                        Kind::Text => Cell::Text(f.to_string()),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self {
            columns,
            rows,
            metadata,
        })
    }
}

/// Allowed deviation `|a - b| <= abs + rel |b|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub default: Tolerance,
    pub per_column: BTreeMap<String, Tolerance>,
}

impl Tolerances {
    pub fn uniform(abs: f64, rel: f64) -> Self {
        Self {
            default: Tolerance { abs, rel },
            per_column: BTreeMap::new(),
        }
    }

    fn of(&self, column: &str) -> Tolerance {
        self.per_column.get(column).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDiff {
    pub name: String,
    pub max_abs: f64,
    pub max_rel: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffReport {
    pub columns: Vec<ColumnDiff>,
}

impl DiffReport {
    pub fn pass(&self) -> bool {
        self.columns.iter().all(|c| c.pass)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.columns.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

pub fn diff_tables(a: &ResultTable, b: &ResultTable, tol: &Tolerances) -> Result<DiffReport> {
    if a.columns != b.columns {
        let s = |t: &ResultTable| t.columns.iter().map(|c| format!("{}:{}", c.name, c.kind.name())).collect::<Vec<_>>().join(",");
        return Err(CliError::SchemaMismatch(format!("columns [{}] vs [{}]", s(a), s(b))));
    }
    if a.rows.len() != b.rows.len() {
        return Err(CliError::SchemaMismatch(format!("{} rows vs {} rows", a.rows.len(), b.rows.len())));
    }
    let columns = a
        .columns
        .iter()
        .enumerate()
        .map(|(i, col)| {
            let t = tol.of(&col.name);
            let (mut max_abs, mut max_rel, mut pass) = (0.0f64, 0.0f64, true);
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                match (ra[i].as_f64(), rb[i].as_f64()) {
                    (Some(x), Some(y)) => {
                        let d = if x == y { 0.0 } else { (x - y).abs() };
                        let r = if d == 0.0 { 0.0 } else { d / y.abs() };
                        max_abs = max_abs.max(d);
                        max_rel = max_rel.max(r);
                        pass &= !d.is_nan() && d <= t.abs + t.rel * y.abs();
                    }
                    _ => {
                        if ra[i] != rb[i] {
                            pass = false;
                            max_abs = f64::INFINITY;
                            max_rel = f64::INFINITY;
                        }
                    }
                }
            }
            ColumnDiff {
                name: col.name.clone(),
                max_abs,
                max_rel,
                pass,
            }
        })
        .collect();
    Ok(DiffReport { columns })
}
