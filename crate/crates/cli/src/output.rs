use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected table, csv or json)")),
        }
    }
}

/// One cell. Floats print with the shortest representation that parses
/// back to the same bits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Json {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Cell::Int(v) => Json::from(*v),
            Cell::Text(s) => Json::from(s.as_str()),
            Cell::Bool(b) => Json::from(*b),
            Cell::Empty => Json::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

/// A flat table of records plus the metadata echoed in every output format.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.meta.push((key.to_string(), value.into()));
    }

    /// Index of `name`, adding the column if it is new.
    pub fn column(&mut self, name: &str, unit: &str) -> usize {
        if let Some(i) = self.columns.iter().position(|c| c.name == name) {
            return i;
        }
        self.columns.push(Column {
            name: name.to_string(),
            unit: unit.to_string(),
        });
        for row in &mut self.rows {
            row.push(Cell::Empty);
        }
        self.columns.len() - 1
    }

    pub fn push_row(&mut self, cells: Vec<(&str, &str, Cell)>) {
        let mut row = vec![Cell::Empty; self.columns.len()];
        for (name, unit, cell) in cells {
            let i = self.column(name, unit);
            if i >= row.len() {
                row.resize(i + 1, Cell::Empty);
            }
            row[i] = cell;
        }
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}")?;
        }
        for c in &self.columns {
            writeln!(out, "# column {}: {}", c.name, c.unit)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        let meta: Map<String, Json> = self.meta.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                Json::Object(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.name.clone(), v.to_json()))
                        .collect(),
                )
            })
            .collect();
        serde_json::json!({
            "meta": meta,
            "columns": self.columns,
            "rows": rows,
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "{k}: {v}")?;
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.name.len()]).max().unwrap_or(0))
            .collect();
        let line = |items: Vec<&str>| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        writeln!(out, "{}", line(self.columns.iter().map(|c| c.name.as_str()).collect()))?;
        for r in &cells {
            writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }

    pub fn write(&self, format: Format, out: impl Write) -> Result<()> {
        match format {
            Format::Table => self.write_text(out),
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }
}

/// Format implied by a file extension, if any.
pub fn format_for_path(path: &Path) -> Option<Format> {
    match path.extension()?.to_str()? {
        "csv" => Some(Format::Csv),
        "json" => Some(Format::Json),
        _ => None,
    }
}

/// Writes the table to stdout in `format`, and to `out` when given.
pub fn emit(table: &Table, format: Option<Format>, out: Option<&Path>) -> Result<()> {
    let stdout = std::io::stdout();
    match out {
        Some(path) => {
            let file_format = match format {
                Some(Format::Table) => bail!("--format table cannot be written to a file"),
                Some(f) => f,
                None => format_for_path(path).unwrap_or(Format::Csv),
            };
            let file = std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = std::io::BufWriter::new(file);
            table.write(file_format, &mut w)?;
            w.flush().with_context(|| format!("cannot write {}", path.display()))?;
            table.write_text(stdout.lock())
        }
        None => table.write(format.unwrap_or_default(), stdout.lock()),
    }
}
