//! Tabular command output rendered as CSV, JSON or aligned text.
//!
//! Reals are printed with 17 significant digits (`{:.16e}`), identically in
//! CSV and JSON, so both round-trip to the same `f64`. Big integers are
//! emitted as JSON strings.

use std::io::{self, Write};

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use walklab::verify::Check;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    UInt(u64),
    /// Integer of arbitrary size, kept as its decimal digits.
    Big(String),
    Real(f64),
    Bool(bool),
    Text(String),
}

pub fn real_text(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Self::Text(s.into())
    }

    pub fn opt_big(s: Option<String>) -> Self {
        s.map_or(Self::Empty, Self::Big)
    }

    pub fn opt_real(v: Option<f64>) -> Self {
        v.map_or(Self::Empty, Self::Real)
    }

    fn render(&self) -> String {
        match self {
            Self::Empty => String::new(),
            Self::Int(v) => v.to_string(),
            Self::UInt(v) => v.to_string(),
            Self::Big(s) | Self::Text(s) => s.clone(),
            Self::Real(v) => real_text(*v),
            Self::Bool(b) => b.to_string(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Empty => s.serialize_none(),
            Self::Int(v) => s.serialize_i64(*v),
            Self::UInt(v) => s.serialize_u64(*v),
            Self::Big(v) | Self::Text(v) => s.serialize_str(v),
            Self::Bool(b) => s.serialize_bool(*b),
            Self::Real(v) if v.is_finite() => RawValue::from_string(real_text(*v))
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            Self::Real(v) => s.serialize_str(&real_text(*v)),
        }
    }
}

/// Everything a command prints.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub args: Vec<(&'static str, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Option<Vec<Check>>,
    /// Replaces the default aligned table in text mode.
    pub text: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            args: Vec::new(),
            columns,
            rows: Vec::new(),
            checks: None,
            text: None,
        }
    }

    pub fn arg(&mut self, name: &'static str, value: Cell) -> &mut Self {
        self.args.push((name, value));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            Format::Text => self.write_text(out),
        }
    }

    fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }

    fn write_text(&self, out: &mut impl Write) -> io::Result<()> {
        if let Some(text) = &self.text {
            return out.write_all(text.as_bytes());
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
            .collect();
        let line = |fields: Vec<&str>| {
            let padded: Vec<String> = fields.iter().zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(self.columns.clone()))?;
        for row in &cells {
            writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }
}

struct Object<'a>(&'a [&'static str], &'a [Cell]);

impl Serialize for Object<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

struct Rows<'a>(&'a Report);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows.len()))?;
        for row in &self.0.rows {
            seq.serialize_element(&Object(&self.0.columns, row))?;
        }
        seq.end()
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (names, values): (Vec<&'static str>, Vec<Cell>) = self.args.iter().cloned().unzip();
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("command", self.command)?;
        map.serialize_entry("args", &Object(&names, &values))?;
        map.serialize_entry("rows", &Rows(self))?;
        if let Some(checks) = &self.checks {
            map.serialize_entry("checks", checks)?;
        }
        map.end()
    }
}
