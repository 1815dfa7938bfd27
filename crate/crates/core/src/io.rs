//! CSV input and the tabular outputs of the surface commands.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{ContourSet, ProfilePoint, SurfaceCell, SurfaceGrid};
use crate::stats::RawSeries;

/// What to do with a row whose selected cell is blank, unparseable or non-finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    #[default]
    Error,
    DropRow,
}

/// Named numeric columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub column_names: Vec<String>,
    pub columns: Vec<RawSeries>,
    /// File path, or `"stdin"`.
    pub source: String,
    pub dropped_rows: usize,
}

impl DataMatrix {
    pub fn column(&self, name: &str) -> Result<&RawSeries> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn select(&self, names: &[String]) -> Result<Vec<RawSeries>> {
        names.iter().map(|n| self.column(n).cloned()).collect()
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, RawSeries::len)
    }
}

/// Loads a CSV file with a header row; `"-"` reads standard input.
/// `columns = None` selects every column.
pub fn load_csv(
    path: &str,
    columns: Option<&[String]>,
    policy: MissingPolicy,
) -> Result<DataMatrix> {
    if path == "-" {
        load_csv_from_reader(io::stdin().lock(), "stdin", columns, policy)
    } else {
        let file = File::open(Path::new(path))?;
        load_csv_from_reader(file, path, columns, policy)
    }
}

pub fn load_csv_from_reader<R: Read>(
    reader: R,
    source: &str,
    columns: Option<&[String]>,
    policy: MissingPolicy,
) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate column name '{h}'")));
        }
    }
    let names: Vec<String> = match columns {
        Some(cols) => cols.to_vec(),
        None => headers.clone(),
    };
    let mut picked = HashSet::new();
    let mut indices = Vec::with_capacity(names.len());
    for name in &names {
        if !picked.insert(name.as_str()) {
            return Err(Error::InvalidInput(format!(
                "column '{name}' selected twice"
            )));
        }
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))?;
        indices.push(idx);
    }

    let mut data: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut dropped = 0;
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(indices.len());
        let mut failure = None;
        for (k, &idx) in indices.iter().enumerate() {
            let cell = record.get(idx).unwrap_or("");
            match parse_cell(cell) {
                Ok(v) => row.push(v),
                Err(message) => {
                    failure = Some((k, message));
                    break;
                }
            }
        }
        match (failure, policy) {
            (None, _) => {
                for (col, v) in data.iter_mut().zip(row) {
                    col.push(v);
                }
            }
            (Some(_), MissingPolicy::DropRow) => dropped += 1,
            (Some((k, message)), MissingPolicy::Error) => {
                return Err(Error::Parse {
                    row: line,
                    column: names[k].clone(),
                    message,
                });
            }
        }
    }
    let rows = data.first().map_or(0, Vec::len);
    if rows < 2 {
        return Err(Error::EmptyResult(rows));
    }
    Ok(DataMatrix {
        column_names: names,
        columns: data
            .into_iter()
            .map(RawSeries::new)
            .collect::<Result<_>>()?,
        source: source.to_string(),
        dropped_rows: dropped,
    })
}

fn parse_cell(cell: &str) -> std::result::Result<f64, String> {
    if cell.is_empty() {
        return Err("missing value".into());
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("non-finite value {v}")),
        Err(_) => Err(format!("cannot parse '{cell}' as a number")),
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x}")
}

pub const GRID_HEADER: [&str; 4] = ["beta", "gamma", "mcc", "feasible"];

/// One row of a serialized surface grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub beta: f64,
    pub gamma: f64,
    pub mcc: f64,
    pub feasible: bool,
}

pub fn write_grid<W: Write>(grid: &SurfaceGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_HEADER)?;
    for (beta, gamma, SurfaceCell { mcc, feasible }) in grid.iter() {
        w.write_record([
            fmt_num(beta),
            fmt_num(gamma),
            fmt_num(mcc),
            feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid<R: Read>(input: R) -> Result<Vec<GridRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(GRID_HEADER) {
        return Err(Error::InvalidInput(format!(
            "expected grid header {}, got {}",
            GRID_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |k: usize| -> Result<f64> {
            let cell = rec.get(k).unwrap_or("");
            parse_cell(cell).map_err(|message| Error::Parse {
                row: line,
                column: GRID_HEADER[k].to_string(),
                message,
            })
        };
        let feasible = match rec.get(3) {
            Some("true") => true,
            Some("false") => false,
            other => {
                return Err(Error::Parse {
                    row: line,
                    column: "feasible".into(),
                    message: format!("expected true or false, got '{}'", other.unwrap_or("")),
                })
            }
        };
        rows.push(GridRow {
            beta: num(0)?,
            gamma: num(1)?,
            mcc: num(2)?,
            feasible,
        });
    }
    Ok(rows)
}

pub fn write_profile<W: Write>(profile: &[ProfilePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "beta", "gamma", "mcc", "feasible"])?;
    for p in profile {
        w.write_record([
            fmt_num(p.t),
            fmt_num(p.beta),
            fmt_num(p.gamma),
            fmt_num(p.mcc),
            p.feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per polyline vertex, keyed by level and polyline index.
pub fn write_contours<W: Write>(sets: &[ContourSet], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "line", "beta", "gamma"])?;
    for set in sets {
        for (k, line) in set.polylines.iter().enumerate() {
            for &(b, g) in line {
                w.write_record([fmt_num(set.level), k.to_string(), fmt_num(b), fmt_num(g)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
