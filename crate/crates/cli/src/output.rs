//! Tables and reports. CSV columns: `time` (or another key) first, complex values split
//! into `_re`/`_im` pairs. Numbers use the shortest round-trip formatting, so equal runs
//! give byte-identical files.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::cli::Format;
use crate::CliError;

#[derive(Debug, Clone)]
pub enum Cell {
    Real(f64),
    Complex(Complex64),
    Int(i64),
    Bool(bool),
    Text(String),
}

/// A column-typed table; complex columns expand to two CSV columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv_header(&self) -> Vec<String> {
        let first = self.rows.first();
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(i, c)| match first.map(|r| &r[i]) {
                Some(Cell::Complex(_)) => vec![format!("{c}_re"), format!("{c}_im")],
                _ => vec![c.clone()],
            })
            .collect()
    }

    fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        w.write_record(self.csv_header()).map_err(io)?;
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .flat_map(|c| match c {
                    Cell::Real(x) => vec![x.to_string()],
                    Cell::Complex(z) => vec![z.re.to_string(), z.im.to_string()],
                    Cell::Int(n) => vec![n.to_string()],
                    Cell::Bool(b) => vec![b.to_string()],
                    Cell::Text(t) => vec![t.clone()],
                })
                .collect();
            w.write_record(fields).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| {
                        let v = match c {
                            Cell::Real(x) => serde_json::json!(x),
                            Cell::Complex(z) => serde_json::json!([z.re, z.im]),
                            Cell::Int(n) => serde_json::json!(n),
                            Cell::Bool(b) => serde_json::json!(b),
                            Cell::Text(t) => serde_json::json!(t),
                        };
                        (k.clone(), v)
                    })
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Writes into one output directory and remembers what it wrote.
pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    pub fn table(&mut self, table: &Table) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                let path = self.dir.join(format!("{}.csv", table.name));
                table.write_csv(&path)?;
                self.written.push(path);
                Ok(())
            }
            Format::Json => self.json(&table.name, &table.to_json()),
        }
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }
}
