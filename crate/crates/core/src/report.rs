//! Plain tab-separated tables for every output artifact.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lexicon::{format_number, tsv_reader, tsv_writer, Columns};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = tsv_writer(out);
        let err = |e: csv::Error| Error::InvalidInput(format!("writing table: {e}"));
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<table>", e))
    }

    pub fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("tables are UTF-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

pub fn num(x: f64) -> String {
    format_number(x)
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_else(|| "NA".into())
}

/// Reads one numeric column of a TSV file.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut reader = tsv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let cols = Columns::new(&headers, path, &[column])?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = crate::lexicon::record_line(&record);
        out.push(crate::lexicon::parse_f64(path, line, column, cols.get(&record, column))?);
    }
    Ok(out)
}
