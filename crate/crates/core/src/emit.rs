//! TSV and CSV writers. Output is UTF-8 with LF line endings and a header
//! row of field names.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::CellTable;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("value in row {row}, column {column:?} cannot be written as TSV: {value:?}")]
    Unencodable {
        row: usize,
        column: String,
        value: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Tsv,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(TableFormat::Tsv),
            "csv" => Ok(TableFormat::Csv),
            other => Err(format!(
                "unknown table format {other:?} (expected tsv or csv)"
            )),
        }
    }
}

fn header<T: CellTable + ?Sized>(table: &T) -> Vec<String> {
    (0..table.column_count())
        .map(|c| table.display_label(c))
        .collect()
}

fn to_tsv<T: CellTable + ?Sized>(table: &T) -> Result<Vec<u8>, EmitError> {
    let labels = header(table);
    let mut out = String::new();
    let mut line = |row: Option<usize>, cells: &[String]| -> Result<(), EmitError> {
        for (col, cell) in cells.iter().enumerate() {
            if cell.contains(['\t', '\n', '\r']) {
                return Err(EmitError::Unencodable {
                    row: row.unwrap_or(0),
                    column: labels[col].clone(),
                    value: cell.clone(),
                });
            }
        }
        out.push_str(&cells.join("\t"));
        out.push('\n');
        Ok(())
    };
    line(None, &labels)?;
    for row in 0..table.row_count() {
        let cells: Vec<String> = (0..table.column_count())
            .map(|c| table.cell_text(row, c).into_owned())
            .collect();
        line(Some(row), &cells)?;
    }
    Ok(out.into_bytes())
}

fn to_csv<T: CellTable + ?Sized>(table: &T) -> Result<Vec<u8>, EmitError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header(table))?;
    for row in 0..table.row_count() {
        w.write_record((0..table.column_count()).map(|c| table.cell_text(row, c).into_owned()))?;
    }
    w.into_inner().map_err(|e| EmitError::Io {
        path: "<memory>".into(),
        source: e.into_error(),
    })
}

/// Serializes a table in `format`.
pub fn render_table<T: CellTable + ?Sized>(
    table: &T,
    format: TableFormat,
) -> Result<Vec<u8>, EmitError> {
    match format {
        TableFormat::Tsv => to_tsv(table),
        TableFormat::Csv => to_csv(table),
    }
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), EmitError> {
    let io = |source: std::io::Error| EmitError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit_table<T: CellTable + ?Sized>(
    table: &T,
    format: TableFormat,
    path: &Path,
) -> Result<(), EmitError> {
    write_atomic(path, &render_table(table, format)?)
}
