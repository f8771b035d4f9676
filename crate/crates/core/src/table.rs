//! Cell access shared by raw grids and staged tables.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

/// A column addressed by position or by label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "#{i}"),
            ColumnRef::Name(n) => f.write_str(n),
        }
    }
}

impl From<usize> for ColumnRef {
    fn from(i: usize) -> Self {
        ColumnRef::Index(i)
    }
}

impl From<&str> for ColumnRef {
    fn from(name: &str) -> Self {
        ColumnRef::Name(name.to_string())
    }
}

/// A rectangular table of text cells.
///
/// Multi-segment cells (raw grid cells holding several paragraphs) are seen
/// through this trait as one string with `\n` between segments.
pub trait CellTable {
    fn row_count(&self) -> usize;

    fn column_count(&self) -> usize;

    fn column_label(&self, col: usize) -> Option<&str>;

    fn cell_text(&self, row: usize, col: usize) -> Cow<'_, str>;

    /// Passes every cell of `column` (or of the whole table when `None`) to
    /// `f`, replacing the cell when `f` returns a new value.
    fn rewrite_cells(&mut self, column: Option<usize>, f: &mut dyn FnMut(&str) -> Option<String>);

    fn resolve(&self, column: &ColumnRef) -> Option<usize> {
        match column {
            ColumnRef::Index(i) => (*i < self.column_count()).then_some(*i),
            ColumnRef::Name(name) => {
                (0..self.column_count()).find(|&c| self.column_label(c) == Some(name.as_str()))
            }
        }
    }

    /// Label of `col`, falling back to its 1-based position.
    fn display_label(&self, col: usize) -> String {
        self.column_label(col)
            .map(str::to_string)
            .unwrap_or_else(|| format!("col{}", col + 1))
    }

    fn column_texts(&self, col: usize) -> Vec<String> {
        (0..self.row_count())
            .map(|r| self.cell_text(r, col).into_owned())
            .collect()
    }
}
