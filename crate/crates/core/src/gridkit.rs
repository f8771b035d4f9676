//! Structural grid operations and the modulo regrouping of `k` raw rows into
//! one record.
//!
//! Records and offsets are 0-based: record `r`, field offset `o` reads raw
//! row `r * k + o`. A spreadsheet formula `INDEX(col, record1*4-3)` with a
//! 1-based record number is offset 0 here.

use std::borrow::Cow;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{RawCell, RawGrid};
use crate::table::CellTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("row range {start}..{end} is out of bounds for {len} rows")]
    OutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("{0:?} is not a permutation of the grid's columns")]
    NotAPermutation(Vec<usize>),
    #[error("rows per record must be at least 1")]
    ZeroRowsPerRecord,
    #[error("{rows} rows do not split into records of {k}: remainder {remainder}")]
    RemainderNonZero {
        rows: usize,
        k: usize,
        remainder: usize,
    },
    #[error("field map {name:?} is invalid: {reason}")]
    InvalidFieldMap { name: String, reason: String },
    #[error("row {row} column {column} holds {segments} segments, more than {k} rows per record")]
    SegmentOverflow {
        row: usize,
        column: usize,
        segments: usize,
        k: usize,
    },
}

/// Where one output field of a record is read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMap {
    pub name: String,
    pub offset: usize,
    pub column: usize,
    /// Read from this column instead when `column` is blank at the same row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_column: Option<usize>,
}

impl FieldMap {
    pub fn new(name: impl Into<String>, offset: usize, column: usize) -> Self {
        FieldMap {
            name: name.into(),
            offset,
            column,
            fallback_column: None,
        }
    }

    pub fn with_fallback(mut self, column: usize) -> Self {
        self.fallback_column = Some(column);
        self
    }

    fn validate(&self, k: usize, column_count: usize) -> Result<(), GridError> {
        let invalid = |reason: String| GridError::InvalidFieldMap {
            name: self.name.clone(),
            reason,
        };
        if self.offset >= k {
            return Err(invalid(format!(
                "offset {} is not below k = {k}",
                self.offset
            )));
        }
        if self.column >= column_count {
            return Err(invalid(format!(
                "column {} is outside {column_count} columns",
                self.column
            )));
        }
        match self.fallback_column {
            Some(fb) if fb == self.column => {
                Err(invalid("fallback column equals the primary column".into()))
            }
            Some(fb) if fb >= column_count => Err(invalid(format!(
                "fallback column {fb} is outside {column_count} columns"
            ))),
            _ => Ok(()),
        }
    }
}

/// One row per record, text values only.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StagedTable {
    pub fieldnames: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl StagedTable {
    pub fn new(fieldnames: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == fieldnames.len()));
        StagedTable { fieldnames, rows }
    }

    pub fn record_count(&self) -> usize {
        self.rows.len()
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fieldnames.iter().position(|f| f == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<String>> {
        let i = self.field_index(name)?;
        Some(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    /// Replaces field `index` with `names`, one new value list per name.
    pub(crate) fn splice_field(
        &mut self,
        index: usize,
        names: &[String],
        values: Vec<Vec<String>>,
    ) {
        debug_assert_eq!(values.len(), self.rows.len());
        self.fieldnames.splice(index..=index, names.iter().cloned());
        for (row, new) in self.rows.iter_mut().zip(values) {
            debug_assert_eq!(new.len(), names.len());
            row.splice(index..=index, new);
        }
    }

    pub(crate) fn remove_field(&mut self, index: usize) {
        self.fieldnames.remove(index);
        for row in &mut self.rows {
            row.remove(index);
        }
    }

    /// Flattens a raw grid: one record per row, segments joined by a space.
    pub fn from_grid(grid: &RawGrid) -> Self {
        let fieldnames = (0..grid.column_count())
            .map(|c| grid.display_label(c))
            .collect();
        let rows = grid
            .rows()
            .iter()
            .map(|r| r.iter().map(RawCell::joined).collect())
            .collect();
        StagedTable { fieldnames, rows }
    }
}

impl CellTable for StagedTable {
    fn row_count(&self) -> usize {
        self.rows.len()
    }

    fn column_count(&self) -> usize {
        self.fieldnames.len()
    }

    fn column_label(&self, col: usize) -> Option<&str> {
        self.fieldnames.get(col).map(String::as_str)
    }

    fn cell_text(&self, row: usize, col: usize) -> Cow<'_, str> {
        Cow::Borrowed(&self.rows[row][col])
    }

    fn rewrite_cells(&mut self, column: Option<usize>, f: &mut dyn FnMut(&str) -> Option<String>) {
        for row in &mut self.rows {
            for (c, value) in row.iter_mut().enumerate() {
                if column.is_some_and(|col| col != c) {
                    continue;
                }
                if let Some(new) = f(value) {
                    *value = new;
                }
            }
        }
    }
}

/// A field that was blank in both its primary and fallback column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmptyBoth {
    pub record: usize,
    pub field: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Regrouped {
    pub table: StagedTable,
    pub warnings: Vec<EmptyBoth>,
}

pub fn delete_rows(grid: &RawGrid, range: Range<usize>) -> Result<RawGrid, GridError> {
    let len = grid.rows().len();
    if range.start > range.end || range.end > len {
        return Err(GridError::OutOfBounds {
            start: range.start,
            end: range.end,
            len,
        });
    }
    let mut out = grid.clone();
    out.rows_mut().drain(range);
    Ok(out)
}

/// Reorders columns so that output column `i` is input column
/// `permutation[i]`.
pub fn reorder_columns(grid: &RawGrid, permutation: &[usize]) -> Result<RawGrid, GridError> {
    let n = grid.column_count();
    let mut seen = vec![false; n];
    let bijective = permutation.len() == n
        && permutation
            .iter()
            .all(|&p| p < n && !std::mem::replace(&mut seen[p], true));
    if !bijective {
        return Err(GridError::NotAPermutation(permutation.to_vec()));
    }
    let (rows, names, count) = grid.clone().into_parts();
    let rows = rows
        .into_iter()
        .map(|row| permutation.iter().map(|&p| row[p].clone()).collect())
        .collect();
    let names = names.map(|names| permutation.iter().map(|&p| names[p].clone()).collect());
    Ok(RawGrid::from_parts(rows, names, count))
}

pub fn count_records(grid: &RawGrid, rows_per_record: usize) -> Result<usize, GridError> {
    if rows_per_record == 0 {
        return Err(GridError::ZeroRowsPerRecord);
    }
    let rows = grid.rows().len();
    let remainder = rows % rows_per_record;
    if remainder != 0 {
        return Err(GridError::RemainderNonZero {
            rows,
            k: rows_per_record,
            remainder,
        });
    }
    Ok(rows / rows_per_record)
}

/// Spreads every multi-segment row over `k` rows: segment `i` of a cell
/// lands in row `i` of the block, one segment per cell. This is the layout a
/// spreadsheet produces when it opens a table whose cells hold paragraphs.
pub fn spread_segments(grid: &RawGrid, k: usize) -> Result<RawGrid, GridError> {
    if k == 0 {
        return Err(GridError::ZeroRowsPerRecord);
    }
    let (rows, names, count) = grid.clone().into_parts();
    let mut out = Vec::with_capacity(rows.len() * k);
    for (r, row) in rows.into_iter().enumerate() {
        let mut block: Vec<Vec<RawCell>> = vec![vec![RawCell::default(); count]; k];
        for (c, cell) in row.into_iter().enumerate() {
            if cell.segments.len() > k {
                return Err(GridError::SegmentOverflow {
                    row: r,
                    column: c,
                    segments: cell.segments.len(),
                    k,
                });
            }
            for (i, seg) in cell.segments.into_iter().enumerate() {
                block[i][c] = RawCell {
                    segments: vec![seg],
                    has_image: cell.has_image,
                    had_bullets: cell.had_bullets,
                };
            }
            if block[0][c].segments.is_empty() {
                block[0][c].has_image = cell.has_image;
                block[0][c].had_bullets = cell.had_bullets;
            }
        }
        out.extend(block);
    }
    Ok(RawGrid::from_parts(out, names, count))
}

/// Builds one record from every `k` consecutive rows.
///
/// Record `r`, field `f` is the cell at row `r * k + f.offset`, column
/// `f.column`, segments joined with a single space. When that cell is blank
/// and a fallback column is set, the fallback cell at the same row is used;
/// if both are blank the value is empty and a warning is recorded.
pub fn regroup(grid: &RawGrid, k: usize, maps: &[FieldMap]) -> Result<Regrouped, GridError> {
    let records = count_records(grid, k)?;
    for map in maps {
        map.validate(k, grid.column_count())?;
    }
    let mut warnings = Vec::new();
    let rows = (0..records)
        .map(|r| {
            maps.iter()
                .map(|map| {
                    let row = &grid.rows()[r * k + map.offset];
                    let primary = &row[map.column];
                    match map.fallback_column {
                        Some(fb) if primary.is_blank() => {
                            let fallback = &row[fb];
                            if fallback.is_blank() {
                                warnings.push(EmptyBoth {
                                    record: r,
                                    field: map.name.clone(),
                                });
                                String::new()
                            } else {
                                fallback.joined()
                            }
                        }
                        _ => primary.joined(),
                    }
                })
                .collect()
        })
        .collect();
    Ok(Regrouped {
        table: StagedTable {
            fieldnames: maps.iter().map(|m| m.name.clone()).collect(),
            rows,
        },
        warnings,
    })
}

/// Inverse of [`regroup`] on the referenced positions: writes each field
/// value back to row `r * k + offset`, primary column, in a grid of
/// `column_count` columns. Unreferenced cells are empty.
pub fn ungroup(table: &StagedTable, k: usize, maps: &[FieldMap], column_count: usize) -> RawGrid {
    let mut rows = vec![vec![RawCell::default(); column_count]; table.record_count() * k];
    for (r, record) in table.rows.iter().enumerate() {
        for (map, value) in maps.iter().zip(record) {
            rows[r * k + map.offset][map.column] = RawCell::text(value);
        }
    }
    RawGrid::from_parts(rows, None, column_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered(rows: usize, cols: usize) -> RawGrid {
        RawGrid::from_texts((0..rows).map(|r| (0..cols).map(move |c| format!("r{r}c{c}"))))
    }

    #[test]
    fn delete_rows_examples() {
        let g = numbered(10, 1);
        let out = delete_rows(&g, 0..3).unwrap();
        assert_eq!(out.rows().len(), 7);
        assert_eq!(out.cell_text(0, 0), "r3c0");
        assert_eq!(delete_rows(&g, 4..4).unwrap(), g);
        assert!(matches!(
            delete_rows(&g, 8..11),
            Err(GridError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn reorder_examples() {
        let g = numbered(2, 6);
        assert_eq!(reorder_columns(&g, &[0, 1, 2, 3, 4, 5]).unwrap(), g);
        let lol = reorder_columns(&g, &[3, 4, 5, 0, 1, 2]).unwrap();
        assert_eq!(lol.cell_text(0, 0), "r0c3");
        assert_eq!(lol.cell_text(1, 5), "r1c2");
        let three = numbered(3, 3);
        let rev = reorder_columns(&three, &[2, 1, 0]).unwrap();
        assert_eq!(reorder_columns(&rev, &[2, 1, 0]).unwrap(), three);
        assert!(reorder_columns(&three, &[0, 0, 1]).is_err());
        assert!(reorder_columns(&three, &[0, 1]).is_err());
    }

    #[test]
    fn reorder_moves_names() {
        let g = numbered(1, 3).with_column_names(vec!["a".into(), "b".into(), "c".into()]);
        let out = reorder_columns(&g, &[2, 0, 1]).unwrap();
        assert_eq!(out.column_names().unwrap(), ["c", "a", "b"]);
    }

    #[test]
    fn count_records_examples() {
        assert_eq!(count_records(&numbered(3864, 1), 4), Ok(966));
        assert_eq!(count_records(&numbered(7, 1), 1), Ok(7));
        assert_eq!(
            count_records(&numbered(10, 1), 4),
            Err(GridError::RemainderNonZero {
                rows: 10,
                k: 4,
                remainder: 2
            })
        );
        assert_eq!(
            count_records(&numbered(4, 1), 0),
            Err(GridError::ZeroRowsPerRecord)
        );
    }

    #[test]
    fn regroup_brute_force_offset() {
        let g = numbered(8, 1);
        let out = regroup(&g, 4, &[FieldMap::new("f", 1, 0)]).unwrap();
        assert_eq!(out.table.rows, vec![vec!["r1c0"], vec!["r5c0"]]);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn regroup_fallback_and_warning() {
        let g = RawGrid::from_texts([
            ["", "title in col 2"],
            ["own title", "ignored"],
            ["\u{a0} ", ""],
        ]);
        let map = FieldMap::new("title", 0, 0).with_fallback(1);
        let out = regroup(&g, 1, &[map]).unwrap();
        assert_eq!(out.table.rows[0], vec!["title in col 2"]);
        assert_eq!(out.table.rows[1], vec!["own title"]);
        assert_eq!(out.table.rows[2], vec![""]);
        assert_eq!(
            out.warnings,
            vec![EmptyBoth {
                record: 2,
                field: "title".into()
            }]
        );
    }

    #[test]
    fn regroup_joins_segments_with_space() {
        let g = RawGrid::from_texts([["56 | 2\n54\nvotes"]]);
        let out = regroup(&g, 1, &[FieldMap::new("v", 0, 0)]).unwrap();
        assert_eq!(out.table.rows[0][0], "56 | 2 54 votes");
    }

    #[test]
    fn regroup_rejects_bad_maps() {
        let g = numbered(4, 2);
        assert!(regroup(&g, 4, &[FieldMap::new("x", 4, 0)]).is_err());
        assert!(regroup(&g, 4, &[FieldMap::new("x", 0, 2)]).is_err());
        assert!(regroup(&g, 4, &[FieldMap::new("x", 0, 1).with_fallback(1)]).is_err());
        assert!(matches!(
            regroup(&numbered(10, 1), 4, &[]),
            Err(GridError::RemainderNonZero { .. })
        ));
    }

    #[test]
    fn spread_then_regroup() {
        let g = RawGrid::from_texts([[
            "56 | 2\n54\nvotes",
            "t\nby\nu (NA)\nin s about 2 hours ago",
            "cat",
        ]]);
        let spread = spread_segments(&g, 4).unwrap();
        assert_eq!(spread.rows().len(), 4);
        assert_eq!(spread.cell_text(1, 0), "54");
        assert_eq!(spread.cell_text(3, 0), "");
        assert_eq!(spread.cell_text(3, 1), "in s about 2 hours ago");
        assert_eq!(spread.cell_text(0, 2), "cat");
        assert!(matches!(
            spread_segments(&g, 3),
            Err(GridError::SegmentOverflow { column: 1, .. })
        ));
    }

    #[test]
    fn ungroup_round_trip() {
        let g = numbered(12, 3);
        let maps = [
            FieldMap::new("a", 0, 0),
            FieldMap::new("b", 2, 1),
            FieldMap::new("c", 3, 2),
        ];
        let table = regroup(&g, 4, &maps).unwrap().table;
        let back = ungroup(&table, 4, &maps, 3);
        for r in 0..3 {
            for m in &maps {
                let row = r * 4 + m.offset;
                assert_eq!(back.cell(row, m.column), g.cell(row, m.column));
            }
        }
    }
}
