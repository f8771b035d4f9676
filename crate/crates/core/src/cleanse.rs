//! Counted literal find/replace and the text clean-ups built on it.
//!
//! All matching is literal, exact and case-sensitive. Replacement scans left
//! to right without overlap, which is what an editor's "Replace All" does
//! and what makes its count comparable to a record count.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{CellTable, ColumnRef};

pub const NBSP: char = '\u{a0}';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CleanseError {
    #[error("find string is empty")]
    EmptyFind,
    #[error("separator is empty")]
    EmptySeparator,
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("singular suffix {singular:?} is not a prefix of plural suffix {plural:?}")]
    IncompatibleSuffixes { plural: String, singular: String },
    #[error("invalid escape sequence in {0:?}")]
    BadEscape(String),
}

/// Which cells an operation touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    #[default]
    #[serde(alias = "table")]
    WholeTable,
    Column(ColumnRef),
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scope::WholeTable => f.write_str("whole-table"),
            Scope::Column(c) => write!(f, "column {c}"),
        }
    }
}

impl Scope {
    /// Column index for the scope, `None` meaning the whole table.
    pub fn resolve<T: CellTable + ?Sized>(&self, table: &T) -> Result<Option<usize>, CleanseError> {
        match self {
            Scope::WholeTable => Ok(None),
            Scope::Column(c) => table
                .resolve(c)
                .map(Some)
                .ok_or_else(|| CleanseError::UnknownColumn(c.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplaceSpec {
    pub find: String,
    pub replace: String,
    #[serde(default)]
    pub scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_count: Option<usize>,
}

impl ReplaceSpec {
    pub fn new(find: impl Into<String>, replace: impl Into<String>) -> Self {
        ReplaceSpec {
            find: find.into(),
            replace: replace.into(),
            scope: Scope::WholeTable,
            expected_count: None,
        }
    }

    pub fn in_column(mut self, column: impl Into<ColumnRef>) -> Self {
        self.scope = Scope::Column(column.into());
        self
    }

    pub fn expecting(mut self, count: usize) -> Self {
        self.expected_count = Some(count);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum CountVerdict {
    Pass,
    CountMismatch { expected: usize, actual: usize },
}

impl CountVerdict {
    pub fn check(expected: Option<usize>, actual: usize) -> Self {
        match expected {
            Some(expected) if expected != actual => {
                CountVerdict::CountMismatch { expected, actual }
            }
            _ => CountVerdict::Pass,
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, CountVerdict::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplaceOutcome {
    pub count: usize,
    pub scope: String,
    #[serde(flatten)]
    pub verdict: CountVerdict,
}

/// Expands `\t`, `\n`, `\r`, `\\` and `\uXXXX` in a find/replace literal.
pub fn unescape_literal(raw: &str) -> Result<String, CleanseError> {
    let bad = || CleanseError::BadEscape(raw.to_string());
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next().ok_or_else(bad)? {
            't' => out.push('\t'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            '\\' => out.push('\\'),
            'u' => {
                let hex: String = chars.by_ref().take(4).collect();
                let code = (hex.len() == 4)
                    .then(|| u32::from_str_radix(&hex, 16).ok())
                    .flatten()
                    .and_then(char::from_u32)
                    .ok_or_else(bad)?;
                out.push(code);
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

/// Replaces every non-overlapping occurrence of `find` in `text`, returning
/// the new text when anything changed and the number of substitutions.
pub fn replace_in(text: &str, find: &str, replace: &str) -> (Option<String>, usize) {
    let count = text.matches(find).count();
    if count == 0 {
        (None, 0)
    } else {
        (Some(text.replace(find, replace)), count)
    }
}

pub fn replace_literal<T: CellTable>(
    mut table: T,
    spec: &ReplaceSpec,
) -> Result<(T, ReplaceOutcome), CleanseError> {
    if spec.find.is_empty() {
        return Err(CleanseError::EmptyFind);
    }
    let column = spec.scope.resolve(&table)?;
    let mut count = 0;
    table.rewrite_cells(column, &mut |text| {
        let (new, n) = replace_in(text, &spec.find, &spec.replace);
        count += n;
        new
    });
    let scope = match column {
        None => Scope::WholeTable.to_string(),
        Some(c) => format!("column {}", table.display_label(c)),
    };
    let outcome = ReplaceOutcome {
        count,
        scope,
        verdict: CountVerdict::check(spec.expected_count, count),
    };
    Ok((table, outcome))
}

/// Collapses runs of `sep` in one string to a single `sep`, returning the
/// result and the number of pair reductions (one per removed copy).
///
/// # Panics
/// If `sep` is empty.
pub fn collapse_in(text: &str, sep: &str) -> (String, usize) {
    assert!(!sep.is_empty());
    let doubled = sep.repeat(2);
    let mut current = text.to_string();
    let mut count = 0;
    while current.contains(&doubled) {
        let mut out = String::with_capacity(current.len());
        let mut rest = current.as_str();
        while let Some(at) = rest.find(sep) {
            out.push_str(&rest[..at]);
            out.push_str(sep);
            rest = &rest[at + sep.len()..];
            while let Some(tail) = rest.strip_prefix(sep) {
                rest = tail;
                count += 1;
            }
        }
        out.push_str(rest);
        current = out;
    }
    (current, count)
}

pub fn collapse_separators<T: CellTable>(
    mut table: T,
    sep: &str,
) -> Result<(T, usize), CleanseError> {
    if sep.is_empty() {
        return Err(CleanseError::EmptySeparator);
    }
    let mut count = 0;
    table.rewrite_cells(None, &mut |text| {
        let (new, n) = collapse_in(text, sep);
        count += n;
        (n > 0).then_some(new)
    });
    Ok((table, count))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeMode {
    /// Spaces right before a field separator (TAB), a segment break or the
    /// end of the cell.
    TrailingBeforeSeparator,
    /// Spaces at the start of the cell, of a segment, or after a TAB.
    Leading,
}

fn is_edge_space(c: char) -> bool {
    c == ' ' || c == NBSP
}

fn is_boundary(c: char) -> bool {
    c == '\t' || c == '\n'
}

/// Removes edge runs of U+0020 and U+00A0 in one string. Returns the new
/// text and the number of characters removed.
pub fn strip_edges_in(text: &str, mode: EdgeMode) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut removed = 0;
    let mut rest = text;
    loop {
        let (field, boundary) = match rest.find(is_boundary) {
            Some(at) => (&rest[..at], Some(at)),
            None => (rest, None),
        };
        let kept = match mode {
            EdgeMode::Leading => field.trim_start_matches(is_edge_space),
            EdgeMode::TrailingBeforeSeparator => field.trim_end_matches(is_edge_space),
        };
        removed += field.chars().count() - kept.chars().count();
        out.push_str(kept);
        match boundary {
            // Boundaries are single-byte ASCII.
            Some(at) => {
                out.push_str(&rest[at..=at]);
                rest = &rest[at + 1..];
            }
            None => break,
        }
    }
    (out, removed)
}

pub fn strip_edge_whitespace<T: CellTable>(mut table: T, mode: EdgeMode) -> (T, usize) {
    let mut count = 0;
    table.rewrite_cells(None, &mut |text| {
        let (new, n) = strip_edges_in(text, mode);
        count += n;
        (n > 0).then_some(new)
    });
    (table, count)
}

/// Counts and verdict of a redundancy-suffix removal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancyOutcome {
    pub plural: usize,
    pub singular: usize,
    pub expected_total: usize,
    pub pass: bool,
    /// Rows that carried neither suffix.
    pub unmatched_rows: Vec<usize>,
}

/// Removes `suffix_plural` from every cell that ends with it, otherwise
/// `suffix_singular`; at most one suffix per cell. Passes when the two
/// counts add up to `expected_total`.
pub fn strip_redundancy(
    column: &[String],
    suffix_plural: &str,
    suffix_singular: &str,
    expected_total: usize,
) -> Result<(Vec<String>, RedundancyOutcome), CleanseError> {
    if suffix_singular.is_empty() || !suffix_plural.starts_with(suffix_singular) {
        return Err(CleanseError::IncompatibleSuffixes {
            plural: suffix_plural.to_string(),
            singular: suffix_singular.to_string(),
        });
    }
    let mut plural = 0;
    let mut singular = 0;
    let mut unmatched_rows = Vec::new();
    let out = column
        .iter()
        .enumerate()
        .map(|(row, cell)| {
            if let Some(kept) = cell.strip_suffix(suffix_plural) {
                plural += 1;
                kept.to_string()
            } else if let Some(kept) = cell.strip_suffix(suffix_singular) {
                singular += 1;
                kept.to_string()
            } else {
                unmatched_rows.push(row);
                cell.clone()
            }
        })
        .collect();
    let outcome = RedundancyOutcome {
        plural,
        singular,
        expected_total,
        pass: plural + singular == expected_total,
        unmatched_rows,
    };
    Ok((out, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridkit::StagedTable;
    use crate::ingest::RawGrid;

    fn staged(field: &str, values: &[&str]) -> StagedTable {
        StagedTable::new(
            vec![field.to_string()],
            values.iter().map(|v| vec![v.to_string()]).collect(),
        )
    }

    #[test]
    fn column_scope_vs_whole_table() {
        let table = StagedTable::new(
            vec!["votes".into(), "title".into()],
            vec![
                vec!["56 | 2".into(), "Patch | notes".into()],
                vec!["72 | 2".into(), "plain".into()],
            ],
        );
        let spec = ReplaceSpec::new(" | ", "\t")
            .in_column("votes")
            .expecting(2);
        let (out, outcome) = replace_literal(table.clone(), &spec).unwrap();
        assert_eq!(outcome.count, 2);
        assert!(outcome.verdict.is_pass());
        assert_eq!(out.rows[0], vec!["56\t2", "Patch | notes"]);

        let whole = ReplaceSpec::new(" | ", "\t").expecting(2);
        let (_, outcome) = replace_literal(table, &whole).unwrap();
        assert_eq!(outcome.count, 3);
        assert_eq!(
            outcome.verdict,
            CountVerdict::CountMismatch {
                expected: 2,
                actual: 3
            }
        );
    }

    #[test]
    fn replace_absent_needle() {
        let table = staged("a", &["abc", "def"]);
        let (out, outcome) = replace_literal(table.clone(), &ReplaceSpec::new("x", "y")).unwrap();
        assert_eq!(outcome.count, 0);
        assert_eq!(out, table);
    }

    #[test]
    fn replace_errors() {
        let table = staged("a", &["abc"]);
        assert_eq!(
            replace_literal(table.clone(), &ReplaceSpec::new("", "y")).unwrap_err(),
            CleanseError::EmptyFind
        );
        assert!(matches!(
            replace_literal(table, &ReplaceSpec::new("a", "y").in_column("zzz")),
            Err(CleanseError::UnknownColumn(_))
        ));
    }

    #[test]
    fn nbsp_is_not_a_space_for_replace() {
        let table = staged("a", &["\u{a0}x"]);
        let (_, outcome) = replace_literal(table, &ReplaceSpec::new(" ", "")).unwrap();
        assert_eq!(outcome.count, 0);
    }

    #[test]
    fn replace_paragraph_marks_in_raw_grid() {
        let grid = RawGrid::from_texts([["Oh boy\nby\nKanzler (NA)"]]);
        let (out, outcome) = replace_literal(grid, &ReplaceSpec::new("\n", "\t")).unwrap();
        assert_eq!(outcome.count, 2);
        assert_eq!(
            out.cell(0, 0).unwrap().segments,
            vec!["Oh boy\tby\tKanzler (NA)"]
        );
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(collapse_in("a\t\t\tb", "\t"), ("a\tb".to_string(), 2));
        assert_eq!(collapse_in("a\tb", "\t"), ("a\tb".to_string(), 0));
        assert_eq!(collapse_in("\t\t\t\t", "\t"), ("\t".to_string(), 3));
        let (out, n) = collapse_separators(staged("a", &["x\t\ty", "z"]), "\t").unwrap();
        assert_eq!(n, 1);
        assert_eq!(out.rows[0][0], "x\ty");
        assert!(collapse_separators(staged("a", &[]), "").is_err());
    }

    #[test]
    fn edge_examples() {
        assert_eq!(
            strip_edges_in("Kanzler (NA) \t", EdgeMode::TrailingBeforeSeparator),
            ("Kanzler (NA)\t".to_string(), 1)
        );
        assert_eq!(
            strip_edges_in("\u{a0} Rioter", EdgeMode::Leading),
            ("Rioter".to_string(), 2)
        );
        assert_eq!(
            strip_edges_in("abc", EdgeMode::Leading),
            ("abc".to_string(), 0)
        );
        assert_eq!(
            strip_edges_in(" a b \t c \n d ", EdgeMode::Leading),
            ("a b \tc \nd ".to_string(), 3)
        );
        assert_eq!(
            strip_edges_in(" a b \t c \n d ", EdgeMode::TrailingBeforeSeparator),
            (" a b\t c\n d".to_string(), 3)
        );
    }

    #[test]
    fn redundancy_plural_first() {
        let col: Vec<String> = [
            "Rioter Comments",
            "Rioter Comment",
            "Boards Developer Comments",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let (out, o) = strip_redundancy(&col, " Comments", " Comment", 3).unwrap();
        assert_eq!(out, vec!["Rioter", "Rioter", "Boards Developer"]);
        assert_eq!((o.plural, o.singular, o.pass), (2, 1, true));
    }

    #[test]
    fn redundancy_without_suffixes_fails() {
        let col = vec!["a".to_string(), "b".to_string()];
        let (out, o) = strip_redundancy(&col, " Comments", " Comment", 2).unwrap();
        assert_eq!(out, col);
        assert_eq!((o.plural, o.singular, o.pass), (0, 0, false));
        assert_eq!(o.unmatched_rows, vec![0, 1]);
        assert!(strip_redundancy(&col, " Comment", " Views", 2).is_err());
    }

    #[test]
    fn escapes() {
        assert_eq!(
            unescape_literal(r"a\tb\nc\u00A0\\").unwrap(),
            "a\tb\nc\u{a0}\\"
        );
        assert_eq!(unescape_literal("plain\t").unwrap(), "plain\t");
        assert!(unescape_literal(r"\q").is_err());
        assert!(unescape_literal(r"\u00").is_err());
    }
}
