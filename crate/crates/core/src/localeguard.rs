//! Predicts what a spreadsheet does to raw cell text when it opens a page
//! under a given locale: dotted pairs turned into dates, separators misread,
//! numbers demoted to text.
//!
//! Only those three coercions are modelled. The reference interpretation
//! ("ground truth") is dot-decimal with comma grouping and never produces a
//! date.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::DecimalScalar;
use crate::table::CellTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocaleError {
    #[error("not a number under the {profile} grammar: {cell:?}")]
    NotANumber { cell: String, profile: String },
    #[error("unknown locale profile {0:?}")]
    UnknownProfile(String),
    #[error("invalid locale profile {name:?}: {reason}")]
    InvalidProfile { name: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocaleProfile {
    pub name: String,
    pub decimal_sep: char,
    pub group_sep: char,
    /// Whether `A.B` integer pairs are read as month/day dates.
    pub date_coercion: bool,
    /// Month abbreviations used when rendering coerced dates.
    pub month_names: Vec<String>,
}

const EN_MONTHS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];
const HU_MONTHS: [&str; 12] = [
    "jan", "febr", "márc", "ápr", "máj", "jún", "júl", "aug", "szept", "okt", "nov", "dec",
];

impl LocaleProfile {
    pub const GROUND_TRUTH: &'static str = "en-ground-truth";
    pub const HU_HAZARD: &'static str = "hu-hazard";

    /// Dot decimal, comma grouping, no date coercion.
    pub fn en_ground_truth() -> Self {
        LocaleProfile {
            name: Self::GROUND_TRUTH.to_string(),
            decimal_sep: '.',
            group_sep: ',',
            date_coercion: false,
            month_names: EN_MONTHS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Comma decimal, space grouping, dotted pairs become dates.
    pub fn hu_hazard() -> Self {
        LocaleProfile {
            name: Self::HU_HAZARD.to_string(),
            decimal_sep: ',',
            group_sep: ' ',
            date_coercion: true,
            month_names: HU_MONTHS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn builtin(name: &str) -> Result<Self, LocaleError> {
        match name {
            Self::GROUND_TRUTH => Ok(Self::en_ground_truth()),
            Self::HU_HAZARD => Ok(Self::hu_hazard()),
            other => Err(LocaleError::UnknownProfile(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), LocaleError> {
        let invalid = |reason: &str| LocaleError::InvalidProfile {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.decimal_sep == self.group_sep {
            return Err(invalid("decimal and group separators are equal"));
        }
        if self.decimal_sep.is_ascii_digit() || self.group_sep.is_ascii_digit() {
            return Err(invalid("separators must not be digits"));
        }
        if self.month_names.len() != 12 {
            return Err(invalid("exactly 12 month names are required"));
        }
        Ok(())
    }
}

/// What a cell becomes after opening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum CellKind<T> {
    Number(T),
    Date { month: u8, day: u8 },
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercedValue<T> {
    pub kind: CellKind<T>,
    /// True iff `kind` differs from the ground-truth interpretation.
    pub corrupted: bool,
}

impl<T: Clone> CellKind<T> {
    /// Spreadsheet-style rendering of a date (`05.jan`); `None` otherwise.
    pub fn render_date(&self, profile: &LocaleProfile) -> Option<String> {
        match self {
            CellKind::Date { month, day } => Some(format!(
                "{day:02}.{}",
                profile.month_names[usize::from(*month) - 1]
            )),
            _ => None,
        }
    }
}

struct NumberParts<'a> {
    negative: bool,
    int: String,
    frac: &'a str,
}

/// Sign, 1-3 leading digits then 3-digit groups (or an ungrouped run), an
/// optional fraction after `decimal`.
fn number_parts(cell: &str, decimal: char, group: char) -> Option<NumberParts<'_>> {
    let (negative, body) = match cell.strip_prefix(['-', '+']) {
        Some(rest) => (cell.starts_with('-'), rest),
        None => (false, cell),
    };
    let (int_part, frac) = match body.split_once(decimal) {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if let Some(f) = frac {
        if !all_digits(f) {
            return None;
        }
    }
    let int = if int_part.contains(group) {
        let groups: Vec<&str> = int_part.split(group).collect();
        let head_ok = all_digits(groups[0]) && groups[0].len() <= 3;
        let tail_ok = groups[1..].iter().all(|g| g.len() == 3 && all_digits(g));
        if !(head_ok && tail_ok) {
            return None;
        }
        groups.concat()
    } else if int_part.is_empty() && frac.is_some() {
        String::new()
    } else if all_digits(int_part) {
        int_part.to_string()
    } else {
        return None;
    };
    Some(NumberParts {
        negative,
        int,
        frac: frac.unwrap_or(""),
    })
}

fn parse_with<T: DecimalScalar>(cell: &str, decimal: char, group: char) -> Option<T> {
    let p = number_parts(cell, decimal, group)?;
    Some(T::from_decimal(p.negative, &p.int, p.frac))
}

/// Parses a number under the profile's separators. Never produces a date.
pub fn safe_parse_number<T: DecimalScalar>(
    cell: &str,
    profile: &LocaleProfile,
) -> Result<T, LocaleError> {
    parse_with(
        cell.trim_matches(' '),
        profile.decimal_sep,
        profile.group_sep,
    )
    .ok_or_else(|| LocaleError::NotANumber {
        cell: cell.to_string(),
        profile: profile.name.clone(),
    })
}

fn plain_integer<T: DecimalScalar>(cell: &str) -> Option<T> {
    let (negative, digits) = match cell.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, cell),
    };
    (!digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
        .then(|| T::from_decimal(negative, digits, ""))
}

fn dotted_date(cell: &str) -> Option<(u8, u8)> {
    let (a, b) = cell.split_once('.')?;
    let small = |s: &str| -> Option<u32> {
        (!s.is_empty() && s.len() <= 2 && s.bytes().all(|b| b.is_ascii_digit()))
            .then(|| s.parse().ok())
            .flatten()
    };
    let (a, b) = (small(a)?, small(b)?);
    let month = |m: u32| (1..=12).contains(&m);
    let day = |d: u32| (1..=31).contains(&d);
    if month(a) && day(b) {
        Some((a as u8, b as u8))
    } else if month(b) && day(a) {
        Some((b as u8, a as u8))
    } else {
        None
    }
}

/// Reference reading of a cell: dot decimal, comma grouping, no dates.
pub fn ground_truth<T: DecimalScalar>(cell: &str) -> CellKind<T> {
    let trimmed = cell.trim_matches(' ');
    plain_integer(trimmed)
        .or_else(|| parse_with(trimmed, '.', ','))
        .map(CellKind::Number)
        .unwrap_or_else(|| CellKind::Text(cell.to_string()))
}

/// Predicts how a naive open under `profile` reads `cell`: plain integer,
/// then (with date coercion) `A.B` as month A day B or else month B day A,
/// then a number under the profile's separators, else text.
pub fn simulate_open<T: DecimalScalar>(cell: &str, profile: &LocaleProfile) -> CoercedValue<T> {
    let trimmed = cell.trim_matches(' ');
    let kind = if let Some(n) = plain_integer(trimmed) {
        CellKind::Number(n)
    } else if let Some((month, day)) = profile
        .date_coercion
        .then(|| dotted_date(trimmed))
        .flatten()
    {
        CellKind::Date { month, day }
    } else if let Some(n) = parse_with(trimmed, profile.decimal_sep, profile.group_sep) {
        CellKind::Number(n)
    } else {
        CellKind::Text(cell.to_string())
    };
    let corrupted = kind != ground_truth(cell);
    CoercedValue { kind, corrupted }
}

/// How one cell fared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hazard {
    CoercedToDate,
    MisreadNumber,
    TextFallback,
    Clean,
}

pub fn classify<T: DecimalScalar>(
    cell: &str,
    profile: &LocaleProfile,
) -> (Hazard, CoercedValue<T>) {
    let coerced = simulate_open::<T>(cell, profile);
    let hazard = match (&coerced.kind, ground_truth::<T>(cell)) {
        (CellKind::Date { .. }, _) => Hazard::CoercedToDate,
        (CellKind::Text(_), CellKind::Number(_)) => Hazard::TextFallback,
        (CellKind::Number(_), _) if coerced.corrupted => Hazard::MisreadNumber,
        // Text read as a number (never happens with the supported grammars)
        // is still a misread.
        (_, _) if coerced.corrupted => Hazard::MisreadNumber,
        _ => Hazard::Clean,
    };
    (hazard, coerced)
}

/// A date-coerced cell. Its original text cannot be recovered from the
/// spreadsheet, so it is kept here verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateLoss {
    pub row: usize,
    pub original: String,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDetail {
    pub row: usize,
    pub text: String,
    pub hazard: Hazard,
    pub opened_as: CellKind<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ColumnHazards {
    pub column: String,
    pub coerced_to_date: usize,
    pub misread_number: usize,
    pub text_fallback: usize,
    pub clean: usize,
    pub date_rows: Vec<usize>,
    pub misread_rows: Vec<usize>,
    pub text_rows: Vec<usize>,
    /// Some cell that is a number in truth would open as text, so `+1`
    /// arithmetic on the column fails.
    pub arithmetic_unsafe: bool,
    pub date_losses: Vec<DateLoss>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellDetail>,
}

impl ColumnHazards {
    pub fn total(&self) -> usize {
        self.coerced_to_date + self.misread_number + self.text_fallback + self.clean
    }

    /// Whether any cell would be altered by the open.
    pub fn hazardous(&self) -> bool {
        self.coerced_to_date + self.misread_number + self.text_fallback > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardReport {
    pub profile: String,
    pub columns: Vec<ColumnHazards>,
}

impl HazardReport {
    pub fn column(&self, name: &str) -> Option<&ColumnHazards> {
        self.columns.iter().find(|c| c.column == name)
    }

    /// Tallies per column name, for order-independent comparison.
    pub fn tallies(&self) -> BTreeMap<&str, [usize; 4]> {
        self.columns
            .iter()
            .map(|c| {
                (
                    c.column.as_str(),
                    [
                        c.coerced_to_date,
                        c.misread_number,
                        c.text_fallback,
                        c.clean,
                    ],
                )
            })
            .collect()
    }
}

/// Runs [`simulate_open`] on every cell and tallies the outcome per column.
/// `detail` adds a per-cell listing.
pub fn hazard_report<G: CellTable + ?Sized>(
    table: &G,
    profile: &LocaleProfile,
    detail: bool,
) -> HazardReport {
    let columns = (0..table.column_count())
        .map(|col| {
            let mut h = ColumnHazards {
                column: table.display_label(col),
                ..ColumnHazards::default()
            };
            for row in 0..table.row_count() {
                let text = table.cell_text(row, col);
                let (hazard, coerced) = classify::<f64>(&text, profile);
                match hazard {
                    Hazard::CoercedToDate => {
                        h.coerced_to_date += 1;
                        h.date_rows.push(row);
                        h.date_losses.push(DateLoss {
                            row,
                            original: text.to_string(),
                            rendered: coerced.kind.render_date(profile).unwrap_or_default(),
                        });
                    }
                    Hazard::MisreadNumber => {
                        h.misread_number += 1;
                        h.misread_rows.push(row);
                    }
                    Hazard::TextFallback => {
                        h.text_fallback += 1;
                        h.text_rows.push(row);
                        h.arithmetic_unsafe = true;
                    }
                    Hazard::Clean => h.clean += 1,
                }
                if detail {
                    h.cells.push(CellDetail {
                        row,
                        text: text.to_string(),
                        hazard,
                        opened_as: coerced.kind,
                    });
                }
            }
            h
        })
        .collect();
    HazardReport {
        profile: profile.name.clone(),
        columns,
    }
}
