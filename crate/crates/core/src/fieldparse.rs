//! Parsers for composite fields: vote pairs, `user (server)`, `k`-suffixed
//! counts and the four relative-time forms.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridkit::StagedTable;
use crate::scalar::{round_exact, DecimalScalar};
use crate::Exact;

pub const VOTE_SEPARATOR: &str = " | ";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("malformed votes {0:?}")]
    MalformedVotes(String),
    #[error("malformed user/server {0:?}")]
    MalformedUserServer(String),
    #[error("malformed magnitude {0:?}")]
    MalformedMagnitude(String),
    #[error("unrecognized time form {0:?}")]
    UnrecognizedTimeForm(String),
    #[error("not an integer: {0:?}")]
    NotAnInteger(String),
    #[error("missing field {0:?}")]
    MissingField(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTriple {
    pub positive: u64,
    pub negative: u64,
    /// Always `positive - negative`.
    pub total: i64,
}

impl VoteTriple {
    pub fn new(positive: u64, negative: u64) -> Self {
        VoteTriple {
            positive,
            negative,
            total: positive as i64 - negative as i64,
        }
    }
}

fn digits(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses a plain non-negative integer such as a comment count.
pub fn parse_count(raw: &str) -> Result<u64, FieldError> {
    digits(raw).ok_or_else(|| FieldError::NotAnInteger(raw.to_string()))
}

/// Splits `"56 | 2"` into positive and negative votes.
pub fn split_votes(raw: &str) -> Result<VoteTriple, FieldError> {
    let bad = || FieldError::MalformedVotes(raw.to_string());
    let trimmed = raw.trim_matches(' ');
    let (left, right) = trimmed.split_once(VOTE_SEPARATOR).ok_or_else(bad)?;
    if right.contains(VOTE_SEPARATOR) {
        return Err(bad());
    }
    let positive = digits(left).ok_or_else(bad)?;
    let negative = digits(right).ok_or_else(bad)?;
    Ok(VoteTriple::new(positive, negative))
}

/// Splits `"Kanzler (NA)"` at the first `(`.
///
/// A username that itself contains `(` is split there.
pub fn split_user_server(raw: &str) -> Result<(String, String), FieldError> {
    let bad = || FieldError::MalformedUserServer(raw.to_string());
    let open = raw.find('(').ok_or_else(bad)?;
    let close = raw[open..].find(')').ok_or_else(bad)? + open;
    let server = &raw[open + 1..close];
    if server.trim().is_empty() {
        return Err(bad());
    }
    let user = raw[..open].trim_end_matches([' ', '\u{a0}']);
    Ok((user.to_string(), server.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MagnitudeSuffix {
    pub suffix: String,
    pub multiplier: u64,
}

/// Display suffixes such as `k` = 1000.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MagnitudeSuffixTable {
    pub suffixes: Vec<MagnitudeSuffix>,
}

impl Default for MagnitudeSuffixTable {
    fn default() -> Self {
        MagnitudeSuffixTable {
            suffixes: vec![MagnitudeSuffix {
                suffix: "k".to_string(),
                multiplier: 1000,
            }],
        }
    }
}

impl MagnitudeSuffixTable {
    pub fn validate(&self) -> Result<(), String> {
        for s in &self.suffixes {
            if s.suffix.is_empty() || s.suffix.bytes().any(|b| b.is_ascii_digit() || b == b'.') {
                return Err(format!("invalid magnitude suffix {:?}", s.suffix));
            }
            if s.multiplier < 1 {
                return Err(format!("multiplier for {:?} must be at least 1", s.suffix));
            }
        }
        Ok(())
    }
}

/// Exact value of `"6.4k"`-style text: digits, at most one decimal point,
/// optionally one suffix from `table` at the very end.
pub fn magnitude_value<T: DecimalScalar>(
    raw: &str,
    table: &MagnitudeSuffixTable,
) -> Result<T, FieldError> {
    let bad = || FieldError::MalformedMagnitude(raw.to_string());
    let mut suffixes: Vec<&MagnitudeSuffix> = table.suffixes.iter().collect();
    suffixes.sort_by_key(|s| std::cmp::Reverse(s.suffix.len()));
    let (number, multiplier) = suffixes
        .iter()
        .find_map(|s| {
            raw.strip_suffix(s.suffix.as_str())
                .map(|n| (n, s.multiplier))
        })
        .unwrap_or((raw, 1));
    let (int, frac) = match number.split_once('.') {
        Some((int, frac)) if !frac.is_empty() => (int, frac),
        Some(_) => return Err(bad()),
        None => (number, ""),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.len() + frac.len() == 0 || !all_digits(int) || !all_digits(frac) {
        return Err(bad());
    }
    Ok(T::from_decimal(false, int, frac).scaled(multiplier))
}

/// [`magnitude_value`] rounded to the nearest integer (ties away from zero).
pub fn parse_magnitude(raw: &str, table: &MagnitudeSuffixTable) -> Result<u64, FieldError> {
    let exact: Exact = magnitude_value(raw, table)?;
    round_exact(&exact)
        .to_u64()
        .ok_or_else(|| FieldError::MalformedMagnitude(raw.to_string()))
}

/// The time side of a source/time stage: still text, or resolved to hours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeState {
    Text(String),
    Hours(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceTimeStage {
    pub source: String,
    pub time: TimeState,
}

/// The four sequential rewrites of a source/time field, one per time form:
/// "about an hour ago", "a day ago", "about N hours ago", "N days ago".
/// Once a stage resolves the time, later stages pass it through.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagedSourceTime {
    pub stages: [SourceTimeStage; 4],
}

/// `"<source> <phrase>"` or exactly `<phrase>`; returns the source.
fn strip_phrase<'a>(text: &'a str, phrase: &str) -> Option<&'a str> {
    if text == phrase {
        return Some("");
    }
    text.strip_suffix(phrase)?.strip_suffix(' ')
}

fn strip_counted<'a>(
    text: &'a str,
    lead: Option<&str>,
    tail: &str,
    max_digits: usize,
) -> Option<(&'a str, u32)> {
    let head = text.strip_suffix(tail)?;
    let (before, n) = match head.rsplit_once(' ') {
        Some((before, n)) => (Some(before), n),
        None => (None, head),
    };
    if n.len() > max_digits {
        return None;
    }
    let n = digits(n).filter(|&n| n >= 1)? as u32;
    let source = match (lead, before) {
        (Some(lead), Some(before)) => strip_phrase(before, lead)?,
        (Some(_), None) => return None,
        (None, Some(before)) => before,
        (None, None) => "",
    };
    Some((source, n))
}

fn stage(prev: &SourceTimeStage, rewrite: impl Fn(&str) -> Option<(&str, u32)>) -> SourceTimeStage {
    match &prev.time {
        TimeState::Hours(_) => prev.clone(),
        TimeState::Text(_) => match rewrite(&prev.source) {
            Some((source, hours)) => SourceTimeStage {
                source: source.to_string(),
                time: TimeState::Hours(hours),
            },
            None => prev.clone(),
        },
    }
}

pub fn trace_source_time(raw: &str) -> StagedSourceTime {
    let start = SourceTimeStage {
        source: raw.to_string(),
        time: TimeState::Text(raw.to_string()),
    };
    let s1 = stage(&start, |t| {
        strip_phrase(t, "about an hour ago").map(|s| (s, 1))
    });
    let s2 = stage(&s1, |t| strip_phrase(t, "a day ago").map(|s| (s, 24)));
    let s3 = stage(&s2, |t| strip_counted(t, Some("about"), " hours ago", 2));
    let s4 = stage(&s3, |t| {
        strip_counted(t, None, " days ago", 1).map(|(s, n)| (s, 24 * n))
    });
    StagedSourceTime {
        stages: [s1, s2, s3, s4],
    }
}

/// Separates the source from its relative time and converts the time to
/// hours. A leading `"in "` on the source is dropped.
pub fn split_source_time(raw: &str) -> Result<(String, u32), FieldError> {
    let [.., last] = trace_source_time(raw).stages;
    match last.time {
        TimeState::Hours(hours) => {
            let source = last.source.strip_prefix("in ").unwrap_or(&last.source);
            Ok((source.to_string(), hours))
        }
        TimeState::Text(_) => Err(FieldError::UnrecognizedTimeForm(raw.to_string())),
    }
}

/// Field names of a fully normalized board table.
pub mod fields {
    pub const POSITIVE: &str = "Npositive";
    pub const NEGATIVE: &str = "Nnegative";
    pub const VOTES: &str = "Nvotes";
    pub const TITLE: &str = "Ntitle";
    pub const USER: &str = "Nuser";
    pub const SERVER: &str = "Nserver";
    pub const SOURCE: &str = "Nsource";
    pub const TIME: &str = "Ntime";
    pub const CATEGORY: &str = "Ncategory";
    pub const NEW_COMMENTS: &str = "Nnewcomments";
    pub const VIEWS: &str = "Nviews";

    pub const ALL: [&str; 11] = [
        POSITIVE,
        NEGATIVE,
        VOTES,
        TITLE,
        USER,
        SERVER,
        SOURCE,
        TIME,
        CATEGORY,
        NEW_COMMENTS,
        VIEWS,
    ];
}

/// One fully typed board record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedRecord {
    pub votes: VoteTriple,
    pub title: String,
    pub user: String,
    pub server: String,
    pub source: String,
    pub time_hours: u32,
    pub category: String,
    pub new_comments: u64,
    pub views: u64,
}

impl NormalizedRecord {
    /// Field values in [`fields::ALL`] order.
    pub fn values(&self) -> Vec<String> {
        vec![
            self.votes.positive.to_string(),
            self.votes.negative.to_string(),
            self.votes.total.to_string(),
            self.title.clone(),
            self.user.clone(),
            self.server.clone(),
            self.source.clone(),
            self.time_hours.to_string(),
            self.category.clone(),
            self.new_comments.to_string(),
            self.views.to_string(),
        ]
    }

    /// Reads typed records back from a table holding every [`fields::ALL`]
    /// column (in any order).
    pub fn from_table(table: &StagedTable) -> Result<Vec<NormalizedRecord>, FieldError> {
        let idx = |name: &str| {
            table
                .field_index(name)
                .ok_or_else(|| FieldError::MissingField(name.to_string()))
        };
        let cols: Vec<usize> = fields::ALL
            .iter()
            .map(|n| idx(n))
            .collect::<Result<_, _>>()?;
        table
            .rows
            .iter()
            .map(|row| {
                let get = |i: usize| row[cols[i]].as_str();
                let positive = parse_count(get(0))?;
                let negative = parse_count(get(1))?;
                let votes = VoteTriple::new(positive, negative);
                let total: i64 = get(2)
                    .parse()
                    .map_err(|_| FieldError::NotAnInteger(get(2).to_string()))?;
                if total != votes.total {
                    return Err(FieldError::MalformedVotes(format!(
                        "{positive} | {negative} with total {total}"
                    )));
                }
                let time_hours = parse_count(get(7))? as u32;
                if time_hours < 1 {
                    return Err(FieldError::UnrecognizedTimeForm(get(7).to_string()));
                }
                if get(5).is_empty() {
                    return Err(FieldError::MalformedUserServer(get(5).to_string()));
                }
                Ok(NormalizedRecord {
                    votes,
                    title: get(3).to_string(),
                    user: get(4).to_string(),
                    server: get(5).to_string(),
                    source: get(6).to_string(),
                    time_hours,
                    category: get(8).to_string(),
                    new_comments: parse_count(get(9))?,
                    views: parse_count(get(10))?,
                })
            })
            .collect()
    }

    pub fn to_table(records: &[NormalizedRecord]) -> StagedTable {
        StagedTable::new(
            fields::ALL.iter().map(|s| s.to_string()).collect(),
            records.iter().map(NormalizedRecord::values).collect(),
        )
    }
}
