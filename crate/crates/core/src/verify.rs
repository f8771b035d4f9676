//! Mismatch counting, cross-field consistency checks and the run report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cleanse::{RedundancyOutcome, ReplaceOutcome};
use crate::fieldparse::NormalizedRecord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("empty needle")]
    EmptyNeedle,
    #[error("{records} records but {totals} staged totals")]
    LengthMismatch { records: usize, totals: usize },
}

/// Rows of a column that failed a test, with their text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MismatchVector {
    pub column: String,
    /// `None` for the integer-conversion test.
    pub needle: Option<String>,
    pub failing_rows: Vec<usize>,
    pub failing_text: Vec<String>,
    pub count: usize,
}

impl MismatchVector {
    fn collect(
        column: &str,
        needle: Option<&str>,
        cells: &[String],
        fails: impl Fn(&str) -> bool,
    ) -> Self {
        let (failing_rows, failing_text): (Vec<usize>, Vec<String>) = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| fails(c))
            .map(|(i, c)| (i, c.clone()))
            .unzip();
        MismatchVector {
            column: column.to_string(),
            needle: needle.map(str::to_string),
            count: failing_rows.len(),
            failing_rows,
            failing_text,
        }
    }
}

/// Rows whose cell does not contain `needle` (case-sensitive).
pub fn count_mismatches(
    column: &str,
    cells: &[String],
    needle: &str,
) -> Result<MismatchVector, VerifyError> {
    if needle.is_empty() {
        return Err(VerifyError::EmptyNeedle);
    }
    Ok(MismatchVector::collect(column, Some(needle), cells, |c| {
        !c.contains(needle)
    }))
}

pub fn is_plain_integer(cell: &str) -> bool {
    let digits = cell.strip_prefix('-').unwrap_or(cell);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Rows that do not parse as plain integers.
pub fn flag_convert_failures(column: &str, cells: &[String]) -> MismatchVector {
    MismatchVector::collect(column, None, cells, |c| !is_plain_integer(c))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteViolation {
    pub row: usize,
    pub positive: u64,
    pub negative: u64,
    pub staged_total: i64,
}

/// Checks `positive - negative` against independently staged totals.
pub fn check_vote_totals(
    votes: &[(u64, u64)],
    staged_totals: &[i64],
) -> Result<Vec<VoteViolation>, VerifyError> {
    if votes.len() != staged_totals.len() {
        return Err(VerifyError::LengthMismatch {
            records: votes.len(),
            totals: staged_totals.len(),
        });
    }
    Ok(votes
        .iter()
        .zip(staged_totals)
        .enumerate()
        .filter(|(_, (&(p, n), &t))| p as i64 - n as i64 != t)
        .map(
            |(row, (&(positive, negative), &staged_total))| VoteViolation {
                row,
                positive,
                negative,
                staged_total,
            },
        )
        .collect())
}

pub fn check_votes(
    records: &[NormalizedRecord],
    staged_totals: &[i64],
) -> Result<Vec<VoteViolation>, VerifyError> {
    let votes: Vec<(u64, u64)> = records
        .iter()
        .map(|r| (r.votes.positive, r.votes.negative))
        .collect();
    check_vote_totals(&votes, staged_totals)
}

/// One line per failing row, in row order.
pub fn highlight(vec: &MismatchVector) -> String {
    if vec.failing_rows.is_empty() {
        return "no mismatches".to_string();
    }
    vec.failing_rows
        .iter()
        .zip(&vec.failing_text)
        .map(|(row, text)| format!("row {row}: {text}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// What a step recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepOutcome {
    /// A transformation with nothing to verify.
    Applied {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        detail: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        changes: Option<usize>,
    },
    Replace(ReplaceOutcome),
    Redundancy(RedundancyOutcome),
    Mismatch {
        #[serde(flatten)]
        vector: MismatchVector,
        expected: usize,
    },
    Votes {
        violations: Vec<VoteViolation>,
    },
    /// Records where both the primary and the fallback column were blank.
    Regroup {
        records: usize,
        empty_both: Vec<crate::gridkit::EmptyBoth>,
    },
}

impl StepOutcome {
    pub fn is_pass(&self) -> bool {
        match self {
            StepOutcome::Applied { .. } | StepOutcome::Regroup { .. } => true,
            StepOutcome::Replace(r) => r.verdict.is_pass(),
            StepOutcome::Redundancy(r) => r.pass,
            StepOutcome::Mismatch { vector, expected } => vector.count == *expected,
            StepOutcome::Votes { violations } => violations.is_empty(),
        }
    }

    /// The rows to show for a failing or informational check.
    pub fn listing(&self) -> Option<String> {
        match self {
            StepOutcome::Mismatch { vector, .. } => Some(highlight(vector)),
            StepOutcome::Votes { violations } if violations.is_empty() => {
                Some("no mismatches".into())
            }
            StepOutcome::Votes { violations } => Some(
                violations
                    .iter()
                    .map(|v| {
                        format!(
                            "row {}: {} - {} != {}",
                            v.row, v.positive, v.negative, v.staged_total
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n"),
            ),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: String,
    pub verdict: Verdict,
    #[serde(flatten)]
    pub outcome: StepOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    pub steps: Vec<StepRecord>,
    pub overall: Verdict,
}

impl Default for CleanReport {
    fn default() -> Self {
        CleanReport {
            steps: Vec::new(),
            overall: Verdict::Pass,
        }
    }
}

impl CleanReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: impl Into<String>, outcome: StepOutcome) -> Verdict {
        let verdict = Verdict::from_pass(outcome.is_pass());
        if !verdict.is_pass() {
            self.overall = Verdict::Fail;
        }
        self.steps.push(StepRecord {
            step: step.into(),
            verdict,
            outcome,
        });
        verdict
    }

    pub fn passed(&self) -> bool {
        self.overall.is_pass()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn mismatches() {
        let cats = col(&["Rioter 5 Comments", "Rioter 1 Comment", "x 2 Comments"]);
        let v = count_mismatches("Rcategory", &cats, " Comments").unwrap();
        assert_eq!(v.count, 1);
        assert_eq!(v.failing_rows, vec![1]);
        let stripped = col(&["Rioter", "Rioter", "x"]);
        assert_eq!(
            count_mismatches("c", &stripped, " Comment").unwrap().count,
            3
        );
        assert_eq!(count_mismatches("c", &[], " Comment").unwrap().count, 0);
        assert_eq!(
            count_mismatches("c", &[], ""),
            Err(VerifyError::EmptyNeedle)
        );
    }

    #[test]
    fn convert_failures() {
        let v = flag_convert_failures("n", &col(&["51", "20", "1 new Comment"]));
        assert_eq!(v.failing_rows, vec![2]);
        assert!(flag_convert_failures("n", &col(&["1", "-2", "30"]))
            .failing_rows
            .is_empty());
        assert_eq!(
            flag_convert_failures("n", &col(&["6.4k"])).failing_rows,
            vec![0]
        );
    }

    #[test]
    fn vote_totals() {
        assert!(check_vote_totals(&[(56, 2), (72, 2)], &[54, 70])
            .unwrap()
            .is_empty());
        let v = check_vote_totals(&[(10, 3)], &[8]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].row, 0);
        assert!(check_vote_totals(&[(1, 1)], &[]).is_err());
    }

    #[test]
    fn highlight_listing() {
        let mut v = MismatchVector::collect("c", None, &col(&["a", "b", "c"]), |_| true);
        assert_eq!(highlight(&v), "row 0: a\nrow 1: b\nrow 2: c");
        v = MismatchVector::collect("c", None, &col(&["a"]), |_| false);
        assert_eq!(highlight(&v), "no mismatches");
    }

    #[test]
    fn report_overall() {
        let mut r = CleanReport::new();
        assert!(r.passed());
        r.push(
            "a",
            StepOutcome::Applied {
                detail: None,
                changes: None,
            },
        );
        assert!(r.passed());
        r.push(
            "b",
            StepOutcome::Votes {
                violations: vec![VoteViolation {
                    row: 0,
                    positive: 1,
                    negative: 0,
                    staged_total: 0,
                }],
            },
        );
        assert!(!r.passed());
        r.push(
            "c",
            StepOutcome::Applied {
                detail: None,
                changes: None,
            },
        );
        assert!(!r.passed());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"overall\":\"fail\""));
    }
}
