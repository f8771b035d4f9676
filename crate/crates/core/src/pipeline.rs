//! Declarative pipelines: a JSON document naming the input, the table
//! selector and an ordered list of steps, executed against one document.
//!
//! Steps before `regroup` operate on the raw grid, steps after it on the
//! staged one-row-per-record table. Every step appends to a
//! [`CleanReport`]; a step that errors aborts the run and the partial report
//! records where.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cleanse::{
    collapse_separators, replace_literal, strip_edge_whitespace, strip_redundancy,
    unescape_literal, CleanseError, EdgeMode, ReplaceSpec, Scope,
};
use crate::emit::{render_table, write_atomic, EmitError, TableFormat};
use crate::fieldparse::{
    fields, parse_count, parse_magnitude, split_source_time, split_user_server, split_votes,
    FieldError, MagnitudeSuffixTable, NormalizedRecord,
};
use crate::gridkit::{self, FieldMap, GridError, StagedTable};
use crate::ingest::{
    extract_grid, load_document, strip_decor, ExtractionReport, IngestError, LoadOptions, Origin,
    RawDocument, RawGrid, TableSelector,
};
use crate::localeguard::{hazard_report, HazardReport, LocaleProfile};
use crate::table::{CellTable, ColumnRef};
use crate::verify::{
    check_votes, count_mismatches, flag_convert_failures, CleanReport, StepOutcome, Verdict,
    VerifyError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("reading pipeline config {path}: {reason}")]
    ConfigRead { path: String, reason: String },
    #[error("invalid pipeline config: {0}")]
    ConfigInvalid(String),
    #[error("writing output: {0}")]
    Write(#[from] EmitError),
}

fn invalid(reason: impl Into<String>) -> PipelineError {
    PipelineError::ConfigInvalid(reason.into())
}

/// Errors raised inside a step; they abort the run.
#[derive(Debug, Error)]
pub enum StepError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Cleanse(#[from] CleanseError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{0}")]
    State(String),
}

/// An expected count: a number, or `"records"` for the current row count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    Count(usize),
    Keyword(CountKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKeyword {
    Records,
}

impl Expected {
    pub fn resolve(self, rows: usize) -> usize {
        match self {
            Expected::Count(n) => n,
            Expected::Keyword(CountKeyword::Records) => rows,
        }
    }
}

/// A regroup field: like [`FieldMap`], with columns given by index or label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    pub offset: usize,
    pub column: ColumnRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<ColumnRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldParser {
    /// `"56 | 2"` into positive, negative and total.
    Votes,
    /// `"Kanzler (NA)"` into user and server.
    UserServer,
    /// `"in Memes & Games about 20 hours ago"` into source and hours.
    SourceTime,
    /// `"6.4k"` into `6400`.
    Magnitude,
    Integer,
    /// Keeps the text; with `into`, renames the field.
    Text,
}

impl FieldParser {
    fn default_outputs(self, field: &str) -> Vec<String> {
        let names: &[&str] = match self {
            FieldParser::Votes => &[fields::POSITIVE, fields::NEGATIVE, fields::VOTES],
            FieldParser::UserServer => &[fields::USER, fields::SERVER],
            FieldParser::SourceTime => &[fields::SOURCE, fields::TIME],
            _ => &[field],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    fn arity(self) -> usize {
        match self {
            FieldParser::Votes => 3,
            FieldParser::UserServer | FieldParser::SourceTime => 2,
            _ => 1,
        }
    }

    fn apply(
        self,
        value: &str,
        suffixes: &MagnitudeSuffixTable,
    ) -> Result<Vec<String>, FieldError> {
        Ok(match self {
            FieldParser::Votes => {
                let v = split_votes(value)?;
                vec![
                    v.positive.to_string(),
                    v.negative.to_string(),
                    v.total.to_string(),
                ]
            }
            FieldParser::UserServer => {
                let (user, server) = split_user_server(value)?;
                vec![user, server]
            }
            FieldParser::SourceTime => {
                let (source, hours) = split_source_time(value)?;
                vec![source, hours.to_string()]
            }
            FieldParser::Magnitude => vec![parse_magnitude(value, suffixes)?.to_string()],
            FieldParser::Integer => vec![parse_count(value)?.to_string()],
            FieldParser::Text => vec![value.to_string()],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Rows whose cell lacks `needle`.
    Contains { needle: String },
    /// Rows that are not plain integers.
    Convert,
    /// Vote totals of the typed records against a staged total field.
    Votes { staged: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    /// Deletes raw rows `start..end`.
    DeleteRows {
        start: usize,
        end: usize,
    },
    /// Output column `i` is input column `permutation[i]`.
    ReorderColumns {
        permutation: Vec<usize>,
    },
    StripDecor,
    /// One row per paragraph: each raw row becomes `k` rows.
    SpreadSegments {
        k: usize,
    },
    Regroup {
        k: usize,
        fields: Vec<FieldSpec>,
    },
    Replace {
        find: String,
        #[serde(default)]
        replace: String,
        #[serde(default)]
        scope: Scope,
        #[serde(default)]
        expected_count: Option<Expected>,
    },
    Collapse {
        separator: String,
    },
    StripEdges {
        mode: EdgeMode,
    },
    StripRedundancy {
        field: String,
        plural: String,
        singular: String,
        expected_total: Expected,
    },
    ParseField {
        field: String,
        parser: FieldParser,
        #[serde(default)]
        into: Option<Vec<String>>,
        #[serde(default)]
        suffixes: Option<MagnitudeSuffixTable>,
    },
    Verify {
        check: Check,
        #[serde(default)]
        field: Option<String>,
        #[serde(default)]
        expect: Option<Expected>,
    },
    DropFields {
        fields: Vec<String>,
    },
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::DeleteRows { .. } => "delete_rows",
            Step::ReorderColumns { .. } => "reorder_columns",
            Step::StripDecor => "strip_decor",
            Step::SpreadSegments { .. } => "spread_segments",
            Step::Regroup { .. } => "regroup",
            Step::Replace { .. } => "replace",
            Step::Collapse { .. } => "collapse",
            Step::StripEdges { .. } => "strip_edges",
            Step::StripRedundancy { .. } => "strip_redundancy",
            Step::ParseField { .. } => "parse_field",
            Step::Verify { .. } => "verify",
            Step::DropFields { .. } => "drop_fields",
        }
    }

    /// Label used in reports: position and operation.
    pub fn label(&self, index: usize) -> String {
        let detail = match self {
            Step::StripRedundancy { field, .. }
            | Step::ParseField { field, .. }
            | Step::Verify {
                field: Some(field), ..
            } => format!(" {field}"),
            Step::Replace {
                scope: Scope::Column(c),
                ..
            } => format!(" {c}"),
            _ => String::new(),
        };
        format!("{}:{}{}", index + 1, self.name(), detail)
    }

    fn grid_only(&self) -> bool {
        matches!(
            self,
            Step::DeleteRows { .. }
                | Step::ReorderColumns { .. }
                | Step::StripDecor
                | Step::SpreadSegments { .. }
                | Step::Regroup { .. }
        )
    }

    fn staged_only(&self) -> bool {
        matches!(
            self,
            Step::StripRedundancy { .. }
                | Step::ParseField { .. }
                | Step::Verify { .. }
                | Step::DropFields { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: TableFormat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// File path (relative to the config file) or http(s) URL.
    #[serde(default)]
    pub input: Option<String>,
    #[serde(default)]
    pub selector: TableSelector,
    #[serde(default)]
    pub steps: Vec<Step>,
    /// Name of a built-in locale profile to scan the extracted grid with.
    #[serde(default)]
    pub locale_scan: Option<String>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub report: Option<PathBuf>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_json(json: &str, base_dir: impl Into<PathBuf>) -> Result<Self, PipelineError> {
        let mut config: PipelineConfig =
            serde_json::from_str(json).map_err(|e| invalid(e.to_string()))?;
        config.base_dir = base_dir.into();
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, PipelineError> {
        let json = std::fs::read_to_string(path).map_err(|e| PipelineError::ConfigRead {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&json, base)
    }

    fn resolve_path(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn input_origin(&self) -> Option<Origin> {
        self.input.as_deref().map(|raw| match Origin::parse(raw) {
            Origin::File(p) => Origin::File(self.resolve_path(&p)),
            url => url,
        })
    }

    /// Checks step order and field references without touching the input.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if let Some(name) = &self.locale_scan {
            LocaleProfile::builtin(name).map_err(|e| invalid(e.to_string()))?;
        }
        // `None` until regroup names the fields.
        let mut names: Option<Vec<String>> = None;
        let need = |names: &[String], field: &str, step: &str| {
            if names.iter().any(|n| n == field) {
                Ok(())
            } else {
                Err(invalid(format!("{step}: unknown field {field:?}")))
            }
        };
        for (i, step) in self.steps.iter().enumerate() {
            let label = step.label(i);
            validate_literals(step, &label)?;
            if names.is_some() && step.grid_only() {
                let what = if matches!(step, Step::Regroup { .. }) {
                    "regroup may appear only once"
                } else {
                    "only allowed before regroup"
                };
                return Err(invalid(format!("{label}: {what}")));
            }
            let Some(current) = names.as_mut() else {
                if step.staged_only() {
                    return Err(invalid(format!("{label}: only allowed after regroup")));
                }
                match step {
                    Step::DeleteRows { start, end } if start > end => {
                        return Err(invalid(format!("{label}: start {start} is past end {end}")));
                    }
                    Step::SpreadSegments { k: 0 } | Step::Regroup { k: 0, .. } => {
                        return Err(invalid(format!("{label}: k must be at least 1")));
                    }
                    Step::Regroup { k, fields } => {
                        let mut seen = Vec::new();
                        for f in fields {
                            if f.offset >= *k {
                                return Err(invalid(format!(
                                    "{label}: field {:?} offset {} is not below k = {k}",
                                    f.name, f.offset
                                )));
                            }
                            if seen.contains(&f.name) {
                                return Err(invalid(format!(
                                    "{label}: duplicate field {:?}",
                                    f.name
                                )));
                            }
                            seen.push(f.name.clone());
                        }
                        names = Some(seen);
                    }
                    _ => {}
                }
                continue;
            };
            match step {
                Step::Replace {
                    scope: Scope::Column(ColumnRef::Name(field)),
                    ..
                } => need(current, field, &label)?,
                Step::Replace {
                    scope: Scope::Column(ColumnRef::Index(c)),
                    ..
                } if *c >= current.len() => {
                    return Err(invalid(format!("{label}: column {c} out of range")));
                }
                Step::StripRedundancy { field, .. } => need(current, field, &label)?,
                Step::ParseField {
                    field,
                    parser,
                    into,
                    suffixes,
                } => {
                    need(current, field, &label)?;
                    let outputs = into
                        .clone()
                        .unwrap_or_else(|| parser.default_outputs(field));
                    if outputs.len() != parser.arity() {
                        return Err(invalid(format!(
                            "{label}: parser yields {} fields but {} names given",
                            parser.arity(),
                            outputs.len()
                        )));
                    }
                    if let Some(table) = suffixes {
                        table
                            .validate()
                            .map_err(|e| invalid(format!("{label}: {e}")))?;
                    }
                    let at = current.iter().position(|n| n == field).unwrap_or(0);
                    current.remove(at);
                    for out in &outputs {
                        if current.contains(out) {
                            return Err(invalid(format!("{label}: field {out:?} already exists")));
                        }
                    }
                    current.splice(at..at, outputs);
                }
                Step::Verify { check, field, .. } => match (check, field) {
                    (Check::Votes { staged }, _) => {
                        need(current, staged, &label)?;
                        for f in [fields::POSITIVE, fields::NEGATIVE] {
                            need(current, f, &label)?;
                        }
                    }
                    (_, Some(field)) => need(current, field, &label)?,
                    (_, None) => return Err(invalid(format!("{label}: check needs a field"))),
                },
                Step::DropFields { fields } => {
                    for f in fields {
                        need(current, f, &label)?;
                        current.retain(|n| n != f);
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn validate_literals(step: &Step, label: &str) -> Result<(), PipelineError> {
    let check = |raw: &str| {
        unescape_literal(raw)
            .map(drop)
            .map_err(|e| invalid(format!("{label}: {e}")))
    };
    let non_empty = |raw: &str, what: &str| {
        if raw.is_empty() {
            Err(invalid(format!("{label}: empty {what}")))
        } else {
            check(raw)
        }
    };
    match step {
        Step::Replace { find, replace, .. } => {
            non_empty(find, "find string")?;
            check(replace)
        }
        Step::Collapse { separator } => non_empty(separator, "separator"),
        Step::Verify {
            check: Check::Contains { needle },
            ..
        } => non_empty(needle, "needle"),
        Step::StripRedundancy {
            plural, singular, ..
        } => {
            non_empty(plural, "plural suffix")?;
            non_empty(singular, "singular suffix")
        }
        _ => Ok(()),
    }
}

/// Where and why a run stopped early.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abort {
    pub step: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputShape {
    pub records: usize,
    pub fields: Vec<String>,
}

/// Everything a run reports. Holds no paths or timestamps, so reruns on the
/// same input are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub selector: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extraction: Option<ExtractionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hazards: Option<HazardReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputShape>,
    pub clean: CleanReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort: Option<Abort>,
    pub overall: Verdict,
}

impl RunReport {
    fn new(selector: &TableSelector) -> Self {
        RunReport {
            selector: selector.to_string(),
            extraction: None,
            hazards: None,
            output: None,
            clean: CleanReport::new(),
            abort: None,
            overall: Verdict::Pass,
        }
    }

    fn abort(&mut self, step: impl Into<String>, error: impl ToString) {
        self.abort = Some(Abort {
            step: step.into(),
            error: error.to_string(),
        });
        self.overall = Verdict::Fail;
    }

    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("report serializes");
        json.push('\n');
        json
    }
}

/// Result of running the steps in memory.
#[derive(Debug, Clone)]
pub struct Execution {
    pub report: RunReport,
    /// `None` when the run aborted.
    pub table: Option<StagedTable>,
}

enum Work {
    Grid(RawGrid),
    Staged(StagedTable),
}

macro_rules! on_table {
    ($work:expr, |$t:ident| $body:expr) => {
        match $work {
            Work::Grid($t) => {
                let (t, out) = $body;
                (Work::Grid(t), out)
            }
            Work::Staged($t) => {
                let (t, out) = $body;
                (Work::Staged(t), out)
            }
        }
    };
}

impl Work {
    fn rows(&self) -> usize {
        match self {
            Work::Grid(g) => g.row_count(),
            Work::Staged(t) => t.record_count(),
        }
    }

    fn grid(self) -> Result<RawGrid, StepError> {
        match self {
            Work::Grid(g) => Ok(g),
            Work::Staged(_) => Err(StepError::State("step needs the raw grid".into())),
        }
    }

    fn staged(self) -> Result<StagedTable, StepError> {
        match self {
            Work::Staged(t) => Ok(t),
            Work::Grid(_) => Err(StepError::State("step needs a regrouped table".into())),
        }
    }

    fn into_table(self) -> StagedTable {
        match self {
            Work::Grid(g) => StagedTable::from_grid(&g),
            Work::Staged(t) => t,
        }
    }
}

fn field_index(table: &StagedTable, field: &str) -> Result<usize, StepError> {
    table
        .field_index(field)
        .ok_or_else(|| StepError::Field(FieldError::MissingField(field.to_string())))
}

fn applied(detail: Option<String>, changes: Option<usize>) -> StepOutcome {
    StepOutcome::Applied { detail, changes }
}

fn run_step(work: Work, step: &Step) -> Result<(Work, StepOutcome), StepError> {
    Ok(match step {
        Step::DeleteRows { start, end } => {
            let grid = gridkit::delete_rows(&work.grid()?, *start..*end)?;
            (
                Work::Grid(grid),
                applied(Some("rows deleted".into()), Some(end - start)),
            )
        }
        Step::ReorderColumns { permutation } => {
            let grid = gridkit::reorder_columns(&work.grid()?, permutation)?;
            (Work::Grid(grid), applied(None, None))
        }
        Step::StripDecor => {
            let before = work.grid()?;
            let grid = strip_decor(&before);
            let removed = before.segment_count() - grid.segment_count();
            (
                Work::Grid(grid),
                applied(Some("empty segments removed".into()), Some(removed)),
            )
        }
        Step::SpreadSegments { k } => {
            let grid = gridkit::spread_segments(&work.grid()?, *k)?;
            let rows = grid.row_count();
            (Work::Grid(grid), applied(Some("rows".into()), Some(rows)))
        }
        Step::Regroup { k, fields } => {
            let grid = work.grid()?;
            let resolve = |c: &ColumnRef| {
                grid.resolve(c)
                    .ok_or_else(|| StepError::State(format!("unknown column {c}")))
            };
            let maps = fields
                .iter()
                .map(|f| {
                    let mut map = FieldMap::new(f.name.clone(), f.offset, resolve(&f.column)?);
                    if let Some(fb) = &f.fallback {
                        map = map.with_fallback(resolve(fb)?);
                    }
                    Ok(map)
                })
                .collect::<Result<Vec<_>, StepError>>()?;
            let out = gridkit::regroup(&grid, *k, &maps)?;
            let records = out.table.record_count();
            (
                Work::Staged(out.table),
                StepOutcome::Regroup {
                    records,
                    empty_both: out.warnings,
                },
            )
        }
        Step::Replace {
            find,
            replace,
            scope,
            expected_count,
        } => {
            let mut spec = ReplaceSpec::new(unescape_literal(find)?, unescape_literal(replace)?);
            spec.scope = scope.clone();
            spec.expected_count = expected_count.map(|e| e.resolve(work.rows()));
            let (work, outcome) = on_table!(work, |t| replace_literal(t, &spec)?);
            (work, StepOutcome::Replace(outcome))
        }
        Step::Collapse { separator } => {
            let sep = unescape_literal(separator)?;
            let (work, removed) = on_table!(work, |t| collapse_separators(t, &sep)?);
            (
                work,
                applied(Some("separators removed".into()), Some(removed)),
            )
        }
        Step::StripEdges { mode } => {
            let (work, removed) = on_table!(work, |t| strip_edge_whitespace(t, *mode));
            (
                work,
                applied(Some("characters removed".into()), Some(removed)),
            )
        }
        Step::StripRedundancy {
            field,
            plural,
            singular,
            expected_total,
        } => {
            let mut table = work.staged()?;
            let col = field_index(&table, field)?;
            let cells = table.column_texts(col);
            let (stripped, outcome) = strip_redundancy(
                &cells,
                &unescape_literal(plural)?,
                &unescape_literal(singular)?,
                expected_total.resolve(table.record_count()),
            )?;
            for (row, value) in table.rows.iter_mut().zip(stripped) {
                row[col] = value;
            }
            (Work::Staged(table), StepOutcome::Redundancy(outcome))
        }
        Step::ParseField {
            field,
            parser,
            into,
            suffixes,
        } => {
            let mut table = work.staged()?;
            let col = field_index(&table, field)?;
            let suffixes = suffixes.clone().unwrap_or_default();
            let values = table
                .rows
                .iter()
                .map(|row| parser.apply(&row[col], &suffixes))
                .collect::<Result<Vec<_>, _>>()?;
            let names = into
                .clone()
                .unwrap_or_else(|| parser.default_outputs(field));
            table.splice_field(col, &names, values);
            (Work::Staged(table), applied(Some(names.join(", ")), None))
        }
        Step::Verify {
            check,
            field,
            expect,
        } => {
            let table = work.staged()?;
            let expected = expect.map_or(0, |e| e.resolve(table.record_count()));
            let cells = |field: &Option<String>| -> Result<(String, Vec<String>), StepError> {
                let field = field
                    .as_deref()
                    .ok_or_else(|| StepError::State("check needs a field".into()))?;
                Ok((
                    field.to_string(),
                    table.column_texts(field_index(&table, field)?),
                ))
            };
            let outcome = match check {
                Check::Contains { needle } => {
                    let (name, cells) = cells(field)?;
                    let vector = count_mismatches(&name, &cells, &unescape_literal(needle)?)?;
                    StepOutcome::Mismatch { vector, expected }
                }
                Check::Convert => {
                    let (name, cells) = cells(field)?;
                    StepOutcome::Mismatch {
                        vector: flag_convert_failures(&name, &cells),
                        expected,
                    }
                }
                Check::Votes { staged } => {
                    let records = NormalizedRecord::from_table(&table)?;
                    let totals = table
                        .column_texts(field_index(&table, staged)?)
                        .iter()
                        .map(|t| {
                            t.parse::<i64>()
                                .map_err(|_| FieldError::NotAnInteger(t.clone()))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    StepOutcome::Votes {
                        violations: check_votes(&records, &totals)?,
                    }
                }
            };
            (Work::Staged(table), outcome)
        }
        Step::DropFields { fields } => {
            let mut table = work.staged()?;
            for f in fields {
                let col = field_index(&table, f)?;
                table.remove_field(col);
            }
            (Work::Staged(table), applied(Some(fields.join(", ")), None))
        }
    })
}

/// Extracts the table and runs every step against an already loaded
/// document. `locale` overrides the config's scan profile.
pub fn execute(config: &PipelineConfig, doc: &RawDocument, locale: Option<&str>) -> Execution {
    let mut report = RunReport::new(&config.selector);
    let extraction = match extract_grid(doc, &config.selector) {
        Ok(ex) => ex,
        Err(e) => {
            report.abort("extract", e);
            return Execution {
                report,
                table: None,
            };
        }
    };
    report.extraction = Some(extraction.report);
    if let Some(name) = locale.or(config.locale_scan.as_deref()) {
        match LocaleProfile::builtin(name) {
            Ok(profile) => report.hazards = Some(hazard_report(&extraction.grid, &profile, false)),
            Err(e) => {
                report.abort("locale_scan", e);
                return Execution {
                    report,
                    table: None,
                };
            }
        }
    }
    let mut work = Work::Grid(extraction.grid);
    for (i, step) in config.steps.iter().enumerate() {
        let label = step.label(i);
        match run_step(work, step) {
            Ok((next, outcome)) => {
                report.clean.push(label, outcome);
                work = next;
            }
            Err(e) => {
                report.abort(label, e);
                return Execution {
                    report,
                    table: None,
                };
            }
        }
    }
    let table = work.into_table();
    report.output = Some(OutputShape {
        records: table.record_count(),
        fields: table.fieldnames.clone(),
    });
    report.overall = report.clean.overall;
    Execution {
        report,
        table: Some(table),
    }
}

/// Overrides applied on top of a config, typically from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub input: Option<Origin>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub format: Option<TableFormat>,
    pub locale: Option<String>,
    pub load: LoadOptions,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_REPORT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub table_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    /// 0 pass, 1 report fail, 2 input error or abort.
    pub exit_code: i32,
    pub report: RunReport,
    /// The rendered table, also when no output path was given.
    pub table: Option<Vec<u8>>,
}

/// Loads the input, executes the steps and writes the table and report.
///
/// Config problems are returned as errors. Input and step failures still
/// write the partial report and yield exit code 2.
pub fn run_pipeline(
    config: &PipelineConfig,
    opts: &RunOptions,
) -> Result<RunArtifacts, PipelineError> {
    config.validate()?;
    if let Some(name) = &opts.locale {
        LocaleProfile::builtin(name).map_err(|e| invalid(e.to_string()))?;
    }
    let origin = opts
        .input
        .clone()
        .or_else(|| config.input_origin())
        .ok_or_else(|| invalid("no input given"))?;
    let output = opts
        .output
        .clone()
        .or_else(|| config.output.as_ref().map(|o| config.resolve_path(&o.path)));
    let format = opts
        .format
        .or_else(|| config.output.as_ref().map(|o| o.format))
        .unwrap_or_default();
    let report_path = opts
        .report
        .clone()
        .or_else(|| config.report.as_ref().map(|p| config.resolve_path(p)));

    let (mut report, table) = match load_document(&origin, &opts.load) {
        Ok(doc) => {
            let ex = execute(config, &doc, opts.locale.as_deref());
            (ex.report, ex.table)
        }
        Err(e) => {
            let mut report = RunReport::new(&config.selector);
            report.abort("load", e);
            (report, None)
        }
    };

    let mut table_path = None;
    let mut rendered = None;
    if let Some(table) = table {
        match render_table(&table, format) {
            Ok(bytes) => {
                if let Some(path) = &output {
                    write_atomic(path, &bytes)?;
                    table_path = Some(path.clone());
                }
                rendered = Some(bytes);
            }
            Err(e) => report.abort("emit", e),
        }
    }
    if let Some(path) = &report_path {
        write_atomic(path, report.to_json().as_bytes())?;
    }
    let exit_code = match (&report.abort, report.overall) {
        (Some(_), _) => EXIT_ERROR,
        (None, Verdict::Pass) => EXIT_PASS,
        (None, Verdict::Fail) => EXIT_REPORT_FAIL,
    };
    Ok(RunArtifacts {
        table_path,
        report_path,
        exit_code,
        report,
        table: rendered,
    })
}
