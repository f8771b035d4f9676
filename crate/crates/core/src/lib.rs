//! Convert webtables (HTML tables and table-like lists) into normalized
//! datatables.
//!
//! The crate is organised around the stages of a conversion:
//!
//! * [`ingest`] loads a document and extracts a [`RawGrid`] of text segments.
//! * [`gridkit`] deletes and reorders rows and columns, and regroups
//!   `k` raw rows into one record ([`StagedTable`]).
//! * [`cleanse`] runs counted literal replacements, separator collapsing,
//!   edge-whitespace stripping and redundancy-suffix removal.
//! * [`fieldparse`] splits composite fields (votes, user/server, `k`-suffixed
//!   counts, relative times).
//! * [`localeguard`] predicts what a naive spreadsheet open would do to each
//!   cell under a locale.
//! * [`verify`] counts mismatches and assembles the [`CleanReport`].
//! * [`pipeline`] runs a declarative JSON pipeline end to end, and [`emit`]
//!   writes the result as TSV or CSV.
//!
//! Numeric parsers are generic over [`DecimalScalar`], so the same grammar
//! can produce `f64`, `f32` or an exact rational.

pub mod cleanse;
pub mod emit;
pub mod fieldparse;
pub mod gridkit;
pub mod ingest;
pub mod localeguard;
pub mod pipeline;
pub mod scalar;
pub mod table;
pub mod verify;

pub use cleanse::{ReplaceOutcome, ReplaceSpec, Scope};
pub use emit::TableFormat;
pub use fieldparse::{MagnitudeSuffixTable, NormalizedRecord, VoteTriple};
pub use gridkit::{FieldMap, StagedTable};
pub use ingest::{Origin, RawCell, RawDocument, RawGrid, TableSelector};
pub use localeguard::{CoercedValue, HazardReport, LocaleProfile};
pub use pipeline::{PipelineConfig, RunArtifacts};
pub use scalar::DecimalScalar;
pub use table::{CellTable, ColumnRef};
pub use verify::{CleanReport, MismatchVector};

/// Exact decimal values, used where rounding would hide a discrepancy.
pub type Exact = num_rational::BigRational;

/// Spreadsheet-open prediction carrying `f64` numbers.
pub type Coerced = CoercedValue<f64>;

/// Spreadsheet-open prediction carrying exact rational numbers.
pub type ExactCoerced = CoercedValue<Exact>;
