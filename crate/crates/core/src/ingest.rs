//! Loading HTML documents and extracting a table-like element into a
//! [`RawGrid`] of text segments.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use ego_tree::NodeRef;
use encoding_rs::{DecoderResult, Encoding, UTF_8};
use scraper::{ElementRef, Html, Node, Selector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable holding the network fetch timeout in seconds.
pub const FETCH_TIMEOUT_ENV: &str = "WEBTABLE_FETCH_TIMEOUT";

const DEFAULT_FETCH_TIMEOUT: Duration = Duration::from_secs(30);
const DEFAULT_MAX_REDIRECTS: u32 = 5;
const MAX_FETCH_BYTES: u64 = 64 * 1024 * 1024;
const META_SNIFF_BYTES: usize = 1024;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error reading {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("fetch error for {url}: {reason}")]
    Fetch { url: String, reason: String },
    #[error("decode error: {0}")]
    Decode(String),
    #[error("no table found for selector {0}")]
    NoTableFound(String),
    #[error("ambiguous selector: {first} and {second} both hold {cells} cells")]
    AmbiguousSelector {
        first: String,
        second: String,
        cells: usize,
    },
    #[error("invalid selector {selector:?}: {reason}")]
    InvalidSelector { selector: String, reason: String },
}

/// Where a document comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "location", rename_all = "lowercase")]
pub enum Origin {
    File(PathBuf),
    Url(String),
}

impl Origin {
    pub fn parse(source: &str) -> Origin {
        let lower = source.to_ascii_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") {
            Origin::Url(source.to_string())
        } else {
            Origin::File(PathBuf::from(source))
        }
    }
}

impl FromStr for Origin {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Origin::parse(s))
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File(p) => write!(f, "{}", p.display()),
            Origin::Url(u) => f.write_str(u),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Encoding label that overrides anything declared by the document.
    pub encoding: Option<String>,
    pub timeout: Duration,
    pub max_redirects: u32,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            encoding: None,
            timeout: DEFAULT_FETCH_TIMEOUT,
            max_redirects: DEFAULT_MAX_REDIRECTS,
        }
    }
}

impl LoadOptions {
    /// Defaults, with the timeout taken from [`FETCH_TIMEOUT_ENV`] when set.
    pub fn from_env() -> Self {
        let mut opts = LoadOptions::default();
        if let Some(secs) = std::env::var(FETCH_TIMEOUT_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|s| s.is_finite() && *s > 0.0)
        {
            opts.timeout = Duration::from_secs_f64(secs);
        }
        opts
    }
}

/// A loaded and decoded document.
#[derive(Debug, Clone)]
pub struct RawDocument {
    pub source: Origin,
    pub markup: String,
    pub encoding: String,
    /// Number of malformed byte sequences replaced with U+FFFD while decoding.
    pub replacements: usize,
}

impl RawDocument {
    /// Wraps markup that is already in memory.
    pub fn from_markup(source: Origin, markup: impl Into<String>) -> Self {
        RawDocument {
            source,
            markup: markup.into(),
            encoding: "UTF-8".to_string(),
            replacements: 0,
        }
    }
}

/// Reads a file or fetches a URL and decodes it.
///
/// Network fetches follow at most `opts.max_redirects` redirects and are
/// never retried.
pub fn load_document(source: &Origin, opts: &LoadOptions) -> Result<RawDocument, IngestError> {
    let (bytes, transport_charset) = match source {
        Origin::File(path) => {
            let bytes = std::fs::read(path).map_err(|e| IngestError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            (bytes, None)
        }
        Origin::Url(url) => fetch(url, opts)?,
    };
    let empty = || match source {
        Origin::File(path) => IngestError::Io {
            path: path.display().to_string(),
            reason: "empty document".to_string(),
        },
        Origin::Url(url) => IngestError::Fetch {
            url: url.clone(),
            reason: "empty document".to_string(),
        },
    };
    if bytes.is_empty() {
        return Err(empty());
    }
    let (markup, encoding, replacements) = decode(
        &bytes,
        opts.encoding.as_deref(),
        transport_charset.as_deref(),
    )?;
    if markup.trim().is_empty() {
        return Err(empty());
    }
    Ok(RawDocument {
        source: source.clone(),
        markup,
        encoding: encoding.name().to_string(),
        replacements,
    })
}

fn fetch(url: &str, opts: &LoadOptions) -> Result<(Vec<u8>, Option<String>), IngestError> {
    let fail = |reason: String| IngestError::Fetch {
        url: url.to_string(),
        reason,
    };
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(opts.timeout))
        .max_redirects(opts.max_redirects)
        .build()
        .into();
    let mut response = agent.get(url).call().map_err(|e| fail(e.to_string()))?;
    if !response.status().is_success() {
        return Err(fail(format!("status {}", response.status())));
    }
    let charset = response.body().charset().map(str::to_string);
    let bytes = response
        .body_mut()
        .with_config()
        .limit(MAX_FETCH_BYTES)
        .read_to_vec()
        .map_err(|e| fail(e.to_string()))?;
    Ok((bytes, charset))
}

/// Decodes `bytes`, choosing the encoding from (in order) the override label,
/// a byte-order mark, the transport charset, a `<meta>` declaration, and
/// finally UTF-8.
///
/// Undeclared input must be valid UTF-8; declared input is decoded with
/// replacement and the replacements are counted.
pub fn decode(
    bytes: &[u8],
    override_label: Option<&str>,
    transport_charset: Option<&str>,
) -> Result<(String, &'static Encoding, usize), IngestError> {
    let lookup = |label: &str| {
        Encoding::for_label(label.trim().as_bytes())
            .ok_or_else(|| IngestError::Decode(format!("unknown encoding label {label:?}")))
    };
    let (encoding, declared) = if let Some(label) = override_label {
        (lookup(label)?, true)
    } else if let Some((enc, _)) = Encoding::for_bom(bytes) {
        (enc, true)
    } else if let Some(label) = transport_charset {
        (lookup(label)?, true)
    } else if let Some(label) = sniff_meta_charset(bytes) {
        (lookup(&label)?, true)
    } else {
        (UTF_8, false)
    };

    if !declared && std::str::from_utf8(bytes).is_err() {
        return Err(IngestError::Decode(
            "no encoding declared and the input is not valid UTF-8".to_string(),
        ));
    }

    let mut decoder = encoding.new_decoder_with_bom_removal();
    let capacity = decoder
        .max_utf8_buffer_length_without_replacement(bytes.len())
        .unwrap_or(bytes.len() * 3);
    let mut out = String::with_capacity(capacity);
    let mut input = bytes;
    let mut replacements = 0;
    loop {
        let (result, read) = decoder.decode_to_string_without_replacement(input, &mut out, true);
        input = &input[read..];
        match result {
            DecoderResult::InputEmpty => break,
            DecoderResult::OutputFull => out.reserve(input.len() * 3 + 16),
            DecoderResult::Malformed(_, _) => {
                out.push('\u{FFFD}');
                replacements += 1;
            }
        }
    }
    Ok((out, encoding, replacements))
}

fn sniff_meta_charset(bytes: &[u8]) -> Option<String> {
    let head = &bytes[..bytes.len().min(META_SNIFF_BYTES)];
    let head = String::from_utf8_lossy(head).to_ascii_lowercase();
    let at = head.find("charset=")? + "charset=".len();
    let label: String = head[at..]
        .trim_start_matches(['"', '\''])
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | ':' | '.'))
        .collect();
    (!label.is_empty()).then_some(label)
}

/// Which element of the document becomes the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TableSelector {
    /// The `<table>` with the most cells; a tie is an error.
    #[default]
    LargestTable,
    /// The `i`-th `<table>` in document order.
    Index(usize),
    /// A CSS selector. A single matched `<table>` is extracted as a table;
    /// otherwise every match is one row whose child elements are the cells.
    Path(String),
}

impl fmt::Display for TableSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableSelector::LargestTable => f.write_str("largest-table"),
            TableSelector::Index(i) => write!(f, "index({i})"),
            TableSelector::Path(p) => write!(f, "path({p})"),
        }
    }
}

/// One cell: ordered text segments (one per paragraph, line break or list
/// item) plus decoration flags.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RawCell {
    pub segments: Vec<String>,
    pub has_image: bool,
    pub had_bullets: bool,
}

impl RawCell {
    /// A plain cell; `\n` separates segments and empty segments are dropped.
    pub fn text(text: &str) -> Self {
        RawCell {
            segments: split_segments(text),
            ..RawCell::default()
        }
    }

    pub fn from_segments<S: Into<String>>(segments: impl IntoIterator<Item = S>) -> Self {
        RawCell {
            segments: segments.into_iter().map(Into::into).collect(),
            ..RawCell::default()
        }
    }

    /// True when every segment is whitespace (spaces or NBSP) or missing.
    pub fn is_blank(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.chars().all(|c| c == ' ' || c == '\u{a0}'))
    }

    /// Segments joined with a single space.
    pub fn joined(&self) -> String {
        self.segments.join(" ")
    }
}

pub(crate) fn split_segments(text: &str) -> Vec<String> {
    text.split('\n')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// A rectangular grid of raw cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGrid {
    rows: Vec<Vec<RawCell>>,
    column_names: Option<Vec<String>>,
    column_count: usize,
}

impl RawGrid {
    /// Builds a grid, padding short rows with empty cells.
    pub fn new(rows: Vec<Vec<RawCell>>, column_names: Option<Vec<String>>) -> Self {
        Self::padded(rows, column_names).0
    }

    /// Like [`RawGrid::new`], also returning how many cells were padded.
    pub fn padded(mut rows: Vec<Vec<RawCell>>, column_names: Option<Vec<String>>) -> (Self, usize) {
        let widest = rows.iter().map(Vec::len).max().unwrap_or(0);
        let named = column_names.as_ref().map_or(0, Vec::len);
        let column_count = widest.max(named).max(1);
        let mut padded = 0;
        for row in &mut rows {
            padded += column_count - row.len();
            row.resize_with(column_count, RawCell::default);
        }
        let column_names = column_names.map(|mut names| {
            for i in names.len()..column_count {
                names.push(format!("col{}", i + 1));
            }
            names
        });
        (
            RawGrid {
                rows,
                column_names,
                column_count,
            },
            padded,
        )
    }

    /// Grid of single-line cells; `\n` inside a cell separates segments.
    pub fn from_texts<R, S>(rows: impl IntoIterator<Item = R>) -> Self
    where
        R: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|c| RawCell::text(c.as_ref())).collect())
            .collect();
        RawGrid::new(rows, None)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Self {
        let (grid, _) = RawGrid::padded(std::mem::take(&mut self.rows), Some(names));
        grid
    }

    pub fn rows(&self) -> &[Vec<RawCell>] {
        &self.rows
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn column_count(&self) -> usize {
        self.column_count
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&RawCell> {
        self.rows.get(row).and_then(|r| r.get(col))
    }

    pub(crate) fn rows_mut(&mut self) -> &mut Vec<Vec<RawCell>> {
        &mut self.rows
    }

    pub(crate) fn from_parts(
        rows: Vec<Vec<RawCell>>,
        column_names: Option<Vec<String>>,
        column_count: usize,
    ) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == column_count));
        RawGrid {
            rows,
            column_names,
            column_count,
        }
    }

    pub(crate) fn into_parts(self) -> (Vec<Vec<RawCell>>, Option<Vec<String>>, usize) {
        (self.rows, self.column_names, self.column_count)
    }

    /// Count of non-empty segments across the grid.
    pub fn segment_count(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .map(|c| c.segments.iter().filter(|s| !s.is_empty()).count())
            .sum()
    }
}

impl crate::table::CellTable for RawGrid {
    fn row_count(&self) -> usize {
        self.rows.len()
    }

    fn column_count(&self) -> usize {
        self.column_count
    }

    fn column_label(&self, col: usize) -> Option<&str> {
        self.column_names
            .as_ref()
            .and_then(|n| n.get(col))
            .map(String::as_str)
    }

    fn cell_text(&self, row: usize, col: usize) -> std::borrow::Cow<'_, str> {
        match self.rows[row][col].segments.as_slice() {
            [] => "".into(),
            [one] => one.as_str().into(),
            many => many.join("\n").into(),
        }
    }

    fn rewrite_cells(&mut self, column: Option<usize>, f: &mut dyn FnMut(&str) -> Option<String>) {
        for row in &mut self.rows {
            for (c, cell) in row.iter_mut().enumerate() {
                if column.is_some_and(|col| col != c) {
                    continue;
                }
                let text = cell.segments.join("\n");
                if let Some(new) = f(&text) {
                    cell.segments = split_segments(&new);
                }
            }
        }
    }
}

/// What was extracted and how much padding it needed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub element: String,
    pub rows: usize,
    pub columns: usize,
    pub header: bool,
    pub padded_cells: usize,
    pub decode_replacements: usize,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub grid: RawGrid,
    pub report: ExtractionReport,
}

/// Extracts the selected table or table-like element. Everything outside it
/// is discarded.
pub fn extract_grid(doc: &RawDocument, sel: &TableSelector) -> Result<Extraction, IngestError> {
    let html = Html::parse_document(&doc.markup);
    let tables: Vec<ElementRef<'_>> = html
        .tree
        .root()
        .descendants()
        .filter_map(ElementRef::wrap)
        .filter(|e| e.value().name() == "table")
        .collect();

    let (element, rows, names) = match sel {
        TableSelector::LargestTable => {
            let (i, table) = largest(&tables, sel)?;
            let (rows, names) = table_rows(table);
            (describe(table, Some(i)), rows, names)
        }
        TableSelector::Index(i) => {
            let table = tables
                .get(*i)
                .copied()
                .ok_or_else(|| IngestError::NoTableFound(sel.to_string()))?;
            let (rows, names) = table_rows(table);
            (describe(table, Some(*i)), rows, names)
        }
        TableSelector::Path(css) => {
            let selector = Selector::parse(css).map_err(|e| IngestError::InvalidSelector {
                selector: css.clone(),
                reason: e.to_string(),
            })?;
            let matched: Vec<ElementRef<'_>> = html.select(&selector).collect();
            if matched.is_empty() {
                return Err(IngestError::NoTableFound(sel.to_string()));
            }
            if matched.iter().all(|e| e.value().name() == "table") {
                let (_, table) = largest(&matched, sel)?;
                let index = tables.iter().position(|t| t.id() == table.id());
                let (rows, names) = table_rows(table);
                (describe(table, index), rows, names)
            } else {
                let rows = matched.iter().map(|e| list_row(*e)).collect();
                (
                    format!("{} x{}", describe(matched[0], None), matched.len()),
                    rows,
                    None,
                )
            }
        }
    };

    if rows.iter().all(Vec::is_empty) && names.is_none() {
        return Err(IngestError::NoTableFound(sel.to_string()));
    }
    let header = names.is_some();
    let (grid, padded_cells) = RawGrid::padded(rows, names);
    let report = ExtractionReport {
        element,
        rows: grid.rows.len(),
        columns: grid.column_count,
        header,
        padded_cells,
        decode_replacements: doc.replacements,
    };
    Ok(Extraction { grid, report })
}

fn largest<'a>(
    candidates: &[ElementRef<'a>],
    sel: &TableSelector,
) -> Result<(usize, ElementRef<'a>), IngestError> {
    let mut sized: Vec<(usize, usize, ElementRef<'a>)> = candidates
        .iter()
        .enumerate()
        .map(|(i, t)| (cell_count(*t), i, *t))
        .collect();
    // Largest first; equal sizes keep document order.
    sized.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    match sized.as_slice() {
        [] => Err(IngestError::NoTableFound(sel.to_string())),
        [(a, ia, ta), (b, ib, tb), ..] if a == b => Err(IngestError::AmbiguousSelector {
            first: describe(*ta, Some(*ia)),
            second: describe(*tb, Some(*ib)),
            cells: *a,
        }),
        [(_, i, t), ..] => Ok((*i, *t)),
    }
}

fn describe(el: ElementRef<'_>, index: Option<usize>) -> String {
    let v = el.value();
    let mut out = v.name().to_string();
    if let Some(i) = index {
        out.push_str(&format!("[{i}]"));
    }
    if let Some(id) = v.id() {
        out.push('#');
        out.push_str(id);
    }
    for class in v.classes() {
        out.push('.');
        out.push_str(class);
    }
    out
}

/// Rows of `table` that belong to it directly, not to a nested table.
fn own_rows<'a>(table: ElementRef<'a>) -> impl Iterator<Item = ElementRef<'a>> {
    let id = table.id();
    table
        .descendants()
        .skip(1)
        .filter_map(ElementRef::wrap)
        .filter(|e| e.value().name() == "tr")
        .filter(move |tr| {
            tr.ancestors()
                .filter_map(ElementRef::wrap)
                .find(|a| a.value().name() == "table")
                .is_some_and(|t| t.id() == id)
        })
}

fn row_cells<'a>(tr: ElementRef<'a>) -> impl Iterator<Item = ElementRef<'a>> {
    tr.children()
        .filter_map(ElementRef::wrap)
        .filter(|c| matches!(c.value().name(), "td" | "th"))
}

fn cell_count(table: ElementRef<'_>) -> usize {
    own_rows(table).map(|tr| row_cells(tr).count()).sum()
}

fn in_thead(tr: ElementRef<'_>) -> bool {
    tr.ancestors()
        .filter_map(ElementRef::wrap)
        .take_while(|a| a.value().name() != "table")
        .any(|a| a.value().name() == "thead")
}

type Rows = Vec<Vec<RawCell>>;

fn table_rows(table: ElementRef<'_>) -> (Rows, Option<Vec<String>>) {
    let mut names = None;
    let mut rows = Vec::new();
    for (i, tr) in own_rows(table).enumerate() {
        let elements: Vec<ElementRef<'_>> = row_cells(tr).collect();
        let is_header = names.is_none()
            && !elements.is_empty()
            && (in_thead(tr) || (i == 0 && elements.iter().all(|c| c.value().name() == "th")));
        let cells: Vec<RawCell> = elements.iter().map(|c| segment_cell(**c)).collect();
        if is_header {
            names = Some(cells.iter().map(RawCell::joined).collect());
        } else if !in_thead(tr) {
            rows.push(cells);
        }
    }
    (rows, names)
}

fn list_row(item: ElementRef<'_>) -> Vec<RawCell> {
    let children: Vec<ElementRef<'_>> = item.children().filter_map(ElementRef::wrap).collect();
    if children.is_empty() {
        vec![segment_cell(*item)]
    } else {
        children.iter().map(|c| segment_cell(**c)).collect()
    }
}

fn segment_cell(node: NodeRef<'_, Node>) -> RawCell {
    let mut seg = Segmenter::default();
    seg.walk(node);
    seg.finish()
}

#[derive(Default)]
struct Segmenter {
    cell: RawCell,
    current: String,
}

fn opens_segment(name: &str) -> bool {
    matches!(
        name,
        "p" | "li"
            | "div"
            | "ul"
            | "ol"
            | "dl"
            | "dt"
            | "dd"
            | "tr"
            | "td"
            | "th"
            | "table"
            | "blockquote"
            | "pre"
            | "section"
            | "article"
            | "header"
            | "footer"
            | "h1"
            | "h2"
            | "h3"
            | "h4"
            | "h5"
            | "h6"
    )
}

impl Segmenter {
    fn walk(&mut self, node: NodeRef<'_, Node>) {
        for child in node.children() {
            match child.value() {
                Node::Text(text) => self.push_text(text),
                Node::Element(el) => match el.name() {
                    "img" | "picture" | "svg" => self.cell.has_image = true,
                    "br" => self.break_segment(),
                    "script" | "style" | "template" | "noscript" | "head" => {}
                    name if opens_segment(name) => {
                        if name == "li" {
                            self.cell.had_bullets = true;
                        }
                        self.break_segment();
                        self.walk(child);
                        self.break_segment();
                    }
                    _ => self.walk(child),
                },
                _ => {}
            }
        }
    }

    fn push_text(&mut self, text: &str) {
        for c in text.chars() {
            if c == '\u{2028}' || c == '\u{2029}' {
                self.break_segment();
            } else if c.is_whitespace() && c != '\u{a0}' {
                if !self.current.is_empty() && !self.current.ends_with(' ') {
                    self.current.push(' ');
                }
            } else {
                self.current.push(c);
            }
        }
    }

    fn break_segment(&mut self) {
        let seg = std::mem::take(&mut self.current);
        let seg = seg.trim_matches(' ');
        if !seg.is_empty() {
            self.cell.segments.push(seg.to_string());
        }
    }

    fn finish(mut self) -> RawCell {
        self.break_segment();
        self.cell
    }
}

const BULLET_GLYPHS: &[char] = &['•', '◦', '▪', '▫', '‣', '⁃', '●', '○', '■', '□', '∙'];
const INVISIBLES: &[char] = &['\u{FFFC}', '\u{200B}', '\u{FEFF}', '\u{00AD}', '\u{2060}'];

/// Removes decoration content, keeping only text: object-replacement and
/// zero-width characters, and list-marker glyphs at the start of a segment.
/// The `has_image` and `had_bullets` flags are kept as metadata.
pub fn strip_decor(grid: &RawGrid) -> RawGrid {
    let mut out = grid.clone();
    for cell in out.rows.iter_mut().flatten() {
        let mut segments = Vec::with_capacity(cell.segments.len());
        for seg in &cell.segments {
            let visible: String = seg.chars().filter(|c| !INVISIBLES.contains(c)).collect();
            let mut rest = visible.as_str();
            while let Some(tail) = rest.strip_prefix(BULLET_GLYPHS) {
                rest = tail.trim_start_matches(' ');
            }
            if !rest.is_empty() {
                segments.push(rest.to_string());
            }
        }
        cell.segments = segments;
    }
    out
}
