//! Edge-log ingestion, connected-order normalisation, model-spec text and
//! report serialisation.
//!
//! Raw edge logs are `u v` (plain) or `t u v` (timestamped) lines with
//! `#` comments. Normalised logs are plain logs in connected order with a
//! header recording the format version and the seed size.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::components::{ComponentKind, Mixture, MixtureModel, ModelError, Term};
use crate::fit::{DeltaScan, FitResult};
use crate::generate::{GrowthOutcome, GrowthRecipe, SeedSpec, RNG_ALGORITHM};
use crate::graph::{ArrivalEvent, ArrivalLog, EventKind, EvolvingGraph, NodeId};
use crate::likelihood::{LikelihoodReport, StreamReport};
use crate::stats::StatsSummary;

pub const FORMAT_VERSION: u32 = 1;
const LOG_MAGIC: &str = "netgrowth-log format-version";
/// Marker printed for undefined statistics.
pub const UNDEFINED: &str = "undefined";
/// Tolerance on the weight sum of a model-spec expression.
pub const SPEC_WEIGHT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: io::Error },
    #[error("no valid edge records ({} malformed lines)", .malformed.len())]
    NoRecords { malformed: Vec<MalformedLine> },
    #[error("{} malformed lines, first at line {}: {}", .0.len(), .0[0].line, .0[0].reason)]
    Malformed(Vec<MalformedLine>),
    #[error("no records left after filtering and warm-up trimming")]
    EmptyAfterTrim,
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEdgeRecord {
    pub u: String,
    pub v: String,
    pub timestamp: Option<i64>,
}

impl RawEdgeRecord {
    pub fn new(u: &str, v: &str) -> Self {
        RawEdgeRecord {
            u: u.to_owned(),
            v: v.to_owned(),
            timestamp: None,
        }
    }

    fn key(&self) -> (String, String) {
        unordered(&self.u, &self.v)
    }
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeFormat {
    Plain,
    Timestamped,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MalformedLine {
    pub line: usize,
    pub text: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedEdges {
    pub records: Vec<RawEdgeRecord>,
    pub self_loops: usize,
    pub malformed: Vec<MalformedLine>,
    /// Seed size from a normalised-log header, if present.
    pub header_seed_size: Option<usize>,
    /// Whether the normalised-log header was present.
    pub normalized: bool,
}

/// Parses an edge log. Timestamped records are stably sorted by time.
pub fn parse_edge_log<R: BufRead>(input: R, format: EdgeFormat) -> Result<ParsedEdges, IoError> {
    let mut parsed = ParsedEdges {
        records: Vec::new(),
        self_loops: 0,
        malformed: Vec::new(),
        header_seed_size: None,
        normalized: false,
    };
    for (i, line) in input.lines().enumerate() {
        let number = i + 1;
        let line = line.map_err(|source| IoError::Read {
            path: "<input>".into(),
            source,
        })?;
        let text = line.trim();
        if let Some(comment) = text.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(n) = comment.strip_prefix("seed_size ") {
                parsed.header_seed_size = n.trim().parse().ok();
            }
            if comment == format!("{LOG_MAGIC} {FORMAT_VERSION}") {
                parsed.normalized = true;
            }
            continue;
        }
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let bad = |reason: &str| MalformedLine {
            line: number,
            text: text.to_owned(),
            reason: reason.to_owned(),
        };
        let record = match (format, fields.as_slice()) {
            (EdgeFormat::Plain, [u, v]) => RawEdgeRecord::new(u, v),
            (EdgeFormat::Timestamped, [t, u, v]) => match t.parse::<i64>() {
                Ok(t) => RawEdgeRecord {
                    timestamp: Some(t),
                    ..RawEdgeRecord::new(u, v)
                },
                Err(_) => {
                    parsed.malformed.push(bad("timestamp is not an integer"));
                    continue;
                }
            },
            (EdgeFormat::Plain, _) => {
                parsed.malformed.push(bad("expected two fields `u v`"));
                continue;
            }
            (EdgeFormat::Timestamped, _) => {
                parsed.malformed.push(bad("expected three fields `t u v`"));
                continue;
            }
        };
        if record.u == record.v {
            parsed.self_loops += 1;
            continue;
        }
        parsed.records.push(record);
    }
    if parsed.records.is_empty() {
        return Err(IoError::NoRecords {
            malformed: parsed.malformed,
        });
    }
    if format == EdgeFormat::Timestamped {
        parsed.records.sort_by_key(|r| r.timestamp);
    }
    Ok(parsed)
}

pub fn parse_edge_file(path: &Path, format: EdgeFormat) -> Result<ParsedEdges, IoError> {
    let file = fs::File::open(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_log(io::BufReader::new(file), format)
}

/// A cut point in a record stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// A number of records (warm-up) or emitted events (seed).
    Count(usize),
    /// Everything strictly before this timestamp.
    Before(i64),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Records removed from the front before placement.
    pub warmup: Option<Boundary>,
    /// When set, only edges in this set (unordered label pairs) are kept.
    pub survivors: Option<HashSet<(String, String)>>,
    /// End of `G_0`. Defaults to the first event only.
    pub seed: Option<Boundary>,
    /// Endpoint order is meaningful, as in normalised logs: an edge between
    /// the newest node and an older one continues that node's arrival only
    /// when written newest-first.
    pub oriented: bool,
}

impl NormalizeOptions {
    pub fn survivors_from(records: &[RawEdgeRecord]) -> HashSet<(String, String)> {
        records.iter().map(RawEdgeRecord::key).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalizeReport {
    pub placed: usize,
    pub duplicates: usize,
    pub filtered: usize,
    pub trimmed: usize,
    /// Edges that had to wait for an endpoint to join the structure.
    pub delayed: usize,
    /// Edges that never connected, in input order.
    pub unplaced: Vec<(String, String)>,
}

impl fmt::Display for NormalizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "placed={} duplicates={} filtered={} trimmed={} delayed={} unplaced={}",
            self.placed,
            self.duplicates,
            self.filtered,
            self.trimmed,
            self.delayed,
            self.unplaced.len()
        )
    }
}

struct Placer {
    ids: HashMap<String, NodeId>,
    labels: Vec<String>,
    events: Vec<ArrivalEvent>,
    open: Option<NodeId>,
}

impl Placer {
    fn id(&self, label: &str) -> Option<NodeId> {
        self.ids.get(label).copied()
    }

    fn intern(&mut self, label: &str) -> NodeId {
        let id = NodeId::from(self.labels.len());
        self.ids.insert(label.to_owned(), id);
        self.labels.push(label.to_owned());
        id
    }

    fn can_place(&self, r: &RawEdgeRecord) -> bool {
        self.events.is_empty() || self.ids.contains_key(&r.u) || self.ids.contains_key(&r.v)
    }

    /// Places a connectable record; returns labels that joined.
    fn place(&mut self, r: &RawEdgeRecord, oriented: bool) -> Vec<String> {
        let event = match (self.id(&r.u), self.id(&r.v)) {
            (None, None) => {
                let u = self.intern(&r.u);
                let v = self.intern(&r.v);
                self.open = None;
                self.events.push(ArrivalEvent {
                    kind: EventKind::Initial,
                    u,
                    v,
                });
                return vec![r.u.clone(), r.v.clone()];
            }
            (None, Some(v)) => {
                let u = self.intern(&r.u);
                self.open = Some(u);
                self.events.push(ArrivalEvent::new_node(u, v));
                return vec![r.u.clone()];
            }
            (Some(u), None) => {
                let v = self.intern(&r.v);
                self.open = Some(v);
                self.events.push(ArrivalEvent::new_node(v, u));
                return vec![r.v.clone()];
            }
            (Some(u), Some(v)) => match self.open {
                Some(x) if x == u => ArrivalEvent::new_node_extra(u, v),
                Some(x) if x == v && !oriented => ArrivalEvent::new_node_extra(v, u),
                _ => {
                    self.open = None;
                    ArrivalEvent::inner_edge(u, v)
                }
            },
        };
        self.events.push(event);
        Vec::new()
    }
}

/// Turns raw records into an arrival log in which every edge touches the
/// structure built so far.
///
/// Duplicates (as unordered label pairs) keep their first occurrence. An edge
/// with no endpoint in the structure is queued; whenever a label joins, the
/// queued edges waiting on it become ready and are placed earliest-queued
/// first, before the next input record is considered.
pub fn normalize_connected_order(
    records: &[RawEdgeRecord],
    options: &NormalizeOptions,
) -> Result<(ArrivalLog, NormalizeReport), IoError> {
    let mut report = NormalizeReport::default();
    let mut seen = HashSet::new();
    let mut kept: Vec<&RawEdgeRecord> = Vec::with_capacity(records.len());
    for r in records {
        let key = r.key();
        if !seen.insert(key.clone()) {
            report.duplicates += 1;
            continue;
        }
        if let Some(survivors) = &options.survivors {
            if !survivors.contains(&key) {
                report.filtered += 1;
                continue;
            }
        }
        kept.push(r);
    }
    let skip = match options.warmup {
        None => 0,
        Some(Boundary::Count(n)) => n.min(kept.len()),
        Some(Boundary::Before(t)) => kept
            .iter()
            .take_while(|r| r.timestamp.is_some_and(|x| x < t))
            .count(),
    };
    report.trimmed = skip;
    let kept = &kept[skip..];
    if kept.is_empty() {
        return Err(IoError::EmptyAfterTrim);
    }

    let mut placer = Placer {
        ids: HashMap::new(),
        labels: Vec::new(),
        events: Vec::new(),
        open: None,
    };
    let mut queue: Vec<Option<&RawEdgeRecord>> = Vec::new();
    let mut waiting: HashMap<String, Vec<usize>> = HashMap::new();
    let mut ready: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
    let mut seed_events = None;
    for r in kept {
        if let (Some(Boundary::Before(t)), None) = (options.seed, seed_events) {
            if r.timestamp.is_some_and(|x| x >= t) {
                seed_events = Some(placer.events.len());
            }
        }
        if !placer.can_place(r) {
            report.delayed += 1;
            let q = queue.len();
            queue.push(Some(r));
            waiting.entry(r.u.clone()).or_default().push(q);
            waiting.entry(r.v.clone()).or_default().push(q);
            continue;
        }
        let mut joined = placer.place(r, options.oriented);
        loop {
            for label in joined.drain(..) {
                for q in waiting.remove(&label).unwrap_or_default() {
                    if queue[q].is_some() {
                        ready.push(Reverse(q));
                    }
                }
            }
            let Some(Reverse(q)) = ready.pop() else { break };
            if let Some(r) = queue[q].take() {
                joined = placer.place(r, options.oriented);
            }
        }
    }
    report.unplaced = queue
        .into_iter()
        .flatten()
        .map(|r| (r.u.clone(), r.v.clone()))
        .collect();
    report.placed = placer.events.len();

    let seed_size = match options.seed {
        None => 1,
        Some(Boundary::Count(n)) => n,
        Some(Boundary::Before(_)) => seed_events.unwrap_or(placer.events.len()),
    }
    .clamp(1, placer.events.len());
    let log = ArrivalLog {
        seed_size,
        events: placer.events,
        labels: placer.labels,
    };
    Ok((log, report))
}

/// Renders a normalised log. Attachments are written newcomer-first and an
/// inner edge touching a node whose arrival is still open is written with
/// that node second, so the event kinds survive a round trip.
pub fn render_log(log: &ArrivalLog) -> String {
    let mut s = String::with_capacity(log.len() * 12 + 64);
    let _ = writeln!(s, "# {LOG_MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(s, "# seed_size {}", log.seed_size);
    let mut open = None;
    for e in &log.events {
        let (u, v) = match e.kind {
            EventKind::InnerEdge if open == Some(e.u) => (e.v, e.u),
            _ => (e.u, e.v),
        };
        open = match e.kind {
            EventKind::NewNode | EventKind::NewNodeExtra => Some(e.u),
            _ => None,
        };
        let _ = writeln!(s, "{} {}", log.labels[u.index()], log.labels[v.index()]);
    }
    s
}

/// Reads a plain edge log as an arrival log, taking the seed size from the
/// header unless `seed` overrides it.
pub fn read_log(
    path: &Path,
    seed: Option<Boundary>,
) -> Result<(ArrivalLog, NormalizeReport), IoError> {
    let parsed = parse_edge_file(path, EdgeFormat::Plain)?;
    if !parsed.malformed.is_empty() {
        return Err(IoError::Malformed(parsed.malformed));
    }
    let seed = seed.or(parsed.header_seed_size.map(Boundary::Count));
    let options = NormalizeOptions {
        seed,
        oriented: parsed.normalized,
        ..Default::default()
    };
    normalize_connected_order(&parsed.records, &options)
}

/// Builds a graph from an edge list without reordering; duplicates are ignored.
pub fn graph_from_records(records: &[RawEdgeRecord]) -> EvolvingGraph {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut edges = Vec::with_capacity(records.len());
    let mut seen = HashSet::new();
    for r in records {
        let next = ids.len();
        let u = *ids.entry(&r.u).or_insert(next);
        let next = ids.len();
        let v = *ids.entry(&r.v).or_insert(next);
        if seen.insert((u.min(v), u.max(v))) {
            edges.push((NodeId::from(u), NodeId::from(v)));
        }
    }
    EvolvingGraph::from_edges(ids.len(), edges)
}

/// Writes `contents` to a temporary file beside `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let err = |source| IoError::Write {
        path: path.display().to_string(),
        source,
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(err)
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("model spec error at column {column}: {message}")]
pub struct SpecError {
    /// 1-based character column; 0 when the error concerns the whole expression.
    pub column: usize,
    pub message: String,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn error<T>(&self, at: usize, message: impl Into<String>) -> Result<T, SpecError> {
        Err(SpecError {
            column: self.text[..at].chars().count() + 1,
            message: message.into(),
        })
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += self.peek().map_or(0, char::len_utf8);
        }
        &self.text[start..self.pos]
    }

    fn number(&mut self) -> Result<f64, SpecError> {
        self.skip_ws();
        let start = self.pos;
        let token =
            self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'));
        match token.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => self.error(start, format!("expected a number, found `{token}`")),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SpecError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(self.pos, format!("expected `{c}`"))
        }
    }

    fn atom(&mut self) -> Result<ComponentKind, SpecError> {
        self.skip_ws();
        let start = self.pos;
        let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        Ok(match name {
            "null" => ComponentKind::Null,
            "degree" => ComponentKind::Degree,
            "triangle" => ComponentKind::Triangle,
            "singleton" => ComponentKind::Singleton,
            "doubleton" => ComponentKind::Doubleton,
            "pfp" => {
                self.expect('(')?;
                let delta = self.number()?;
                self.expect(')')?;
                ComponentKind::Pfp(delta)
            }
            "" => return self.error(start, "expected a component"),
            other => return self.error(start, format!("unknown component `{other}`")),
        })
    }
}

/// Parses `w*atom + w*atom + ...`; a lone atom means weight 1.
pub fn parse_mixture(text: &str) -> Result<Mixture, SpecError> {
    let mut c = Cursor { text, pos: 0 };
    let mut terms = Vec::new();
    let mut bare = false;
    loop {
        c.skip_ws();
        let start = c.pos;
        let weighted = c.peek().is_some_and(|ch| ch.is_ascii_digit() || ch == '.');
        let weight = if weighted {
            let w = c.number()?;
            c.expect('*')?;
            if !(0.0..=1.0).contains(&w) {
                return c.error(start, format!("weight {w} is outside [0, 1]"));
            }
            w
        } else {
            bare = true;
            1.0
        };
        terms.push(Term::new(weight, c.atom()?));
        c.skip_ws();
        match c.peek() {
            None => break,
            Some('+') => c.pos += 1,
            Some(ch) => return c.error(c.pos, format!("unexpected `{ch}`")),
        }
    }
    if bare && terms.len() > 1 {
        return Err(SpecError {
            column: 0,
            message: "every term of a sum needs a weight".into(),
        });
    }
    Mixture::with_tolerance(terms, SPEC_WEIGHT_TOLERANCE).map_err(|e| SpecError {
        column: 0,
        message: match e {
            ModelError::WeightSum(sum) => format!("weights sum to {sum}, not 1"),
            other => other.to_string(),
        },
    })
}

/// Parses a model: either one expression used for both streams, or lines
/// `newnode: <expr>` and `inneredge: <expr>` (`#` starts a comment).
pub fn parse_model_spec(text: &str) -> Result<MixtureModel, SpecError> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    if !lines.iter().any(|l| l.contains(':')) {
        return parse_mixture(&lines.join(" ")).map(MixtureModel::uniform);
    }
    let (mut new_node, mut inner_edge) = (None, None);
    for line in lines {
        let Some((key, expr)) = line.split_once(':') else {
            return Err(SpecError {
                column: 0,
                message: format!("expected `stream: expression`, found `{line}`"),
            });
        };
        let slot = match key.trim() {
            "newnode" => &mut new_node,
            "inneredge" => &mut inner_edge,
            other => {
                return Err(SpecError {
                    column: 0,
                    message: format!("unknown stream `{other}`"),
                })
            }
        };
        *slot = Some(parse_mixture(expr)?);
    }
    match (new_node, inner_edge) {
        (Some(a), Some(b)) => Ok(MixtureModel::new(a, b)),
        (Some(a), None) => Ok(MixtureModel::uniform(a)),
        _ => Err(SpecError {
            column: 0,
            message: "missing `newnode:` line".into(),
        }),
    }
}

pub fn render_model_spec(model: &MixtureModel) -> String {
    format!(
        "newnode: {}\ninneredge: {}\n",
        model.new_node, model.inner_edge
    )
}

/// Parses a comma-separated component list such as `null,degree,pfp(0.05)`.
pub fn parse_components(text: &str) -> Result<Vec<ComponentKind>, SpecError> {
    let mut out = Vec::new();
    let mut c = Cursor { text, pos: 0 };
    loop {
        out.push(c.atom()?);
        c.skip_ws();
        match c.peek() {
            None => return Ok(out),
            Some(',') => c.pos += 1,
            Some(ch) => return c.error(c.pos, format!("unexpected `{ch}`")),
        }
    }
}

/// Formats `x` to three significant figures.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if e >= 2 {
        let scale = 10f64.powi(e - 2);
        format!("{:.0}", (x / scale).round() * scale)
    } else {
        format!("{:.*}", (2 - e) as usize, x)
    }
}

fn opt3(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.to_owned(), sig3)
}

fn opt_full(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.to_owned(), |v| v.to_string())
}

/// Left-aligned first column, right-aligned rest.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut s = String::new();
    let mut line = |cells: &[&str]| {
        let mut l = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(l, "{cell:<w$}");
            } else {
                let _ = write!(l, "  {cell:>w$}");
            }
        }
        s.push_str(l.trim_end());
        s.push('\n');
    };
    line(header);
    for row in rows {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    s
}

/// Tab-separated `key\tvalue` lines led by the format version.
pub struct Record {
    text: String,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        let mut r = Record {
            text: String::new(),
        };
        r.field("format-version", FORMAT_VERSION);
        r.field("kind", kind);
        r
    }

    pub fn field(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "{key}\t{value}");
        self
    }

    pub fn finish(&self) -> String {
        self.text.clone()
    }
}

fn stream_row(name: &str, r: &StreamReport) -> Vec<String> {
    vec![
        name.to_owned(),
        r.choice_count.to_string(),
        format!("{:.4}", r.log_likelihood),
        format!("{:.4}", r.deviance),
        format!("{:.4}", r.null_deviance),
        format!("{:.4}", r.per_choice_ratio),
        r.free_parameters.to_string(),
        format!("{:.4}", r.aic),
    ]
}

pub fn render_likelihood_human(model: &MixtureModel, report: &LikelihoodReport) -> String {
    let mut s = format!(
        "model    newnode: {}\n         inneredge: {}\nwindow   events {}..{}\n",
        model.new_node, model.inner_edge, report.window.start, report.window.end
    );
    if let Some(eps) = report.floor {
        let _ = writeln!(s, "floor    {eps}");
    }
    s.push('\n');
    s.push_str(&table(
        &["stream", "choices", "log_L", "D", "D0", "c0", "k", "AIC"],
        &[
            stream_row("newnode", &report.new_node),
            stream_row("inneredge", &report.inner_edge),
            stream_row("overall", &report.overall),
        ],
    ));
    for (name, r) in [
        ("newnode", &report.new_node),
        ("inneredge", &report.inner_edge),
    ] {
        if !r.zero_probability_events.is_empty() {
            let _ = writeln!(
                s,
                "warning: {} {name} events have zero probability (first at event {})",
                r.zero_probability_events.len(),
                r.zero_probability_events[0]
            );
        }
    }
    s
}

pub fn render_likelihood_machine(model: &MixtureModel, report: &LikelihoodReport) -> String {
    let mut rec = Record::new("evaluate");
    rec.field("model.newnode", &model.new_node)
        .field("model.inneredge", &model.inner_edge)
        .field("window.start", report.window.start)
        .field("window.end", report.window.end)
        .field(
            "floor",
            report
                .floor
                .map_or_else(|| "none".to_owned(), |f| f.to_string()),
        );
    for (name, r) in [
        ("newnode", &report.new_node),
        ("inneredge", &report.inner_edge),
        ("overall", &report.overall),
    ] {
        rec.field(&format!("{name}.choices"), r.choice_count)
            .field(&format!("{name}.log_likelihood"), r.log_likelihood)
            .field(
                &format!("{name}.null_log_likelihood"),
                r.null_log_likelihood,
            )
            .field(&format!("{name}.deviance"), r.deviance)
            .field(&format!("{name}.null_deviance"), r.null_deviance)
            .field(&format!("{name}.c0"), r.per_choice_ratio)
            .field(&format!("{name}.free_parameters"), r.free_parameters)
            .field(&format!("{name}.aic"), r.aic)
            .field(
                &format!("{name}.zero_probability_events"),
                r.zero_probability_events.len(),
            );
    }
    rec.finish()
}

const STATS_HEADER: [&str; 10] = [
    "graph", "nodes", "edges", "d1", "d2", "mean_d", "mean_d2", "dmax", "r", "gamma",
];

pub fn render_stats_human(rows: &[(String, StatsSummary)]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, s)| {
            vec![
                name.clone(),
                s.node_count.to_string(),
                s.edge_count.to_string(),
                sig3(s.frac_degree_1),
                sig3(s.frac_degree_2),
                sig3(s.mean_degree),
                sig3(s.mean_square_degree),
                s.max_degree.to_string(),
                opt3(s.assortativity),
                opt3(s.mean_clustering),
            ]
        })
        .collect();
    table(&STATS_HEADER, &rows)
}

pub fn render_stats_machine(rows: &[(String, StatsSummary)]) -> String {
    let mut rec = Record::new("stats");
    rec.field("rows", rows.len());
    for (i, (name, s)) in rows.iter().enumerate() {
        let p = format!("row{i}");
        rec.field(&format!("{p}.graph"), name)
            .field(&format!("{p}.nodes"), s.node_count)
            .field(&format!("{p}.edges"), s.edge_count)
            .field(&format!("{p}.d1"), s.frac_degree_1)
            .field(&format!("{p}.d2"), s.frac_degree_2)
            .field(&format!("{p}.mean_degree"), s.mean_degree)
            .field(&format!("{p}.mean_square_degree"), s.mean_square_degree)
            .field(&format!("{p}.max_degree"), s.max_degree)
            .field(&format!("{p}.assortativity"), opt_full(s.assortativity))
            .field(&format!("{p}.mean_clustering"), opt_full(s.mean_clustering));
    }
    rec.finish()
}

pub fn render_fit_human(fit: &FitResult) -> String {
    let rows: Vec<Vec<String>> = (0..fit.components.len())
        .map(|i| {
            vec![
                fit.components[i].to_string(),
                format!("{:.4}", fit.betas[i]),
                format!("{:.4}", fit.least_squares_betas[i]),
                format!("{:.4}", fit.unconstrained[i]),
                format!("{:.4}", fit.standard_errors[i]),
                if fit.significant[i] { "yes" } else { "no" }.to_owned(),
            ]
        })
        .collect();
    let mut s = format!("stream   {}\n", fit.stream.name());
    s.push_str(&table(
        &[
            "component",
            "beta",
            "beta_ls",
            "beta_ols",
            "se",
            "significant",
        ],
        &rows,
    ));
    let _ = writeln!(s, "model    {}", fit.mixture());
    let _ = writeln!(s, "D        {:.4}", fit.fit_deviance);
    let _ = writeln!(s, "c0       {:.4}", fit.per_choice_ratio);
    let _ = writeln!(s, "cond     {}", sig3(fit.condition_number));
    if let Some(c) = fit.condition_warning() {
        let _ = writeln!(
            s,
            "warning: components are nearly collinear (condition number {})",
            sig3(c)
        );
    }
    for w in &fit.warnings {
        if let crate::fit::FitWarning::NoPositiveWeight { fallback } = w {
            let _ = writeln!(
                s,
                "warning: no positive least-squares weight; started from {fallback}"
            );
        }
    }
    s
}

pub fn render_fit_machine(fit: &FitResult, rec: &mut Record) {
    let p = fit.stream.name();
    rec.field(&format!("{p}.model"), fit.mixture())
        .field(&format!("{p}.deviance"), fit.fit_deviance)
        .field(&format!("{p}.c0"), fit.per_choice_ratio)
        .field(&format!("{p}.condition_number"), fit.condition_number)
        .field(&format!("{p}.collinear"), fit.condition_warning().is_some());
    for (i, k) in fit.components.iter().enumerate() {
        let q = format!("{p}.{k}");
        rec.field(&format!("{q}.beta"), fit.betas[i])
            .field(&format!("{q}.beta_ls"), fit.least_squares_betas[i])
            .field(&format!("{q}.beta_ols"), fit.unconstrained[i])
            .field(&format!("{q}.se"), fit.standard_errors[i])
            .field(&format!("{q}.significant"), fit.significant[i]);
    }
}

pub fn render_scan_human(scan: &DeltaScan) -> String {
    let rows: Vec<Vec<String>> = scan
        .table
        .iter()
        .map(|p| {
            vec![
                format!("{}", p.delta),
                format!("{:.6}", p.per_choice_ratio),
                format!("{:.4}", p.deviance),
            ]
        })
        .collect();
    let mut s = table(&["delta", "c0", "D"], &rows);
    let _ = writeln!(
        s,
        "best delta {} (c0 {:.6})",
        scan.best_delta, scan.best_ratio
    );
    s
}

pub fn render_scan_machine(scan: &DeltaScan) -> String {
    let mut rec = Record::new("scan");
    rec.field("best_delta", scan.best_delta)
        .field("best_c0", scan.best_ratio)
        .field("points", scan.table.len());
    for (i, p) in scan.table.iter().enumerate() {
        rec.field(
            &format!("point{i}"),
            format!("{}\t{}\t{}", p.delta, p.per_choice_ratio, p.deviance),
        );
    }
    rec.finish()
}

/// Run manifest of a growth run.
pub fn render_manifest(recipe: &GrowthRecipe, outcome: &GrowthOutcome) -> String {
    let mut rec = Record::new("grow-manifest");
    let seed = match &recipe.seed {
        SeedSpec::SingleEdge => "single-edge".to_owned(),
        SeedSpec::LogPrefix { events, .. } => format!("log-prefix {events}"),
    };
    let dist = |d: &crate::generate::EmpiricalDistribution| {
        d.iter()
            .map(|(v, p)| format!("{v}:{p}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    rec.field("rng.algorithm", RNG_ALGORITHM)
        .field("rng.seed", recipe.rng_seed)
        .field("seed", seed)
        .field("model.newnode", &recipe.inner.new_node)
        .field("model.inneredge", &recipe.inner.inner_edge)
        .field("outer.attachments", dist(&recipe.outer.edges_per_new_node))
        .field(
            "outer.inner_per_arrival",
            dist(&recipe.outer.inner_edges_per_arrival),
        )
        .field("target_edges", recipe.target_edges)
        .field("nodes", outcome.graph.node_count())
        .field("edges", outcome.graph.edge_count())
        .field(
            "warnings.capped_attachments",
            outcome.warnings.capped_attachments,
        )
        .field(
            "warnings.failed_inner_draws",
            outcome.warnings.failed_inner_draws,
        )
        .field(
            "warnings.abandoned_bursts",
            outcome.warnings.abandoned_bursts,
        );
    rec.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, format: EdgeFormat) -> ParsedEdges {
        parse_edge_log(text.as_bytes(), format).unwrap()
    }

    fn pairs(log: &ArrivalLog) -> Vec<(String, String)> {
        log.events
            .iter()
            .map(|e| {
                (
                    log.labels[e.u.index()].clone(),
                    log.labels[e.v.index()].clone(),
                )
            })
            .collect()
    }

    fn recs(p: &[(&str, &str)]) -> Vec<RawEdgeRecord> {
        p.iter().map(|(u, v)| RawEdgeRecord::new(u, v)).collect()
    }

    #[test]
    fn plain_and_timestamped_parsing() {
        let p = parse("1 2\n2 3\n", EdgeFormat::Plain);
        assert_eq!(p.records, recs(&[("1", "2"), ("2", "3")]));
        let t = parse("100 b a\n90 a c\n", EdgeFormat::Timestamped);
        let order: Vec<_> = t
            .records
            .iter()
            .map(|r| (r.u.as_str(), r.v.as_str()))
            .collect();
        assert_eq!(order, vec![("a", "c"), ("b", "a")]);
        let ties = parse("5 x y\n5 y z\n1 x w\n", EdgeFormat::Timestamped);
        let order: Vec<_> = ties
            .records
            .iter()
            .map(|r| (r.u.as_str(), r.v.as_str()))
            .collect();
        assert_eq!(order, vec![("x", "w"), ("x", "y"), ("y", "z")]);
    }

    #[test]
    fn self_loops_and_malformed_lines() {
        let p = parse("1 1\n1 2\n", EdgeFormat::Plain);
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.self_loops, 1);
        let p = parse("# comment\n1 2 3\n\n2 3\n", EdgeFormat::Plain);
        assert_eq!(p.malformed.len(), 1);
        assert_eq!(p.malformed[0].line, 2);
        assert!(matches!(
            parse_edge_log("x\n".as_bytes(), EdgeFormat::Plain),
            Err(IoError::NoRecords { .. })
        ));
        let t = parse("a b c\n1 b c\n", EdgeFormat::Timestamped);
        assert_eq!(t.malformed[0].line, 1);
    }

    #[test]
    fn connected_order_delays_edges() {
        let (log, report) = normalize_connected_order(
            &recs(&[("A", "B"), ("C", "D"), ("B", "C")]),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(
            pairs(&log),
            vec![
                ("A".into(), "B".into()),
                ("C".into(), "B".into()),
                ("D".into(), "C".into())
            ]
        );
        assert_eq!(report.delayed, 1);
        assert!(report.unplaced.is_empty());
        log.validate().unwrap();
    }

    #[test]
    fn duplicates_and_unplaced() {
        let (log, report) =
            normalize_connected_order(&recs(&[("A", "B"), ("B", "A")]), &Default::default())
                .unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(report.duplicates, 1);
        let (log, report) =
            normalize_connected_order(&recs(&[("A", "B"), ("C", "D")]), &Default::default())
                .unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(report.unplaced, vec![("C".to_owned(), "D".to_owned())]);
    }

    #[test]
    fn earliest_queued_ready_edge_goes_first() {
        // (B,C) brings C, readying (C,D) and (E,C); placing (C,D) brings D,
        // which readies (D,E), queued before (E,C)
        let input = recs(&[("A", "B"), ("C", "D"), ("D", "E"), ("E", "C"), ("B", "C")]);
        let (log, report) = normalize_connected_order(&input, &Default::default()).unwrap();
        let got: Vec<String> = pairs(&log)
            .into_iter()
            .map(|(u, v)| format!("{u}{v}"))
            .collect();
        assert_eq!(got, vec!["AB", "CB", "DC", "ED", "EC"]);
        assert_eq!(report.delayed, 3);
        log.validate().unwrap();
    }

    #[test]
    fn classification_groups_attachments() {
        let (log, _) = normalize_connected_order(
            &recs(&[
                ("a", "b"),
                ("c", "a"),
                ("c", "b"),
                ("d", "a"),
                ("e", "a"),
                ("d", "b"),
                ("b", "c"),
            ]),
            &Default::default(),
        )
        .unwrap();
        use crate::graph::EventKind::*;
        let kinds: Vec<_> = log.events.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![Initial, NewNode, NewNodeExtra, NewNode, NewNode, InnerEdge]
        );
        // (b, c) repeats (c, b) and is dropped before classification
        assert_eq!(log.validate().unwrap().edge_count(), 6);
    }

    #[test]
    fn warmup_filter_and_seed_boundaries() {
        let input: Vec<RawEdgeRecord> =
            [(1, "a", "b"), (2, "b", "c"), (3, "c", "d"), (4, "d", "e")]
                .iter()
                .map(|&(t, u, v)| RawEdgeRecord {
                    timestamp: Some(t),
                    ..RawEdgeRecord::new(u, v)
                })
                .collect();
        let opts = NormalizeOptions {
            warmup: Some(Boundary::Before(2)),
            seed: Some(Boundary::Before(4)),
            ..Default::default()
        };
        let (log, report) = normalize_connected_order(&input, &opts).unwrap();
        assert_eq!(report.trimmed, 1);
        assert_eq!(log.len(), 3);
        assert_eq!(log.seed_size, 2);
        let survivors = NormalizeOptions::survivors_from(&input[1..3]);
        let opts = NormalizeOptions {
            survivors: Some(survivors),
            seed: Some(Boundary::Count(5)),
            ..Default::default()
        };
        let (log, report) = normalize_connected_order(&input, &opts).unwrap();
        assert_eq!(report.filtered, 2);
        assert_eq!(log.seed_size, 2);
        let opts = NormalizeOptions {
            warmup: Some(Boundary::Count(9)),
            ..Default::default()
        };
        assert!(matches!(
            normalize_connected_order(&input, &opts),
            Err(IoError::EmptyAfterTrim)
        ));
    }

    #[test]
    fn log_round_trip_is_stable() {
        let (log, _) = normalize_connected_order(
            &recs(&[("x", "y"), ("q", "r"), ("y", "q"), ("x", "q")]),
            &Default::default(),
        )
        .unwrap();
        let text = render_log(&log);
        assert!(text.starts_with("# netgrowth-log format-version 1\n# seed_size 1\n"));
        let again = parse(&text, EdgeFormat::Plain);
        assert_eq!(again.header_seed_size, Some(1));
        let (log2, report) = normalize_connected_order(
            &again.records,
            &NormalizeOptions {
                seed: again.header_seed_size.map(Boundary::Count),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(log2, log);
        assert_eq!(report.delayed, 0);
        assert_eq!(render_log(&log2), text);
    }

    #[test]
    fn mixture_specs() {
        let m = parse_mixture("0.881*pfp(-0.22)+0.119*singleton").unwrap();
        assert_eq!(
            m.terms(),
            &[
                Term::new(0.881, ComponentKind::Pfp(-0.22)),
                Term::new(0.119, ComponentKind::Singleton)
            ]
        );
        assert_eq!(parse_mixture("null").unwrap(), Mixture::null());
        assert_eq!(
            parse_mixture(" 0.5 * degree + 0.5*null ")
                .unwrap()
                .terms()
                .len(),
            2
        );
        let e = parse_mixture("0.6*degree+0.6*null").unwrap_err();
        assert!(e.message.contains("1.2"), "{e}");
        let e = parse_mixture("0.5*degree+0.5*bogus").unwrap_err();
        assert_eq!(e.column, 16);
        assert!(e.message.contains("bogus"));
        assert!(parse_mixture("degree+null").is_err());
        assert!(parse_mixture("pfp(x)").is_err());
        assert!(parse_mixture("1.5*degree").is_err());
        let slack = parse_mixture("0.5*degree+0.5000005*null").unwrap();
        let sum: f64 = slack.terms().iter().map(|t| t.weight).sum();
        assert!((sum - 1.0).abs() < 1e-15);
        assert_eq!(
            parse_mixture("pfp(1e-2)").unwrap(),
            Mixture::pure(ComponentKind::Pfp(0.01))
        );
    }

    #[test]
    fn model_files_and_rendering() {
        let m =
            parse_model_spec("# fitted\nnewnode: 0.9*pfp(0.05)+0.1*singleton\ninneredge: degree\n")
                .unwrap();
        assert_eq!(m.inner_edge, Mixture::pure(ComponentKind::Degree));
        assert_eq!(parse_model_spec(&render_model_spec(&m)).unwrap(), m);
        assert_eq!(
            parse_model_spec("degree").unwrap(),
            MixtureModel::uniform(Mixture::pure(ComponentKind::Degree))
        );
        assert!(parse_model_spec("inneredge: degree").is_err());
        assert_eq!(
            parse_components("null, degree,pfp(0.05)").unwrap(),
            vec![
                ComponentKind::Null,
                ComponentKind::Degree,
                ComponentKind::Pfp(0.05)
            ]
        );
    }

    #[test]
    fn significant_figures() {
        assert_eq!(sig3(0.0), "0");
        assert_eq!(sig3(2.0 / 3.0), "0.667");
        assert_eq!(sig3(4.0 / 3.0), "1.33");
        assert_eq!(sig3(12.345), "12.3");
        assert_eq!(sig3(123.45), "123");
        assert_eq!(sig3(12345.0), "12300");
        assert_eq!(sig3(-0.5), "-0.500");
        assert_eq!(opt3(None), "undefined");
    }

    #[test]
    fn records_are_tab_separated() {
        let mut r = Record::new("test");
        r.field("x", 0.1);
        assert_eq!(r.finish(), "format-version\t1\nkind\ttest\nx\t0.1\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("netgrowth-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.log");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
