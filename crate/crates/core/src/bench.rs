//! Import/export benchmarks across formats and JXES backends.
//!
//! Each case runs once untimed, then `runs` times. Memory is the allocator
//! high-water mark above the level at the start of a run, which requires
//! [`TrackingAllocator`] to be installed as the global allocator; without
//! it memory cells are left empty.

use std::alloc::{GlobalAlloc, Layout, System};
use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_log, write_log, LogFormat};
use crate::jxes::{BackendKind, ParseOptions};
use crate::model::EventLog;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);
static ACTIVE: AtomicBool = AtomicBool::new(false);

/// System allocator wrapper that tracks live bytes and their high-water
/// mark.
pub struct TrackingAllocator;

unsafe impl GlobalAlloc for TrackingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            grow(layout.size());
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc_zeroed(layout) };
        if !p.is_null() {
            grow(layout.size());
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = unsafe { System.realloc(ptr, layout, new_size) };
        if !p.is_null() {
            if new_size >= layout.size() {
                grow(new_size - layout.size());
            } else {
                CURRENT.fetch_sub(layout.size() - new_size, Ordering::Relaxed);
            }
        }
        p
    }
}

fn grow(n: usize) {
    ACTIVE.store(true, Ordering::Relaxed);
    let now = CURRENT.fetch_add(n, Ordering::Relaxed) + n;
    PEAK.fetch_max(now, Ordering::Relaxed);
}

pub mod memory {
    use super::*;

    /// Whether the tracking allocator is serving this process.
    pub fn is_active() -> bool {
        ACTIVE.load(Ordering::Relaxed)
    }

    pub fn current() -> usize {
        CURRENT.load(Ordering::Relaxed)
    }

    /// Resets the high-water mark to the current level and returns it.
    pub fn reset_peak() -> usize {
        let now = CURRENT.load(Ordering::Relaxed);
        PEAK.store(now, Ordering::Relaxed);
        now
    }

    pub fn peak() -> usize {
        PEAK.load(Ordering::Relaxed)
    }

    /// Runs `f` and returns its result with the peak bytes allocated above
    /// the starting level.
    pub fn measure<T>(f: impl FnOnce() -> T) -> (T, usize) {
        let base = reset_peak();
        let out = f();
        (out, peak().saturating_sub(base))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Import,
    Export,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Import, Direction::Export];

    fn title(self) -> &'static str {
        match self {
            Direction::Import => "Import",
            Direction::Export => "Export",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCase {
    pub input_path: PathBuf,
    pub format: LogFormat,
    pub direction: Direction,
    /// Only meaningful for the JXES formats.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendKind>,
    #[serde(default = "default_runs")]
    pub runs: usize,
}

fn default_runs() -> usize {
    3
}

impl BenchCase {
    pub fn new(input: impl Into<PathBuf>, format: LogFormat, direction: Direction, backend: Option<BackendKind>) -> Self {
        BenchCase {
            input_path: input.into(),
            format,
            direction,
            backend: if format.is_jxes() { Some(backend.unwrap_or_default()) } else { None },
            runs: default_runs(),
        }
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.runs = runs;
        self
    }

    /// Column label, e.g. `JXES-tree` or `XES-gz`.
    pub fn column(&self) -> String {
        match (self.format.is_jxes(), self.backend) {
            (true, Some(b)) => format!("{}-{}", self.format, b),
            _ => self.format.to_string(),
        }
    }

    pub fn row(&self) -> String {
        self.input_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.input_path.display().to_string())
    }

    fn backend_or_default(&self) -> BackendKind {
        self.backend.unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStats {
    pub mean_ms: f64,
    pub run_ms: Vec<f64>,
    /// Mean over the runs; absent when allocations are not tracked.
    pub peak_bytes: Option<u64>,
    pub output_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: BenchCase,
    #[serde(flatten)]
    pub outcome: CaseOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CaseOutcome {
    Ok(CaseStats),
    Failed { error: String },
}

impl CaseResult {
    pub fn stats(&self) -> Option<&CaseStats> {
        match &self.outcome {
            CaseOutcome::Ok(s) => Some(s),
            CaseOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub host: String,
    pub timestamp: String,
    pub notes: Vec<String>,
    pub results: Vec<CaseResult>,
}

pub fn arithmetic_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn host_description() -> String {
    let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{}-{}, {cpus} cpus", std::env::consts::OS, std::env::consts::ARCH)
}

/// Runs every case in order. A failing case is recorded and the remaining
/// cases still run. Scratch files go to `scratch_dir`.
pub fn run_bench(cases: &[BenchCase], scratch_dir: &Path) -> Result<BenchReport> {
    std::fs::create_dir_all(scratch_dir)?;
    let mut inputs: HashMap<PathBuf, std::result::Result<EventLog, String>> = HashMap::new();
    let mut results = Vec::with_capacity(cases.len());
    for (i, case) in cases.iter().enumerate() {
        let outcome = match run_case(i, case, scratch_dir, &mut inputs) {
            Ok(stats) => CaseOutcome::Ok(stats),
            Err(e) => {
                log::warn!("bench case {} {} failed: {e}", case.row(), case.column());
                CaseOutcome::Failed { error: e.to_string() }
            }
        };
        results.push(CaseResult {
            case: case.clone(),
            outcome,
        });
    }
    let mut notes = vec!["each case ran once untimed before the measured runs".to_owned()];
    if !memory::is_active() {
        notes.push("allocation tracking inactive; memory not measured".to_owned());
    }
    Ok(BenchReport {
        host: host_description(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        notes,
        results,
    })
}

fn load_input(path: &Path) -> Result<EventLog> {
    let format = LogFormat::from_path(path)
        .ok_or_else(|| Error::InvalidBench(format!("cannot infer the format of {}", path.display())))?;
    Ok(read_log(path, format, &ParseOptions::default())?.0)
}

fn run_case(
    index: usize,
    case: &BenchCase,
    scratch: &Path,
    inputs: &mut HashMap<PathBuf, std::result::Result<EventLog, String>>,
) -> Result<CaseStats> {
    if case.runs == 0 {
        return Err(Error::InvalidBench("runs must be at least 1".into()));
    }
    let log = inputs
        .entry(case.input_path.clone())
        .or_insert_with(|| load_input(&case.input_path).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::InvalidBench(format!("{}: {e}", case.input_path.display())))?;
    let backend = case.backend_or_default();
    let file = scratch.join(format!("case{index}.{}", case.format.extension()));
    let mut run_ms = Vec::with_capacity(case.runs);
    let mut peaks = Vec::with_capacity(case.runs);
    let mut output_bytes = None;

    match case.direction {
        Direction::Import => {
            write_log(log, &file, case.format, BackendKind::Streaming)?;
            let opts = ParseOptions::new(backend);
            for run in 0..=case.runs {
                let start = Instant::now();
                let (parsed, peak) = memory::measure(|| read_log(&file, case.format, &opts));
                let ms = start.elapsed().as_secs_f64() * 1e3;
                drop(parsed?);
                if run > 0 {
                    run_ms.push(ms);
                    peaks.push(peak);
                }
            }
        }
        Direction::Export => {
            for run in 0..=case.runs {
                let start = Instant::now();
                let (written, peak) = memory::measure(|| write_log(log, &file, case.format, backend));
                let ms = start.elapsed().as_secs_f64() * 1e3;
                let size = written?;
                if run > 0 {
                    run_ms.push(ms);
                    peaks.push(peak);
                    output_bytes = Some(size);
                }
            }
        }
    }
    let _ = std::fs::remove_file(&file);
    Ok(CaseStats {
        mean_ms: arithmetic_mean(&run_ms),
        run_ms,
        peak_bytes: memory::is_active()
            .then(|| (peaks.iter().map(|&p| p as f64).sum::<f64>() / peaks.len() as f64).round() as u64),
        output_bytes,
    })
}

/// Bench suite file: either explicit `cases`, or the cross product of
/// `inputs`, `targets` and `directions`. Relative paths resolve against
/// the suite file's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSuite {
    pub inputs: Vec<PathBuf>,
    pub targets: Vec<Target>,
    pub directions: Vec<Direction>,
    pub runs: Option<usize>,
    pub cases: Vec<BenchCase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub format: LogFormat,
    #[serde(default)]
    pub backend: Option<BackendKind>,
}

impl BenchSuite {
    pub fn load(path: &Path) -> Result<Vec<BenchCase>> {
        let text = std::fs::read_to_string(path)?;
        let suite: BenchSuite = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidBench(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        suite.expand(base)
    }

    pub fn expand(&self, base: &Path) -> Result<Vec<BenchCase>> {
        let runs = self.runs.unwrap_or_else(default_runs);
        let mut cases: Vec<BenchCase> = self.cases.clone();
        let directions = if self.directions.is_empty() { Direction::ALL.to_vec() } else { self.directions.clone() };
        for input in &self.inputs {
            for &direction in &directions {
                for t in &self.targets {
                    cases.push(BenchCase::new(input.clone(), t.format, direction, t.backend).with_runs(runs));
                }
            }
        }
        for c in &mut cases {
            if c.input_path.is_relative() {
                c.input_path = base.join(&c.input_path);
            }
        }
        if cases.is_empty() {
            return Err(Error::InvalidBench("the suite defines no cases".into()));
        }
        Ok(cases)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[serde(alias = "md")]
    Markdown,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            _ => Err(format!("unknown table format {s:?} (expected md or csv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Time,
    Memory,
    Size,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Time, Metric::Memory, Metric::Size];

    fn title(self, d: Direction) -> String {
        match self {
            Metric::Time => format!("{} speed (ms)", d.title()),
            Metric::Memory => format!("{} memory (bytes)", d.title()),
            Metric::Size => "Log file size (bytes)".to_owned(),
        }
    }

    fn value(self, s: &CaseStats) -> Option<f64> {
        match self {
            Metric::Time => Some(s.mean_ms),
            Metric::Memory => s.peak_bytes.map(|b| b as f64),
            Metric::Size => s.output_bytes.map(|b| b as f64),
        }
    }

    fn format(self, x: f64) -> String {
        match self {
            Metric::Time => format!("{x:.2}"),
            Metric::Memory | Metric::Size => format!("{x:.0}"),
        }
    }

    fn applies_to(self, d: Direction) -> bool {
        self != Metric::Size || d == Direction::Export
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Error,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub metric: Metric,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Cell>)>,
}

impl Table {
    /// Column of the row minimum; ties go to the earliest column.
    pub fn best(&self, row: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.rows[row].1.iter().enumerate() {
            if let Cell::Value(x) = c {
                if best.is_none_or(|(_, b)| *x < b) {
                    best = Some((i, *x));
                }
            }
        }
        best.map(|(i, _)| i)
    }
}

fn first_seen<T: PartialEq>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// One table per metric and direction, rows by input and columns by
/// format/backend.
pub fn build_tables(report: &BenchReport) -> Result<Vec<Table>> {
    if report.results.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut tables = Vec::new();
    for metric in Metric::ALL {
        for direction in Direction::ALL {
            if !metric.applies_to(direction) {
                continue;
            }
            let results: Vec<&CaseResult> = report.results.iter().filter(|r| r.case.direction == direction).collect();
            if results.is_empty() {
                continue;
            }
            if metric == Metric::Memory && !results.iter().any(|r| r.stats().is_some_and(|s| s.peak_bytes.is_some())) {
                continue;
            }
            let columns = first_seen(results.iter().map(|r| r.case.column()));
            let row_names = first_seen(results.iter().map(|r| r.case.row()));
            let rows = row_names
                .into_iter()
                .map(|name| {
                    let cells = columns
                        .iter()
                        .map(|col| {
                            match results.iter().find(|r| r.case.row() == name && &r.case.column() == col) {
                                None => Cell::Empty,
                                Some(r) => match r.stats() {
                                    None => Cell::Error,
                                    Some(s) => metric.value(s).map_or(Cell::Empty, Cell::Value),
                                },
                            }
                        })
                        .collect();
                    (name, cells)
                })
                .collect();
            tables.push(Table {
                title: metric.title(direction),
                metric,
                columns,
                rows,
            });
        }
    }
    Ok(tables)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Renders the tables. The best cell of each row is bold in markdown and
/// suffixed with `*` in CSV; failed cases show `ERROR`.
pub fn render_tables(report: &BenchReport, format: TableFormat) -> Result<String> {
    let tables = build_tables(report)?;
    let mut out = String::new();
    for (ti, t) in tables.iter().enumerate() {
        if ti > 0 {
            out.push('\n');
        }
        let cell = |row: usize, i: usize| -> String {
            let best = t.best(row) == Some(i);
            match &t.rows[row].1[i] {
                Cell::Empty => String::new(),
                Cell::Error => "ERROR".into(),
                Cell::Value(x) => {
                    let v = t.metric.format(*x);
                    match (best, format) {
                        (false, _) => v,
                        (true, TableFormat::Markdown) => format!("**{v}**"),
                        (true, TableFormat::Csv) => format!("{v}*"),
                    }
                }
            }
        };
        match format {
            TableFormat::Markdown => {
                let _ = writeln!(out, "### {}\n", t.title);
                let _ = writeln!(out, "| input | {} |", t.columns.join(" | "));
                let _ = writeln!(out, "|---|{}", "---|".repeat(t.columns.len()));
                for (r, (name, cells)) in t.rows.iter().enumerate() {
                    let cells: Vec<String> = (0..cells.len()).map(|i| cell(r, i)).collect();
                    let _ = writeln!(out, "| {} | {} |", name, cells.join(" | "));
                }
            }
            TableFormat::Csv => {
                let header: Vec<String> = std::iter::once(t.title.clone()).chain(t.columns.iter().cloned()).collect();
                let _ = writeln!(out, "{}", header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
                for (r, (name, cells)) in t.rows.iter().enumerate() {
                    let fields: Vec<String> =
                        std::iter::once(csv_field(name)).chain((0..cells.len()).map(|i| cell(r, i))).collect();
                    let _ = writeln!(out, "{}", fields.join(","));
                }
            }
        }
    }
    Ok(out)
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Import => "import",
            Direction::Export => "export",
        })
    }
}
