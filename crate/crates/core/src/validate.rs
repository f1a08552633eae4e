//! Structural and model-level checks on JXES documents.
//!
//! Structural findings come from the same tree walk the reader uses, so a
//! document yields an error diagnostic exactly when [`crate::parse_jxes`]
//! fails on it. Model-level checks (globals, classifier keys) run only on
//! structurally sound documents and produce warnings.

use std::fmt;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Warning};
use crate::io::MaybeGz;
use crate::json::{JsonTree, Path};
use crate::jxes::{ReadContext, TreeReader, KEY_CLASSIFIERS, KEY_EVENTS, KEY_TRACES};
use crate::model::{AttrMap, EventLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub json_path: String,
    pub message: String,
}

impl Diagnostic {
    fn from_error(err: &Error) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: err.code().to_owned(),
            json_path: err.path().unwrap_or("$").to_owned(),
            message: err.to_string(),
        }
    }

    fn from_warning(w: Warning) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: w.code.to_owned(),
            json_path: w.path,
            message: w.message,
        }
    }

    fn warning(code: &str, path: impl fmt::Display, message: String) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.to_owned(),
            json_path: path.to_string(),
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} at {}: {}", self.severity, self.code, self.json_path, self.message)
    }
}

/// Validates a JXES document (plain or gzip-compressed) with lenient key
/// handling.
pub fn validate_document(input: &[u8]) -> Vec<Diagnostic> {
    validate_with(input, false)
}

/// With `strict`, unknown and duplicate keys are errors, matching a strict
/// parse.
pub fn validate_with(input: &[u8], strict: bool) -> Vec<Diagnostic> {
    let mut bytes = Vec::new();
    let read = MaybeGz::new(input).and_then(|mut r| r.read_to_end(&mut bytes));
    if let Err(e) = read {
        return vec![Diagnostic::from_error(&Error::Io(e))];
    }
    let tree = match JsonTree::parse(&bytes) {
        Ok(t) => t,
        Err(e) => return vec![Diagnostic::from_error(&e)],
    };
    drop(bytes);

    let mut ctx = ReadContext::new(strict);
    let mut reader = TreeReader::new(&mut ctx);
    let log = reader.read_log(tree);
    let mut out: Vec<Diagnostic> = reader.errors.iter().map(Diagnostic::from_error).collect();
    out.extend(ctx.warnings.into_iter().map(Diagnostic::from_warning));
    if out.iter().any(Diagnostic::is_error) {
        return out;
    }
    if let Some(log) = log {
        check_model(&log, &mut out);
    }
    out
}

fn missing_globals(globals: &AttrMap, attrs: &AttrMap, path: &Path<'_>, level: &str, out: &mut Vec<Diagnostic>) {
    for key in globals.keys() {
        if !attrs.contains_key(key) {
            out.push(Diagnostic::warning(
                "GlobalNotSatisfied",
                path,
                format!("{level} lacks the global attribute {key:?}"),
            ));
        }
    }
}

fn check_model(log: &EventLog, out: &mut Vec<Diagnostic>) {
    let root = Path::ROOT;
    let traces = root.key(KEY_TRACES);
    for (i, trace) in log.traces.iter().enumerate() {
        let tpath = traces.index(i);
        missing_globals(&log.globals.trace_level, &trace.attributes, &tpath, "trace", out);
        if log.globals.event_level.is_empty() {
            continue;
        }
        let events = tpath.key(KEY_EVENTS);
        for (j, event) in trace.events.iter().enumerate() {
            missing_globals(&log.globals.event_level, &event.attributes, &events.index(j), "event", out);
        }
    }
    let classifiers = root.key(KEY_CLASSIFIERS);
    for (name, keys) in &log.classifiers {
        for key in keys {
            if !log.globals.event_level.contains_key(key) {
                out.push(Diagnostic::warning(
                    "ClassifierKeyNotGlobal",
                    classifiers.key(name),
                    format!("classifier key {key:?} is not an event-level global attribute"),
                ));
            }
        }
    }
}

pub fn error_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.is_error()).count()
}

/// One diagnostic per line.
pub fn render_text(diags: &[Diagnostic]) -> String {
    let mut s = String::new();
    for d in diags {
        s.push_str(&d.to_string());
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct Report<'a> {
    errors: usize,
    warnings: usize,
    diagnostics: &'a [Diagnostic],
}

/// JSON report: counts plus the diagnostics array.
pub fn render_json(diags: &[Diagnostic]) -> String {
    let errors = error_count(diags);
    let report = Report {
        errors,
        warnings: diags.len() - errors,
        diagnostics: diags,
    };
    serde_json::to_string_pretty(&report).expect("diagnostics serialize")
}
