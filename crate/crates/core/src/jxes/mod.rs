//! JXES: the JSON encoding of an event log.
//!
//! A document is an object with the optional sections `attrs` (log
//! attributes), `global-attrs` (`trace` and `event` scopes), `classifiers`
//! (name to key list), `extensions` (array of `name`/`prefix`/`uri`) and
//! `traces` (array of objects with `attrs` and `events`). Each event is an
//! object mapping attribute keys to values.
//!
//! Value kinds are inferred from the JSON: strings that are valid ISO-8601
//! instants become dates, numbers spelled with `.` or an exponent become
//! floats, arrays of objects become lists, and objects become containers,
//! except that an object holding `value` and/or `nested-attrs` is a nested
//! attribute. Those two keys are reserved for that purpose.

mod common;
mod stream_read;
mod tree_read;
mod writer;

use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use common::{
    classify_number, classify_string, is_reserved, KEY_ATTRS, KEY_CLASSIFIERS, KEY_EVENTS,
    KEY_EXTENSIONS, KEY_GLOBALS, KEY_NESTED, KEY_TRACES, KEY_VALUE, SCOPE_EVENT, SCOPE_TRACE,
};
pub use writer::{canonicalize, log_to_tree, to_jxes_vec, write_jxes};

pub(crate) use common::ReadContext;
pub(crate) use tree_read::TreeReader;

use crate::error::{Error, Result, Warning};
use crate::io::MaybeGz;
use crate::json::{JsonTree, Path};
use crate::model::{Attribute, AttributeValue, EventLog};

/// How a JXES document is parsed or produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Materialize the whole JSON tree, then convert it.
    #[default]
    Tree,
    /// Convert token by token without a document tree.
    Streaming,
}

impl BackendKind {
    pub const ALL: [BackendKind; 2] = [BackendKind::Tree, BackendKind::Streaming];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Tree => "tree",
            BackendKind::Streaming => "streaming",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "tree" => Ok(BackendKind::Tree),
            "streaming" | "stream" => Ok(BackendKind::Streaming),
            _ => Err(format!("unknown backend {s:?} (expected tree or streaming)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    pub backend: BackendKind,
    /// Turn unknown keys and duplicate keys into errors.
    pub strict: bool,
}

impl ParseOptions {
    pub fn new(backend: BackendKind) -> Self {
        ParseOptions {
            backend,
            strict: false,
        }
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }
}

/// Parses a JXES document (plain or gzip-compressed). Warnings are sent to
/// the `log` facade.
pub fn parse_jxes<R: Read>(input: R, opts: &ParseOptions) -> Result<EventLog> {
    let (log, warnings) = parse_jxes_with_warnings(input, opts)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(log)
}

/// Like [`parse_jxes`], returning the warnings instead of logging them.
pub fn parse_jxes_with_warnings<R: Read>(
    input: R,
    opts: &ParseOptions,
) -> Result<(EventLog, Vec<Warning>)> {
    let input = MaybeGz::new(BufReader::with_capacity(64 * 1024, input))?;
    parse_buffered(input, opts)
}

fn parse_buffered<R: BufRead>(mut input: R, opts: &ParseOptions) -> Result<(EventLog, Vec<Warning>)> {
    let mut ctx = ReadContext::new(opts.strict);
    let log = match opts.backend {
        BackendKind::Streaming => stream_read::StreamReader::new(input, &mut ctx).read_log()?,
        BackendKind::Tree => {
            let mut bytes = Vec::new();
            input.read_to_end(&mut bytes)?;
            let tree = JsonTree::parse(&bytes)?;
            drop(bytes);
            let mut reader = TreeReader::new(&mut ctx);
            let log = reader.read_log(tree);
            if let Some(err) = reader.errors.into_iter().next() {
                return Err(err);
            }
            log.expect("no errors recorded implies a log")
        }
    };
    Ok((log, ctx.warnings))
}

pub fn parse_jxes_str(text: &str, opts: &ParseOptions) -> Result<EventLog> {
    parse_jxes(text.as_bytes(), opts)
}

fn run_tree<T>(f: impl FnOnce(&mut TreeReader<'_>) -> Option<T>) -> Result<T> {
    let mut ctx = ReadContext::new(false);
    let mut reader = TreeReader::new(&mut ctx);
    let out = f(&mut reader);
    match reader.errors.into_iter().next() {
        Some(err) => Err(err),
        None => Ok(out.expect("no errors recorded implies a value")),
    }
}

/// Maps a JSON value to an attribute value. Objects carrying the reserved
/// nested-attribute keys are rejected here; use [`interpret_attribute`]
/// where a nested attribute is allowed.
pub fn infer_value(json: JsonTree) -> Result<AttributeValue> {
    run_tree(|r| r.value(json, &Path::ROOT))
}

/// Any JSON value in attribute position, including nested attributes.
pub fn interpret_attribute(json: JsonTree) -> Result<Attribute> {
    run_tree(|r| r.attribute(json, &Path::ROOT))
}

/// An object in attribute position: a nested attribute when it uses the
/// reserved keys, a container otherwise.
pub fn interpret_container(json: JsonTree) -> Result<Attribute> {
    match json {
        JsonTree::Object(members) => run_tree(|r| r.object_attribute(members, &Path::ROOT).map(|(a, _)| a)),
        other => Err(Error::schema(Path::ROOT, format!("expected an object, got {}", other.type_name()))),
    }
}

/// An array of objects, each contributing its members as list items.
pub fn interpret_list(json: JsonTree) -> Result<AttributeValue> {
    match json {
        JsonTree::Array(items) => run_tree(|r| r.list(items, &Path::ROOT)),
        other => Err(Error::schema(Path::ROOT, format!("expected an array, got {}", other.type_name()))),
    }
}
