//! JXES output.
//!
//! Top-level members always appear in the order `attrs`, `global-attrs`,
//! `classifiers`, `extensions`, `traces`, and empty sections are left out.
//! The streaming writer serializes the model directly; the tree writer
//! first converts it to a [`JsonTree`]. Both go through serde_json's
//! formatter, so their output is byte-identical.

use std::io::{BufWriter, Write};

use serde::ser::{self, Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use super::common::*;
use super::BackendKind;
use crate::error::{Error, Result};
use crate::json::JsonTree;
use crate::model::{AttrMap, Attribute, AttributeValue, EventLog, Trace};

/// Serializes `log` as JXES into `out`.
pub fn write_jxes<W: Write>(log: &EventLog, backend: BackendKind, pretty: bool, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    if pretty {
        emit(log, backend, &mut out, PrettyFormatter::with_indent(b"  "))?;
    } else {
        emit(log, backend, &mut out, CompactFormatter)?;
    }
    out.flush()?;
    Ok(())
}

fn emit<W: Write, F: Formatter>(log: &EventLog, backend: BackendKind, out: W, fmt: F) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(out, fmt);
    match backend {
        BackendKind::Streaming => LogSer(log).serialize(&mut ser),
        BackendKind::Tree => log_to_tree(log)?.serialize(&mut ser),
    }
    .map_err(Error::from_serde)
}

pub fn to_jxes_vec(log: &EventLog, backend: BackendKind, pretty: bool) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_jxes(log, backend, pretty, &mut buf)?;
    Ok(buf)
}

/// Deterministic compact rendering; equivalent logs give identical bytes.
pub fn canonicalize(log: &EventLog) -> Result<Vec<u8>> {
    to_jxes_vec(log, BackendKind::Streaming, false)
}

fn reserved_container(key: &str) -> String {
    format!("container key {key:?} is reserved in JXES and cannot be written")
}

fn non_finite(x: f64) -> String {
    format!("float {x} has no JSON representation")
}

struct LogSer<'a>(&'a EventLog);
struct MapSer<'a>(&'a AttrMap);
struct AttrSer<'a>(&'a Attribute);
struct ValueSer<'a>(&'a AttributeValue);
struct TraceSer<'a>(&'a Trace);
struct Pair<'a>(&'a str, &'a Attribute);

impl Serialize for LogSer<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let log = self.0;
        let mut map = s.serialize_map(None)?;
        if !log.attributes.is_empty() {
            map.serialize_entry(KEY_ATTRS, &MapSer(&log.attributes))?;
        }
        if !log.globals.is_empty() {
            struct Globals<'a>(&'a crate::model::GlobalAttributes);
            impl Serialize for Globals<'_> {
                fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    let mut map = s.serialize_map(None)?;
                    if !self.0.trace_level.is_empty() {
                        map.serialize_entry(SCOPE_TRACE, &MapSer(&self.0.trace_level))?;
                    }
                    if !self.0.event_level.is_empty() {
                        map.serialize_entry(SCOPE_EVENT, &MapSer(&self.0.event_level))?;
                    }
                    map.end()
                }
            }
            map.serialize_entry(KEY_GLOBALS, &Globals(&log.globals))?;
        }
        if !log.classifiers.is_empty() {
            map.serialize_entry(KEY_CLASSIFIERS, &log.classifiers)?;
        }
        if !log.extensions.is_empty() {
            struct Ext<'a>(&'a crate::model::Extension);
            impl Serialize for Ext<'_> {
                fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    let mut map = s.serialize_map(None)?;
                    map.serialize_entry("name", &self.0.name)?;
                    map.serialize_entry("prefix", &self.0.prefix)?;
                    map.serialize_entry("uri", &self.0.uri)?;
                    map.end()
                }
            }
            let mut exts = Vec::with_capacity(log.extensions.len());
            exts.extend(log.extensions.iter().map(Ext));
            map.serialize_entry(KEY_EXTENSIONS, &exts)?;
        }
        if !log.traces.is_empty() {
            struct Traces<'a>(&'a [Trace]);
            impl Serialize for Traces<'_> {
                fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    let mut seq = s.serialize_seq(None)?;
                    for t in self.0 {
                        seq.serialize_element(&TraceSer(t))?;
                    }
                    seq.end()
                }
            }
            map.serialize_entry(KEY_TRACES, &Traces(&log.traces))?;
        }
        map.end()
    }
}

impl Serialize for TraceSer<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Events<'a>(&'a Trace);
        impl Serialize for Events<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(None)?;
                for e in &self.0.events {
                    seq.serialize_element(&MapSer(&e.attributes))?;
                }
                seq.end()
            }
        }
        let mut map = s.serialize_map(None)?;
        if !self.0.attributes.is_empty() {
            map.serialize_entry(KEY_ATTRS, &MapSer(&self.0.attributes))?;
        }
        if !self.0.events.is_empty() {
            map.serialize_entry(KEY_EVENTS, &Events(self.0))?;
        }
        map.end()
    }
}

impl Serialize for MapSer<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        for (k, a) in self.0 {
            map.serialize_entry(k, &AttrSer(a))?;
        }
        map.end()
    }
}

impl Serialize for AttrSer<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let attr = self.0;
        if attr.children.is_empty() {
            return ValueSer(&attr.value).serialize(s);
        }
        let mut map = s.serialize_map(None)?;
        map.serialize_entry(KEY_VALUE, &ValueSer(&attr.value))?;
        map.serialize_entry(KEY_NESTED, &MapSer(&attr.children))?;
        map.end()
    }
}

impl Serialize for Pair<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry(self.0, &AttrSer(self.1))?;
        map.end()
    }
}

impl Serialize for ValueSer<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            AttributeValue::Str(v) => s.serialize_str(v),
            AttributeValue::Date(ts) => s.serialize_str(&ts.to_iso()),
            AttributeValue::Int(i) => s.serialize_i64(*i),
            AttributeValue::Float(x) if x.is_finite() => s.serialize_f64(*x),
            AttributeValue::Float(x) => Err(ser::Error::custom(non_finite(*x))),
            AttributeValue::Boolean(b) => s.serialize_bool(*b),
            AttributeValue::List(items) => {
                let mut seq = s.serialize_seq(None)?;
                for (k, a) in items {
                    seq.serialize_element(&Pair(k, a))?;
                }
                seq.end()
            }
            AttributeValue::Container(entries) => {
                if let Some(k) = entries.keys().find(|k| is_reserved(k)) {
                    return Err(ser::Error::custom(reserved_container(k)));
                }
                MapSer(entries).serialize(s)
            }
        }
    }
}

/// Builds the JSON tree the tree backend serializes.
pub fn log_to_tree(log: &EventLog) -> Result<JsonTree> {
    let mut top = Vec::new();
    if !log.attributes.is_empty() {
        top.push((KEY_ATTRS.to_owned(), map_tree(&log.attributes)?));
    }
    if !log.globals.is_empty() {
        let mut g = Vec::new();
        if !log.globals.trace_level.is_empty() {
            g.push((SCOPE_TRACE.to_owned(), map_tree(&log.globals.trace_level)?));
        }
        if !log.globals.event_level.is_empty() {
            g.push((SCOPE_EVENT.to_owned(), map_tree(&log.globals.event_level)?));
        }
        top.push((KEY_GLOBALS.to_owned(), JsonTree::Object(g)));
    }
    if !log.classifiers.is_empty() {
        let c = log
            .classifiers
            .iter()
            .map(|(name, keys)| {
                let keys = keys.iter().map(|k| JsonTree::Str(k.clone())).collect();
                (name.clone(), JsonTree::Array(keys))
            })
            .collect();
        top.push((KEY_CLASSIFIERS.to_owned(), JsonTree::Object(c)));
    }
    if !log.extensions.is_empty() {
        let e = log
            .extensions
            .iter()
            .map(|x| {
                JsonTree::Object(vec![
                    ("name".to_owned(), JsonTree::Str(x.name.clone())),
                    ("prefix".to_owned(), JsonTree::Str(x.prefix.clone())),
                    ("uri".to_owned(), JsonTree::Str(x.uri.clone())),
                ])
            })
            .collect();
        top.push((KEY_EXTENSIONS.to_owned(), JsonTree::Array(e)));
    }
    if !log.traces.is_empty() {
        let mut traces = Vec::with_capacity(log.traces.len());
        for t in &log.traces {
            let mut members = Vec::new();
            if !t.attributes.is_empty() {
                members.push((KEY_ATTRS.to_owned(), map_tree(&t.attributes)?));
            }
            if !t.events.is_empty() {
                let events = t
                    .events
                    .iter()
                    .map(|e| map_tree(&e.attributes))
                    .collect::<Result<_>>()?;
                members.push((KEY_EVENTS.to_owned(), JsonTree::Array(events)));
            }
            traces.push(JsonTree::Object(members));
        }
        top.push((KEY_TRACES.to_owned(), JsonTree::Array(traces)));
    }
    Ok(JsonTree::Object(top))
}

fn map_tree(map: &AttrMap) -> Result<JsonTree> {
    map.iter()
        .map(|(k, a)| Ok((k.clone(), attr_tree(a)?)))
        .collect::<Result<_>>()
        .map(JsonTree::Object)
}

fn attr_tree(attr: &Attribute) -> Result<JsonTree> {
    let value = value_tree(&attr.value)?;
    if attr.children.is_empty() {
        return Ok(value);
    }
    Ok(JsonTree::Object(vec![
        (KEY_VALUE.to_owned(), value),
        (KEY_NESTED.to_owned(), map_tree(&attr.children)?),
    ]))
}

fn value_tree(value: &AttributeValue) -> Result<JsonTree> {
    Ok(match value {
        AttributeValue::Str(s) => JsonTree::Str(s.clone()),
        AttributeValue::Date(ts) => JsonTree::Str(ts.to_iso()),
        AttributeValue::Int(i) => JsonTree::Number(i.to_string()),
        AttributeValue::Float(x) => match serde_json::Number::from_f64(*x) {
            Some(n) => JsonTree::Number(n.to_string()),
            None => return Err(Error::Unrepresentable(non_finite(*x))),
        },
        AttributeValue::Boolean(b) => JsonTree::Bool(*b),
        AttributeValue::List(items) => JsonTree::Array(
            items
                .iter()
                .map(|(k, a)| Ok(JsonTree::Object(vec![(k.clone(), attr_tree(a)?)])))
                .collect::<Result<_>>()?,
        ),
        AttributeValue::Container(entries) => {
            if let Some(k) = entries.keys().find(|k| is_reserved(k)) {
                return Err(Error::Unrepresentable(reserved_container(k)));
            }
            map_tree(entries)?
        }
    })
}
