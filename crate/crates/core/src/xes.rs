//! XES (XML) reading and writing for the subset of the standard that JXES
//! can express: the log/trace/event hierarchy, the typed attribute elements
//! (`string`, `date`, `int`, `float`, `boolean`, `list`, `container`, plus
//! `id` on input), nested attributes, `global`, `classifier` and
//! `extension`. Anything else is rejected with the element path instead of
//! being dropped.

use std::io::{BufRead, BufReader, Read, Write};

use chrono::{DateTime, NaiveDateTime, Timelike};
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use crate::error::{Error, Result, Warning};
use crate::io::MaybeGz;
use crate::model::{AttrMap, Attribute, AttributeValue, Event, EventLog, Extension, Timestamp, Trace};

/// Header fields of the `<log>` element, passed through untouched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XesDocumentMeta {
    pub xes_version: Option<String>,
    pub features: Option<String>,
    pub openxes_version: Option<String>,
    pub xmlns: Option<String>,
}

impl XesDocumentMeta {
    /// Header written for logs that did not come from an XES file.
    pub fn standard() -> Self {
        XesDocumentMeta {
            xes_version: Some("1.0".into()),
            features: Some("nested-attributes".into()),
            openxes_version: None,
            xmlns: Some("http://www.xes-standard.org/".into()),
        }
    }
}

/// Parses an XES document (plain or gzip-compressed). Warnings go to the
/// `log` facade.
pub fn parse_xes<R: Read>(input: R) -> Result<(EventLog, XesDocumentMeta)> {
    let (log, meta, warnings) = parse_xes_with_warnings(input)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok((log, meta))
}

pub fn parse_xes_with_warnings<R: Read>(input: R) -> Result<(EventLog, XesDocumentMeta, Vec<Warning>)> {
    let input = MaybeGz::new(BufReader::with_capacity(64 * 1024, input))?;
    let mut p = XesParser {
        reader: Reader::from_reader(input),
        buf: Vec::new(),
        warnings: Vec::new(),
    };
    let (log, meta) = p.document()?;
    Ok((log, meta, p.warnings))
}

/// An element with its attributes decoded and unescaped.
struct Elem {
    name: String,
    attrs: Vec<(String, String)>,
}

impl Elem {
    fn take(&mut self, key: &str) -> Option<String> {
        let i = self.attrs.iter().position(|(k, _)| k == key)?;
        Some(self.attrs.remove(i).1)
    }

    fn require(&mut self, key: &str, path: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::unsupported(path, format!("<{}> is missing the {key:?} attribute", self.name)))
    }

    fn finish(&self, path: &str) -> Result<()> {
        match self.attrs.first() {
            None => Ok(()),
            Some((k, _)) => Err(Error::unsupported(
                path,
                format!("unsupported XML attribute {k:?} on <{}>", self.name),
            )),
        }
    }
}

enum Node {
    Open(Elem),
    Empty(Elem),
    Close,
    Eof,
}

struct XesParser<R> {
    reader: Reader<R>,
    buf: Vec<u8>,
    warnings: Vec<Warning>,
}

const ATTRIBUTE_TAGS: [&str; 8] = ["string", "date", "int", "float", "boolean", "id", "list", "container"];

impl<R: BufRead> XesParser<R> {
    fn xml_error(&self, message: impl std::fmt::Display) -> Error {
        Error::MalformedXml {
            position: self.reader.error_position(),
            message: message.to_string(),
        }
    }

    fn elem(&self, start: &BytesStart<'_>) -> Result<Elem> {
        let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
        let mut attrs = Vec::new();
        for a in start.attributes() {
            let a = a.map_err(|e| self.xml_error(e))?;
            let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let value = a.unescape_value().map_err(|e| self.xml_error(e))?.into_owned();
            attrs.push((key, value));
        }
        Ok(Elem { name, attrs })
    }

    fn next(&mut self) -> Result<Node> {
        loop {
            self.buf.clear();
            let ev = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev,
                Err(e) => {
                    return Err(Error::MalformedXml {
                        position: self.reader.error_position(),
                        message: e.to_string(),
                    })
                }
            };
            match ev {
                XmlEvent::Start(s) => {
                    let s = s.into_owned();
                    return Ok(Node::Open(self.elem(&s)?));
                }
                XmlEvent::Empty(s) => {
                    let s = s.into_owned();
                    return Ok(Node::Empty(self.elem(&s)?));
                }
                XmlEvent::End(_) => return Ok(Node::Close),
                XmlEvent::Eof => return Ok(Node::Eof),
                XmlEvent::Text(t) => {
                    if !t.iter().all(u8::is_ascii_whitespace) {
                        let pos = self.reader.buffer_position();
                        return Err(Error::unsupported(format!("byte {pos}"), "text content is not part of XES"));
                    }
                }
                XmlEvent::CData(_) => {
                    let pos = self.reader.buffer_position();
                    return Err(Error::unsupported(format!("byte {pos}"), "CDATA is not part of XES"));
                }
                XmlEvent::Decl(_) | XmlEvent::Comment(_) | XmlEvent::PI(_) | XmlEvent::DocType(_) => {}
            }
        }
    }

    fn document(&mut self) -> Result<(EventLog, XesDocumentMeta)> {
        let (mut root, open) = match self.next()? {
            Node::Open(e) => (e, true),
            Node::Empty(e) => (e, false),
            Node::Close => return Err(self.xml_error("unexpected closing tag")),
            Node::Eof => return Err(self.xml_error("no root element")),
        };
        if root.name != "log" {
            return Err(Error::unsupported(&root.name, "root element must be <log>"));
        }
        let meta = XesDocumentMeta {
            xes_version: root.take("xes.version"),
            features: root.take("xes.features"),
            openxes_version: root.take("openxes.version"),
            xmlns: root.take("xmlns"),
        };
        root.finish("log")?;
        let mut log = EventLog::new();
        if open {
            self.log_body(&mut log)?;
        }
        match self.next()? {
            Node::Eof => Ok((log, meta)),
            _ => Err(self.xml_error("content after the <log> element")),
        }
    }

    fn log_body(&mut self, log: &mut EventLog) -> Result<()> {
        let mut traces = 0;
        loop {
            let (mut e, open) = match self.next()? {
                Node::Open(e) => (e, true),
                Node::Empty(e) => (e, false),
                Node::Close => return Ok(()),
                Node::Eof => return Err(self.xml_error("unexpected end of document")),
            };
            match e.name.as_str() {
                "extension" => {
                    let path = "log/extension";
                    let ext = Extension {
                        name: e.require("name", path)?,
                        prefix: e.require("prefix", path)?,
                        uri: e.require("uri", path)?,
                    };
                    e.finish(path)?;
                    ext.check().map_err(|m| Error::unsupported(path, m))?;
                    if open {
                        self.expect_close(path)?;
                    }
                    log.extensions.push(ext);
                }
                "global" => {
                    let scope = e.take("scope").unwrap_or_else(|| "event".into());
                    let path = format!("log/global[@scope='{scope}']");
                    e.finish(&path)?;
                    let target = match scope.as_str() {
                        "trace" => &mut log.globals.trace_level,
                        "event" => &mut log.globals.event_level,
                        _ => return Err(Error::unsupported(&path, "global scope must be trace or event")),
                    };
                    if open {
                        let map = self.attr_children(&path)?;
                        *target = map;
                    }
                }
                "classifier" => {
                    let path = "log/classifier";
                    let name = e.require("name", path)?;
                    let keys = e.require("keys", path)?;
                    let path = format!("log/classifier[@name='{name}']");
                    e.finish(&path)?;
                    let keys: Vec<String> = keys.split(' ').map(str::to_owned).collect();
                    if keys.iter().any(String::is_empty) {
                        return Err(Error::unsupported(
                            &path,
                            "classifier keys must be separated by single spaces and be non-empty",
                        ));
                    }
                    if open {
                        self.expect_close(&path)?;
                    }
                    if log.classifiers.insert(name.clone(), keys).is_some() {
                        self.warnings
                            .push(Warning::new("DuplicateKey", &path, "duplicate classifier; the last one wins"));
                    }
                }
                "trace" => {
                    let path = format!("log/trace[{traces}]");
                    e.finish(&path)?;
                    let mut trace = Trace::default();
                    if open {
                        self.trace_body(&mut trace, &path)?;
                    }
                    log.traces.push(trace);
                    traces += 1;
                }
                tag if ATTRIBUTE_TAGS.contains(&tag) => {
                    let (key, attr) = self.attribute(e, open, "log")?;
                    self.insert(&mut log.attributes, "log", key, attr);
                }
                other => return Err(Error::unsupported("log", format!("unsupported element <{other}>"))),
            }
        }
    }

    fn trace_body(&mut self, trace: &mut Trace, path: &str) -> Result<()> {
        loop {
            let (e, open) = match self.next()? {
                Node::Open(e) => (e, true),
                Node::Empty(e) => (e, false),
                Node::Close => return Ok(()),
                Node::Eof => return Err(self.xml_error("unexpected end of document")),
            };
            if e.name == "event" {
                let epath = format!("{path}/event[{}]", trace.events.len());
                e.finish(&epath)?;
                let attributes = if open { self.attr_children(&epath)? } else { AttrMap::new() };
                trace.events.push(Event { attributes });
            } else if ATTRIBUTE_TAGS.contains(&e.name.as_str()) {
                let (key, attr) = self.attribute(e, open, path)?;
                self.insert(&mut trace.attributes, path, key, attr);
            } else {
                return Err(Error::unsupported(path, format!("unsupported element <{}>", e.name)));
            }
        }
    }

    fn expect_close(&mut self, path: &str) -> Result<()> {
        match self.next()? {
            Node::Close => Ok(()),
            _ => Err(Error::unsupported(path, "element must be empty")),
        }
    }

    fn insert(&mut self, map: &mut AttrMap, path: &str, key: String, attr: Attribute) {
        if map.contains_key(&key) {
            self.warnings.push(Warning::new(
                "DuplicateKey",
                path,
                format!("duplicate attribute key {key:?}; the last one wins"),
            ));
        }
        map.insert(key, attr);
    }

    /// Reads attribute elements until the parent's closing tag.
    fn attr_children(&mut self, path: &str) -> Result<AttrMap> {
        let mut map = AttrMap::new();
        loop {
            let (e, open) = match self.next()? {
                Node::Open(e) => (e, true),
                Node::Empty(e) => (e, false),
                Node::Close => return Ok(map),
                Node::Eof => return Err(self.xml_error("unexpected end of document")),
            };
            if !ATTRIBUTE_TAGS.contains(&e.name.as_str()) {
                return Err(Error::unsupported(path, format!("unsupported element <{}>", e.name)));
            }
            let (key, attr) = self.attribute(e, open, path)?;
            self.insert(&mut map, path, key, attr);
        }
    }

    fn attribute(&mut self, mut e: Elem, open: bool, parent: &str) -> Result<(String, Attribute)> {
        let key = e.require("key", parent)?;
        let path = format!("{parent}/{}[@key='{key}']", e.name);
        let tag = std::mem::take(&mut e.name);
        let attr = match tag.as_str() {
            "list" => {
                e.finish(&path)?;
                let mut items = Vec::new();
                let mut children = AttrMap::new();
                let mut seen_values = false;
                if open {
                    loop {
                        let (c, c_open) = match self.next()? {
                            Node::Open(c) => (c, true),
                            Node::Empty(c) => (c, false),
                            Node::Close => break,
                            Node::Eof => return Err(self.xml_error("unexpected end of document")),
                        };
                        if c.name == "values" {
                            if std::mem::replace(&mut seen_values, true) {
                                return Err(Error::unsupported(&path, "list has more than one <values>"));
                            }
                            let vpath = format!("{path}/values");
                            c.finish(&vpath)?;
                            if c_open {
                                self.list_items(&mut items, &vpath)?;
                            }
                        } else if ATTRIBUTE_TAGS.contains(&c.name.as_str()) {
                            let (k, a) = self.attribute(c, c_open, &path)?;
                            self.insert(&mut children, &path, k, a);
                        } else {
                            return Err(Error::unsupported(&path, format!("unsupported element <{}>", c.name)));
                        }
                    }
                }
                Attribute::nested(AttributeValue::List(items), children)
            }
            "container" => {
                e.finish(&path)?;
                let entries = if open { self.attr_children(&path)? } else { AttrMap::new() };
                Attribute::new(AttributeValue::Container(entries))
            }
            _ => {
                let raw = e.require("value", &path)?;
                e.finish(&path)?;
                let value = self.scalar(&tag, raw, &path)?;
                let children = if open { self.attr_children(&path)? } else { AttrMap::new() };
                Attribute::nested(value, children)
            }
        };
        Ok((key, attr))
    }

    fn list_items(&mut self, items: &mut Vec<(String, Attribute)>, path: &str) -> Result<()> {
        loop {
            let (c, open) = match self.next()? {
                Node::Open(c) => (c, true),
                Node::Empty(c) => (c, false),
                Node::Close => return Ok(()),
                Node::Eof => return Err(self.xml_error("unexpected end of document")),
            };
            if !ATTRIBUTE_TAGS.contains(&c.name.as_str()) {
                return Err(Error::unsupported(path, format!("unsupported element <{}>", c.name)));
            }
            items.push(self.attribute(c, open, path)?);
        }
    }

    fn scalar(&mut self, tag: &str, raw: String, path: &str) -> Result<AttributeValue> {
        let bad = |what: &str| Error::unsupported(path, format!("invalid {what} value {raw:?}"));
        Ok(match tag {
            "string" => AttributeValue::Str(raw),
            "id" => {
                self.warnings.push(Warning::new(
                    "IdAttribute",
                    path,
                    "JXES has no ID type; reading the value as a string",
                ));
                AttributeValue::Str(raw)
            }
            "int" => AttributeValue::Int(raw.trim().parse().map_err(|_| bad("int"))?),
            "float" => AttributeValue::Float(parse_xs_double(raw.trim()).ok_or_else(|| bad("float"))?),
            "boolean" => match raw.trim() {
                "true" | "1" => AttributeValue::Boolean(true),
                "false" | "0" => AttributeValue::Boolean(false),
                _ => return Err(bad("boolean")),
            },
            "date" => AttributeValue::Date(self.date(raw.trim(), path).ok_or_else(|| bad("date"))?),
            _ => unreachable!("scalar tags are filtered by the caller"),
        })
    }

    fn date(&mut self, raw: &str, path: &str) -> Option<Timestamp> {
        if let Some(ts) = Timestamp::parse_iso(raw) {
            return Some(ts);
        }
        let dt = match DateTime::parse_from_rfc3339(raw) {
            Ok(dt) => dt,
            Err(_) => {
                let naive = NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f").ok()?;
                self.warnings.push(Warning::new(
                    "DateWithoutOffset",
                    path,
                    format!("date {raw:?} has no UTC offset; assuming UTC"),
                ));
                naive.and_utc().fixed_offset()
            }
        };
        if dt.nanosecond() % 1_000_000 != 0 {
            self.warnings.push(Warning::new(
                "DatePrecision",
                path,
                format!("date {raw:?} truncated to milliseconds"),
            ));
        }
        Timestamp::from_chrono(&dt)
    }
}

fn parse_xs_double(s: &str) -> Option<f64> {
    match s {
        "INF" | "+INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        _ if s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E')) => s.parse().ok(),
        _ => None,
    }
}

fn format_xs_double(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "INF" } else { "-INF" }.into()
    } else {
        format!("{x:?}")
    }
}

/// Writes `log` as XES. `meta` fields are emitted on `<log>` when present.
pub fn write_xes<W: Write>(log: &EventLog, meta: &XesDocumentMeta, out: W) -> Result<()> {
    let mut w = XesWriter {
        out: std::io::BufWriter::new(out),
    };
    w.document(log, meta)?;
    w.out.flush()?;
    Ok(())
}

pub fn to_xes_vec(log: &EventLog, meta: &XesDocumentMeta) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_xes(log, meta, &mut buf)?;
    Ok(buf)
}

struct XesWriter<W: Write> {
    out: W,
}

fn escape_into(out: &mut String, s: &str) -> Result<()> {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c if (c as u32) < 0x20 || c == '\u{FFFE}' || c == '\u{FFFF}' => {
                return Err(Error::Unrepresentable(format!(
                    "character U+{:04X} cannot appear in XML",
                    c as u32
                )))
            }
            c => out.push(c),
        }
    }
    Ok(())
}

impl<W: Write> XesWriter<W> {
    fn line(&mut self, depth: usize, text: &str) -> Result<()> {
        for _ in 0..depth {
            self.out.write_all(b"  ")?;
        }
        self.out.write_all(text.as_bytes())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    fn document(&mut self, log: &EventLog, meta: &XesDocumentMeta) -> Result<()> {
        self.line(0, r#"<?xml version="1.0" encoding="UTF-8" ?>"#)?;
        let mut open = String::from("<log");
        for (name, value) in [
            ("xes.version", &meta.xes_version),
            ("xes.features", &meta.features),
            ("openxes.version", &meta.openxes_version),
            ("xmlns", &meta.xmlns),
        ] {
            if let Some(v) = value {
                open.push_str(&format!(" {name}=\""));
                escape_into(&mut open, v)?;
                open.push('"');
            }
        }
        let empty = log.extensions.is_empty()
            && log.globals.is_empty()
            && log.classifiers.is_empty()
            && log.attributes.is_empty()
            && log.traces.is_empty();
        if empty {
            open.push_str("/>");
            return self.line(0, &open);
        }
        open.push('>');
        self.line(0, &open)?;
        for ext in &log.extensions {
            let mut s = String::from("<extension name=\"");
            escape_into(&mut s, &ext.name)?;
            s.push_str("\" prefix=\"");
            escape_into(&mut s, &ext.prefix)?;
            s.push_str("\" uri=\"");
            escape_into(&mut s, &ext.uri)?;
            s.push_str("\"/>");
            self.line(1, &s)?;
        }
        for (scope, map) in [("trace", &log.globals.trace_level), ("event", &log.globals.event_level)] {
            if !map.is_empty() {
                self.line(1, &format!("<global scope=\"{scope}\">"))?;
                self.attrs(2, map)?;
                self.line(1, "</global>")?;
            }
        }
        for (name, keys) in &log.classifiers {
            if keys.is_empty() || keys.iter().any(|k| k.is_empty() || k.contains(' ')) {
                return Err(Error::unsupported(
                    format!("classifier {name:?}"),
                    "XES classifier keys must be non-empty and contain no spaces",
                ));
            }
            let mut s = String::from("<classifier name=\"");
            escape_into(&mut s, name)?;
            s.push_str("\" keys=\"");
            escape_into(&mut s, &keys.join(" "))?;
            s.push_str("\"/>");
            self.line(1, &s)?;
        }
        self.attrs(1, &log.attributes)?;
        for trace in &log.traces {
            if trace.attributes.is_empty() && trace.events.is_empty() {
                self.line(1, "<trace/>")?;
                continue;
            }
            self.line(1, "<trace>")?;
            self.attrs(2, &trace.attributes)?;
            for event in &trace.events {
                if event.attributes.is_empty() {
                    self.line(2, "<event/>")?;
                } else {
                    self.line(2, "<event>")?;
                    self.attrs(3, &event.attributes)?;
                    self.line(2, "</event>")?;
                }
            }
            self.line(1, "</trace>")?;
        }
        self.line(0, "</log>")
    }

    fn attrs(&mut self, depth: usize, map: &AttrMap) -> Result<()> {
        for (key, attr) in map {
            self.attribute(depth, key, attr)?;
        }
        Ok(())
    }

    fn attribute(&mut self, depth: usize, key: &str, attr: &Attribute) -> Result<()> {
        let tag = attr.value.kind();
        let mut s = format!("<{tag} key=\"");
        escape_into(&mut s, key)?;
        s.push('"');
        match &attr.value {
            AttributeValue::List(items) => {
                if items.is_empty() && attr.children.is_empty() {
                    s.push_str("/>");
                    return self.line(depth, &s);
                }
                s.push('>');
                self.line(depth, &s)?;
                if !items.is_empty() {
                    self.line(depth + 1, "<values>")?;
                    for (k, a) in items {
                        self.attribute(depth + 2, k, a)?;
                    }
                    self.line(depth + 1, "</values>")?;
                }
                self.attrs(depth + 1, &attr.children)?;
                return self.line(depth, "</list>");
            }
            AttributeValue::Container(entries) => {
                if !attr.children.is_empty() {
                    return Err(Error::unsupported(
                        format!("container {key:?}"),
                        "XES cannot express nested attributes on a container",
                    ));
                }
                if entries.is_empty() {
                    s.push_str("/>");
                    return self.line(depth, &s);
                }
                s.push('>');
                self.line(depth, &s)?;
                self.attrs(depth + 1, entries)?;
                return self.line(depth, "</container>");
            }
            AttributeValue::Str(v) => {
                s.push_str(" value=\"");
                escape_into(&mut s, v)?;
            }
            AttributeValue::Date(ts) => s.push_str(&format!(" value=\"{}", ts.to_iso())),
            AttributeValue::Int(i) => s.push_str(&format!(" value=\"{i}")),
            AttributeValue::Float(x) => s.push_str(&format!(" value=\"{}", format_xs_double(*x))),
            AttributeValue::Boolean(b) => s.push_str(&format!(" value=\"{b}")),
        }
        s.push('"');
        if attr.children.is_empty() {
            s.push_str("/>");
            return self.line(depth, &s);
        }
        s.push('>');
        self.line(depth, &s)?;
        self.attrs(depth + 1, &attr.children)?;
        self.line(depth, &format!("</{tag}>"))
    }
}
