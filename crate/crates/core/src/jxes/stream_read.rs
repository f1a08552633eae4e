//! Streaming backend: builds the model straight from the token stream,
//! without ever holding a document tree.

use std::io::BufRead;

use super::common::*;
use crate::error::{Error, Result};
use crate::json::{Path, PullParser, Token};
use crate::model::{
    AttrMap, Attribute, AttributeValue, Classifiers, Event, EventLog, Extension, GlobalAttributes,
    Trace,
};

pub(crate) struct StreamReader<'c, R> {
    parser: PullParser<R>,
    ctx: &'c mut ReadContext,
}

impl<'c, R: BufRead> StreamReader<'c, R> {
    pub fn new(reader: R, ctx: &'c mut ReadContext) -> Self {
        StreamReader {
            parser: PullParser::new(reader),
            ctx,
        }
    }

    fn next(&mut self) -> Result<Token> {
        match self.parser.next_token()? {
            Some(t) => Ok(t),
            None => Err(Error::MalformedJson {
                offset: self.parser.offset(),
                message: "unexpected end of input".into(),
            }),
        }
    }

    /// Next object member key, or `None` at the closing brace.
    fn next_key(&mut self) -> Result<Option<String>> {
        match self.next()? {
            Token::Key(k) => Ok(Some(k)),
            Token::EndObject => Ok(None),
            other => unreachable!("tokenizer yields keys inside objects, got {other:?}"),
        }
    }

    /// Next array element's first token, or `None` at the closing bracket.
    fn next_element(&mut self) -> Result<Option<Token>> {
        match self.next()? {
            Token::EndArray => Ok(None),
            t => Ok(Some(t)),
        }
    }

    pub fn read_log(mut self) -> Result<EventLog> {
        let root = Path::ROOT;
        if self.next()? != Token::BeginObject {
            return Err(Error::schema(root, "document root must be an object"));
        }
        let mut log = EventLog::new();
        let mut seen: Vec<&'static str> = Vec::new();
        while let Some(key) = self.next_key()? {
            let path = root.key(&key);
            let section = match key.as_str() {
                KEY_ATTRS => KEY_ATTRS,
                KEY_GLOBALS => KEY_GLOBALS,
                KEY_CLASSIFIERS => KEY_CLASSIFIERS,
                KEY_EXTENSIONS => KEY_EXTENSIONS,
                KEY_TRACES => KEY_TRACES,
                _ => {
                    self.ctx.unknown_key(&path)?;
                    let first = self.next()?;
                    self.parser.skip_value(&first)?;
                    continue;
                }
            };
            if seen.contains(&section) {
                self.ctx.duplicate_key(&root, section)?;
            }
            seen.push(section);
            let first = self.next()?;
            match section {
                KEY_ATTRS => log.attributes = self.attr_map(first, &path)?,
                KEY_GLOBALS => log.globals = self.globals(first, &path)?,
                KEY_CLASSIFIERS => log.classifiers = self.classifiers(first, &path)?,
                KEY_EXTENSIONS => log.extensions = self.extensions(first, &path)?,
                _ => log.traces = self.traces(first, &path)?,
            }
        }
        if self.parser.next_token()?.is_some() {
            unreachable!("tokenizer rejects content after the document");
        }
        Ok(log)
    }

    fn globals(&mut self, first: Token, path: &Path<'_>) -> Result<GlobalAttributes> {
        if first != Token::BeginObject {
            return Err(Error::schema(path, "global-attrs must be an object"));
        }
        let mut globals = GlobalAttributes::default();
        let (mut seen_trace, mut seen_event) = (false, false);
        while let Some(key) = self.next_key()? {
            let child = path.key(&key);
            let (seen, is_trace) = match key.as_str() {
                SCOPE_TRACE => (&mut seen_trace, true),
                SCOPE_EVENT => (&mut seen_event, false),
                _ => {
                    return Err(Error::schema(
                        child,
                        "global-attrs may only contain \"trace\" and \"event\"",
                    ))
                }
            };
            let dup = std::mem::replace(seen, true);
            let first = self.next()?;
            let map = self.attr_map(first, &child)?;
            if is_trace {
                globals.trace_level = map;
            } else {
                globals.event_level = map;
            }
            if dup {
                self.ctx.duplicate_key(path, &key)?;
            }
        }
        Ok(globals)
    }

    fn classifiers(&mut self, first: Token, path: &Path<'_>) -> Result<Classifiers> {
        if first != Token::BeginObject {
            return Err(Error::schema(path, "classifiers must be an object"));
        }
        let mut out = Classifiers::new();
        while let Some(name) = self.next_key()? {
            let child = path.key(&name);
            let bad = || Error::schema(child, "classifier keys must be an array of strings");
            if self.next()? != Token::BeginArray {
                return Err(bad());
            }
            let mut keys = Vec::new();
            while let Some(t) = self.next_element()? {
                match t {
                    Token::Str(s) => keys.push(s),
                    _ => return Err(bad()),
                }
            }
            if keys.is_empty() {
                return Err(Error::schema(child, "classifier has no keys"));
            }
            if out.contains_key(&name) {
                self.ctx.duplicate_key(path, &name)?;
            }
            out.insert(name, keys);
        }
        Ok(out)
    }

    fn extensions(&mut self, first: Token, path: &Path<'_>) -> Result<Vec<Extension>> {
        if first != Token::BeginArray {
            return Err(Error::schema(path, "extensions must be an array"));
        }
        let mut out = Vec::new();
        while let Some(t) = self.next_element()? {
            let at = path.index(out.len());
            out.push(self.extension(t, &at)?);
        }
        Ok(out)
    }

    fn extension(&mut self, first: Token, path: &Path<'_>) -> Result<Extension> {
        if first != Token::BeginObject {
            return Err(Error::schema(path, "extension must be an object"));
        }
        let mut fields: [Option<String>; 3] = [None, None, None];
        while let Some(key) = self.next_key()? {
            let slot = match key.as_str() {
                "name" => 0,
                "prefix" => 1,
                "uri" => 2,
                _ => {
                    self.ctx.unknown_key(&path.key(&key))?;
                    let t = self.next()?;
                    self.parser.skip_value(&t)?;
                    continue;
                }
            };
            if fields[slot].is_some() {
                self.ctx.duplicate_key(path, &key)?;
            }
            match self.next()? {
                Token::Str(s) => fields[slot] = Some(s),
                _ => return Err(Error::schema(path.key(&key), "extension field must be a string")),
            }
        }
        let [name, prefix, uri] = fields;
        let ext = match (name, prefix, uri) {
            (Some(name), Some(prefix), Some(uri)) => Extension { name, prefix, uri },
            (name, prefix, _) => {
                let missing = if name.is_none() {
                    "name"
                } else if prefix.is_none() {
                    "prefix"
                } else {
                    "uri"
                };
                return Err(Error::schema(path, format!("extension is missing {missing:?}")));
            }
        };
        ext.check().map_err(|msg| Error::schema(path, msg))?;
        Ok(ext)
    }

    fn traces(&mut self, first: Token, path: &Path<'_>) -> Result<Vec<Trace>> {
        if first != Token::BeginArray {
            return Err(Error::schema(path, "traces must be an array"));
        }
        let mut out = Vec::new();
        while let Some(t) = self.next_element()? {
            let at = path.index(out.len());
            out.push(self.trace(t, &at)?);
        }
        Ok(out)
    }

    fn trace(&mut self, first: Token, path: &Path<'_>) -> Result<Trace> {
        if first != Token::BeginObject {
            return Err(Error::schema(path, "trace must be an object"));
        }
        let mut trace = Trace::default();
        let (mut seen_attrs, mut seen_events) = (false, false);
        while let Some(key) = self.next_key()? {
            let child = path.key(&key);
            match key.as_str() {
                KEY_ATTRS => {
                    if std::mem::replace(&mut seen_attrs, true) {
                        self.ctx.duplicate_key(path, &key)?;
                    }
                    let t = self.next()?;
                    trace.attributes = self.attr_map(t, &child)?;
                }
                KEY_EVENTS => {
                    if std::mem::replace(&mut seen_events, true) {
                        self.ctx.duplicate_key(path, &key)?;
                    }
                    if self.next()? != Token::BeginArray {
                        return Err(Error::schema(child, "events must be an array"));
                    }
                    trace.events.clear();
                    while let Some(t) = self.next_element()? {
                        let at = child.index(trace.events.len());
                        if t != Token::BeginObject {
                            return Err(Error::schema(at, "event must be an object"));
                        }
                        let attributes = self.attr_map(t, &at)?;
                        trace.events.push(Event { attributes });
                    }
                    trace.events.shrink_to_fit();
                }
                _ => {
                    self.ctx.unknown_key(&child)?;
                    let t = self.next()?;
                    self.parser.skip_value(&t)?;
                }
            }
        }
        Ok(trace)
    }

    fn attr_map(&mut self, first: Token, path: &Path<'_>) -> Result<AttrMap> {
        if first != Token::BeginObject {
            return Err(Error::schema(path, "expected an object of attributes"));
        }
        let mut map = AttrMap::new();
        while let Some(key) = self.next_key()? {
            let t = self.next()?;
            let attr = self.attribute(t, &path.key(&key))?;
            self.ctx.insert(&mut map, path, key, attr)?;
        }
        map.shrink_to_fit();
        Ok(map)
    }

    fn attribute(&mut self, first: Token, path: &Path<'_>) -> Result<Attribute> {
        match first {
            Token::BeginObject => Ok(self.object_attribute(path)?.0),
            t => Ok(Attribute::new(self.value(t, path)?)),
        }
    }

    /// Object in attribute position; the opening brace is consumed.
    fn object_attribute(&mut self, path: &Path<'_>) -> Result<(Attribute, bool)> {
        let mut value = None;
        let mut children = AttrMap::new();
        let (mut has_value, mut has_nested, mut has_other) = (false, false, false);
        let mut entries = AttrMap::new();
        while let Some(key) = self.next_key()? {
            let child = path.key(&key);
            let t = self.next()?;
            match key.as_str() {
                KEY_VALUE => {
                    if std::mem::replace(&mut has_value, true) {
                        self.ctx.duplicate_key(path, &key)?;
                    }
                    value = Some(self.value_position(t, &child)?);
                }
                KEY_NESTED => {
                    if std::mem::replace(&mut has_nested, true) {
                        self.ctx.duplicate_key(path, &key)?;
                    }
                    if t != Token::BeginObject {
                        return Err(nested_not_object(&child));
                    }
                    children = self.attr_map(t, &child)?;
                }
                _ => {
                    has_other = true;
                    let attr = self.attribute(t, &child)?;
                    self.ctx.insert(&mut entries, path, key, attr)?;
                }
            }
            if (has_value || has_nested) && has_other {
                return Err(mixed_reserved(path));
            }
        }
        if has_value || has_nested {
            if !has_value {
                self.ctx.nested_without_value(path);
            }
            let value = value.unwrap_or_else(|| AttributeValue::Str(String::new()));
            Ok((Attribute { value, children }, true))
        } else {
            entries.shrink_to_fit();
            Ok((Attribute::new(AttributeValue::Container(entries)), false))
        }
    }

    fn value_position(&mut self, first: Token, path: &Path<'_>) -> Result<AttributeValue> {
        if first == Token::BeginObject {
            return match self.object_attribute(path)? {
                (_, true) => Err(nested_as_value(path)),
                (attr, false) => Ok(attr.value),
            };
        }
        self.value(first, path)
    }

    fn value(&mut self, first: Token, path: &Path<'_>) -> Result<AttributeValue> {
        match first {
            Token::Str(s) => Ok(classify_string(s)),
            Token::Number(n) => classify_number(&n, path),
            Token::Bool(b) => Ok(AttributeValue::Boolean(b)),
            Token::BeginArray => self.list(path),
            Token::Null => Err(Error::schema(path, "null is not a JXES value")),
            Token::BeginObject => self.value_position(first, path),
            other => unreachable!("tokenizer yields a value here, got {other:?}"),
        }
    }

    /// Opening bracket already consumed.
    fn list(&mut self, path: &Path<'_>) -> Result<AttributeValue> {
        let mut items = Vec::new();
        let mut index = 0;
        while let Some(t) = self.next_element()? {
            let at = path.index(index);
            if t != Token::BeginObject {
                return Err(Error::schema(at, "list element must be an object"));
            }
            while let Some(key) = self.next_key()? {
                let t = self.next()?;
                let attr = self.attribute(t, &at.key(&key))?;
                items.push((key, attr));
            }
            index += 1;
        }
        items.shrink_to_fit();
        Ok(AttributeValue::List(items))
    }
}
