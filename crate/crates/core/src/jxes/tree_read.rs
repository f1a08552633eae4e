//! Tree backend: the whole document is materialized as a [`JsonTree`]
//! first and then walked into the model.
//!
//! The walk records every error it meets and keeps going, so the same code
//! serves the reader (which reports the first error) and the validator
//! (which reports all of them).

use super::common::*;
use crate::error::{Error, Result};
use crate::json::{JsonTree, Path};
use crate::model::{
    AttrMap, Attribute, AttributeValue, Classifiers, EventLog, Extension, GlobalAttributes, Trace,
};

pub(crate) struct TreeReader<'c> {
    pub ctx: &'c mut ReadContext,
    pub errors: Vec<Error>,
}

impl<'c> TreeReader<'c> {
    pub fn new(ctx: &'c mut ReadContext) -> Self {
        TreeReader {
            ctx,
            errors: Vec::new(),
        }
    }

    fn fail<T>(&mut self, err: Error) -> Option<T> {
        self.errors.push(err);
        None
    }

    fn note(&mut self, r: Result<()>) {
        if let Err(e) = r {
            self.errors.push(e);
        }
    }

    fn insert(&mut self, map: &mut AttrMap, path: &Path<'_>, key: String, attr: Attribute) {
        let r = self.ctx.insert(map, path, key, attr);
        self.note(r);
    }

    pub fn read_log(&mut self, doc: JsonTree) -> Option<EventLog> {
        let root = Path::ROOT;
        let JsonTree::Object(members) = doc else {
            return self.fail(Error::schema(root, "document root must be an object"));
        };
        let mut log = EventLog::new();
        let mut seen: Vec<&'static str> = Vec::new();
        for (key, value) in members {
            let path = root.key(&key);
            let section = match key.as_str() {
                KEY_ATTRS => KEY_ATTRS,
                KEY_GLOBALS => KEY_GLOBALS,
                KEY_CLASSIFIERS => KEY_CLASSIFIERS,
                KEY_EXTENSIONS => KEY_EXTENSIONS,
                KEY_TRACES => KEY_TRACES,
                _ => {
                    let r = self.ctx.unknown_key(&path);
                    self.note(r);
                    continue;
                }
            };
            if seen.contains(&section) {
                let r = self.ctx.duplicate_key(&root, section);
                self.note(r);
            }
            seen.push(section);
            match section {
                KEY_ATTRS => {
                    if let Some(m) = self.attr_map(value, &path) {
                        log.attributes = m;
                    }
                }
                KEY_GLOBALS => {
                    if let Some(g) = self.globals(value, &path) {
                        log.globals = g;
                    }
                }
                KEY_CLASSIFIERS => {
                    if let Some(c) = self.classifiers(value, &path) {
                        log.classifiers = c;
                    }
                }
                KEY_EXTENSIONS => {
                    if let Some(e) = self.extensions(value, &path) {
                        log.extensions = e;
                    }
                }
                _ => {
                    if let Some(t) = self.traces(value, &path) {
                        log.traces = t;
                    }
                }
            }
        }
        Some(log)
    }

    fn globals(&mut self, value: JsonTree, path: &Path<'_>) -> Option<GlobalAttributes> {
        let JsonTree::Object(members) = value else {
            return self.fail(Error::schema(path, "global-attrs must be an object"));
        };
        let mut globals = GlobalAttributes::default();
        let (mut seen_trace, mut seen_event) = (false, false);
        for (key, value) in members {
            let child = path.key(&key);
            let (target, seen) = match key.as_str() {
                SCOPE_TRACE => (&mut globals.trace_level, &mut seen_trace),
                SCOPE_EVENT => (&mut globals.event_level, &mut seen_event),
                _ => {
                    self.errors.push(Error::schema(
                        child,
                        "global-attrs may only contain \"trace\" and \"event\"",
                    ));
                    continue;
                }
            };
            let dup = std::mem::replace(seen, true);
            if let Some(m) = self.attr_map(value, &child) {
                *target = m;
            }
            if dup {
                let r = self.ctx.duplicate_key(path, &key);
                self.note(r);
            }
        }
        Some(globals)
    }

    fn classifiers(&mut self, value: JsonTree, path: &Path<'_>) -> Option<Classifiers> {
        let JsonTree::Object(members) = value else {
            return self.fail(Error::schema(path, "classifiers must be an object"));
        };
        let mut out = Classifiers::new();
        for (name, value) in members {
            let child = path.key(&name);
            let Some(keys) = self.classifier_keys(value, &child) else {
                continue;
            };
            if out.contains_key(&name) {
                let r = self.ctx.duplicate_key(path, &name);
                self.note(r);
            }
            out.insert(name, keys);
        }
        Some(out)
    }

    fn classifier_keys(&mut self, value: JsonTree, path: &Path<'_>) -> Option<Vec<String>> {
        let JsonTree::Array(items) = value else {
            return self.fail(Error::schema(path, "classifier keys must be an array of strings"));
        };
        let mut keys = Vec::with_capacity(items.len());
        for item in items {
            match item {
                JsonTree::Str(s) => keys.push(s),
                _ => {
                    return self.fail(Error::schema(
                        path,
                        "classifier keys must be an array of strings",
                    ))
                }
            }
        }
        if keys.is_empty() {
            return self.fail(Error::schema(path, "classifier has no keys"));
        }
        Some(keys)
    }

    fn extensions(&mut self, value: JsonTree, path: &Path<'_>) -> Option<Vec<Extension>> {
        let JsonTree::Array(items) = value else {
            return self.fail(Error::schema(path, "extensions must be an array"));
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.into_iter().enumerate() {
            if let Some(ext) = self.extension(item, &path.index(i)) {
                out.push(ext);
            }
        }
        Some(out)
    }

    fn extension(&mut self, value: JsonTree, path: &Path<'_>) -> Option<Extension> {
        let JsonTree::Object(members) = value else {
            return self.fail(Error::schema(path, "extension must be an object"));
        };
        let mut fields: [Option<String>; 3] = [None, None, None];
        let mut ok = true;
        for (key, value) in members {
            let slot = match key.as_str() {
                "name" => 0,
                "prefix" => 1,
                "uri" => 2,
                _ => {
                    let r = self.ctx.unknown_key(&path.key(&key));
                    self.note(r);
                    continue;
                }
            };
            if fields[slot].is_some() {
                let r = self.ctx.duplicate_key(path, &key);
                self.note(r);
            }
            match value {
                JsonTree::Str(s) => fields[slot] = Some(s),
                _ => {
                    ok = false;
                    self.errors
                        .push(Error::schema(path.key(&key), "extension field must be a string"));
                }
            }
        }
        if !ok {
            return None;
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
                return self.fail(Error::schema(path, format!("extension is missing {missing:?}")));
            }
        };
        match ext.check() {
            Ok(()) => Some(ext),
            Err(msg) => self.fail(Error::schema(path, msg)),
        }
    }

    fn traces(&mut self, value: JsonTree, path: &Path<'_>) -> Option<Vec<Trace>> {
        let JsonTree::Array(items) = value else {
            return self.fail(Error::schema(path, "traces must be an array"));
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.into_iter().enumerate() {
            if let Some(t) = self.trace(item, &path.index(i)) {
                out.push(t);
            }
        }
        Some(out)
    }

    fn trace(&mut self, value: JsonTree, path: &Path<'_>) -> Option<Trace> {
        let JsonTree::Object(members) = value else {
            return self.fail(Error::schema(path, "trace must be an object"));
        };
        let mut trace = Trace::default();
        let (mut seen_attrs, mut seen_events) = (false, false);
        for (key, value) in members {
            let child = path.key(&key);
            match key.as_str() {
                KEY_ATTRS => {
                    if std::mem::replace(&mut seen_attrs, true) {
                        let r = self.ctx.duplicate_key(path, &key);
                        self.note(r);
                    }
                    if let Some(m) = self.attr_map(value, &child) {
                        trace.attributes = m;
                    }
                }
                KEY_EVENTS => {
                    if std::mem::replace(&mut seen_events, true) {
                        let r = self.ctx.duplicate_key(path, &key);
                        self.note(r);
                    }
                    let JsonTree::Array(items) = value else {
                        self.errors.push(Error::schema(child, "events must be an array"));
                        continue;
                    };
                    trace.events.clear();
                    trace.events.reserve(items.len());
                    for (i, item) in items.into_iter().enumerate() {
                        let at = child.index(i);
                        if !matches!(item, JsonTree::Object(_)) {
                            self.errors.push(Error::schema(at, "event must be an object"));
                            continue;
                        }
                        if let Some(attributes) = self.attr_map(item, &at) {
                            trace.events.push(crate::model::Event { attributes });
                        }
                    }
                }
                _ => {
                    let r = self.ctx.unknown_key(&child);
                    self.note(r);
                }
            }
        }
        Some(trace)
    }

    pub fn attr_map(&mut self, value: JsonTree, path: &Path<'_>) -> Option<AttrMap> {
        let JsonTree::Object(members) = value else {
            return self.fail(Error::schema(path, "expected an object of attributes"));
        };
        let mut map = AttrMap::with_capacity(members.len());
        for (key, value) in members {
            if let Some(attr) = self.attribute(value, &path.key(&key)) {
                self.insert(&mut map, path, key, attr);
            }
        }
        Some(map)
    }

    /// Any JSON value in a position that names an attribute.
    pub fn attribute(&mut self, value: JsonTree, path: &Path<'_>) -> Option<Attribute> {
        match value {
            JsonTree::Object(members) => self.object_attribute(members, path).map(|(a, _)| a),
            other => self.value(other, path).map(Attribute::new),
        }
    }

    /// Returns the attribute and whether it used the nested-attribute form.
    pub fn object_attribute(
        &mut self,
        members: Vec<(String, JsonTree)>,
        path: &Path<'_>,
    ) -> Option<(Attribute, bool)> {
        let mut value = None;
        let mut children = AttrMap::new();
        let (mut has_value, mut has_nested, mut has_other) = (false, false, false);
        let mut entries = AttrMap::new();
        let mut failed = false;
        for (key, member) in members {
            let child = path.key(&key);
            match key.as_str() {
                KEY_VALUE => {
                    if std::mem::replace(&mut has_value, true) {
                        let r = self.ctx.duplicate_key(path, &key);
                        self.note(r);
                    }
                    value = self.value_position(member, &child);
                    failed |= value.is_none();
                }
                KEY_NESTED => {
                    if std::mem::replace(&mut has_nested, true) {
                        let r = self.ctx.duplicate_key(path, &key);
                        self.note(r);
                    }
                    if !matches!(member, JsonTree::Object(_)) {
                        failed = true;
                        self.errors.push(nested_not_object(&child));
                        continue;
                    }
                    match self.attr_map(member, &child) {
                        Some(m) => children = m,
                        None => failed = true,
                    }
                }
                _ => {
                    has_other = true;
                    match self.attribute(member, &child) {
                        Some(attr) => self.insert(&mut entries, path, key, attr),
                        None => failed = true,
                    }
                }
            }
        }
        if (has_value || has_nested) && has_other {
            return self.fail(mixed_reserved(path));
        }
        if failed {
            return None;
        }
        if has_value || has_nested {
            if !has_value {
                self.ctx.nested_without_value(path);
            }
            let value = value.unwrap_or_else(|| AttributeValue::Str(String::new()));
            Some((Attribute { value, children }, true))
        } else {
            Some((Attribute::new(AttributeValue::Container(entries)), false))
        }
    }

    /// The `value` member of a nested attribute.
    fn value_position(&mut self, value: JsonTree, path: &Path<'_>) -> Option<AttributeValue> {
        match value {
            JsonTree::Object(members) => match self.object_attribute(members, path)? {
                (_, true) => self.fail(nested_as_value(path)),
                (attr, false) => Some(attr.value),
            },
            other => self.value(other, path),
        }
    }

    pub fn value(&mut self, value: JsonTree, path: &Path<'_>) -> Option<AttributeValue> {
        match value {
            JsonTree::Str(s) => Some(classify_string(s)),
            JsonTree::Number(n) => match classify_number(&n, path) {
                Ok(v) => Some(v),
                Err(e) => self.fail(e),
            },
            JsonTree::Bool(b) => Some(AttributeValue::Boolean(b)),
            JsonTree::Array(items) => self.list(items, path),
            JsonTree::Null => self.fail(Error::schema(path, "null is not a JXES value")),
            obj @ JsonTree::Object(_) => self.value_position(obj, path),
        }
    }

    pub fn list(&mut self, items: Vec<JsonTree>, path: &Path<'_>) -> Option<AttributeValue> {
        let mut out = Vec::with_capacity(items.len());
        let mut failed = false;
        for (i, item) in items.into_iter().enumerate() {
            let at = path.index(i);
            let JsonTree::Object(members) = item else {
                failed = true;
                self.errors.push(Error::schema(at, "list element must be an object"));
                continue;
            };
            for (key, member) in members {
                match self.attribute(member, &at.key(&key)) {
                    Some(attr) => out.push((key, attr)),
                    None => failed = true,
                }
            }
        }
        (!failed).then_some(AttributeValue::List(out))
    }
}
