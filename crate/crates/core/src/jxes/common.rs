//! Interpretation rules shared by both reader backends.

use crate::error::{Error, Result, Warning};
use crate::json::Path;
use crate::model::{AttrMap, Attribute, AttributeValue, Timestamp};

pub const KEY_ATTRS: &str = "attrs";
pub const KEY_GLOBALS: &str = "global-attrs";
pub const KEY_CLASSIFIERS: &str = "classifiers";
pub const KEY_EXTENSIONS: &str = "extensions";
pub const KEY_TRACES: &str = "traces";
pub const KEY_EVENTS: &str = "events";
pub const KEY_VALUE: &str = "value";
pub const KEY_NESTED: &str = "nested-attrs";
pub const SCOPE_TRACE: &str = "trace";
pub const SCOPE_EVENT: &str = "event";

pub fn is_reserved(key: &str) -> bool {
    key == KEY_VALUE || key == KEY_NESTED
}

/// Strings shaped like an ISO-8601 instant that pass calendar validation
/// become dates; everything else stays a string.
pub fn classify_string(s: String) -> AttributeValue {
    match Timestamp::parse_iso(&s) {
        Some(ts) => AttributeValue::Date(ts),
        None => AttributeValue::Str(s),
    }
}

/// Ints and floats are told apart by spelling: a `.` or exponent makes a
/// float, so `1.0` stays a float. Integer literals beyond 64 bits become a
/// float only when the float holds them exactly.
pub fn classify_number(lexeme: &str, path: &Path<'_>) -> Result<AttributeValue> {
    let is_float = lexeme.bytes().any(|b| matches!(b, b'.' | b'e' | b'E'));
    if !is_float {
        if let Ok(i) = lexeme.parse::<i64>() {
            return Ok(AttributeValue::Int(i));
        }
    }
    let x: f64 = lexeme
        .parse()
        .map_err(|_| Error::schema(path, format!("invalid number {lexeme:?}")))?;
    if !x.is_finite() {
        return Err(Error::schema(path, format!("number {lexeme} overflows a 64-bit float")));
    }
    if !is_float && format!("{x:.0}") != lexeme {
        return Err(Error::IntOutOfRange {
            path: path.to_string(),
            literal: lexeme.to_owned(),
        });
    }
    Ok(AttributeValue::Float(x))
}

/// Collects warnings and applies the strict-mode promotions.
#[derive(Debug, Default)]
pub(crate) struct ReadContext {
    pub strict: bool,
    pub warnings: Vec<Warning>,
}

impl ReadContext {
    pub fn new(strict: bool) -> Self {
        ReadContext {
            strict,
            warnings: Vec::new(),
        }
    }

    /// Duplicate member `key` inside the object at `path`; last one wins.
    pub fn duplicate_key(&mut self, path: &Path<'_>, key: &str) -> Result<()> {
        if self.strict {
            return Err(Error::DuplicateKey {
                path: path.to_string(),
                key: key.to_owned(),
            });
        }
        self.warnings.push(Warning::new(
            "DuplicateKey",
            path,
            format!("duplicate key {key:?}; the last occurrence wins"),
        ));
        Ok(())
    }

    pub fn unknown_key(&mut self, path: &Path<'_>) -> Result<()> {
        if self.strict {
            return Err(Error::UnknownKey {
                path: path.to_string(),
            });
        }
        self.warnings
            .push(Warning::new("UnknownKey", path, "unknown key ignored"));
        Ok(())
    }

    pub fn nested_without_value(&mut self, path: &Path<'_>) {
        self.warnings.push(Warning::new(
            "NestedWithoutValue",
            path,
            "nested attribute has no \"value\"; using an empty string",
        ));
    }

    pub fn insert(&mut self, map: &mut AttrMap, path: &Path<'_>, key: String, attr: Attribute) -> Result<()> {
        if map.contains_key(&key) {
            self.duplicate_key(path, &key)?;
        }
        map.insert(key, attr);
        Ok(())
    }
}

pub fn mixed_reserved(path: &Path<'_>) -> Error {
    Error::reserved(
        path,
        "object mixes the reserved keys \"value\"/\"nested-attrs\" with other keys",
    )
}

pub fn nested_not_object(path: &Path<'_>) -> Error {
    Error::reserved(path, "\"nested-attrs\" must be an object")
}

pub fn nested_as_value(path: &Path<'_>) -> Error {
    Error::reserved(path, "a nested attribute cannot be used as a value")
}
