use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserialize, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// serde_json hands arbitrary-precision numbers over as a one-entry map
/// keyed by this token.
const NUMBER_TOKEN: &str = "$serde_json::private::Number";

/// A whole JSON document held in memory. Objects keep their members in
/// source order, duplicates included; numbers keep their source spelling
/// (serde_json normalizes exponents to `e+`/`e-`).
#[derive(Debug, Clone, PartialEq)]
pub enum JsonTree {
    Null,
    Bool(bool),
    Number(String),
    Str(String),
    Array(Vec<JsonTree>),
    Object(Vec<(String, JsonTree)>),
}

impl JsonTree {
    pub fn parse(bytes: &[u8]) -> Result<JsonTree> {
        serde_json::from_slice(bytes).map_err(|e| Error::MalformedJson {
            offset: byte_offset(bytes, e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            JsonTree::Null => "null",
            JsonTree::Bool(_) => "boolean",
            JsonTree::Number(_) => "number",
            JsonTree::Str(_) => "string",
            JsonTree::Array(_) => "array",
            JsonTree::Object(_) => "object",
        }
    }
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> u64 {
    if line == 0 {
        return 0;
    }
    let line_start = bytes
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == b'\n')
        .nth(line.wrapping_sub(2))
        .map_or(0, |(i, _)| i + 1);
    let line_start = if line == 1 { 0 } else { line_start };
    (line_start + column.saturating_sub(1)).min(bytes.len()) as u64
}

struct TreeVisitor;

impl<'de> Visitor<'de> for TreeVisitor {
    type Value = JsonTree;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("any JSON value")
    }

    fn visit_unit<E: de::Error>(self) -> Result<JsonTree, E> {
        Ok(JsonTree::Null)
    }

    fn visit_bool<E: de::Error>(self, v: bool) -> Result<JsonTree, E> {
        Ok(JsonTree::Bool(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<JsonTree, E> {
        Ok(JsonTree::Number(v.to_string()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<JsonTree, E> {
        Ok(JsonTree::Number(v.to_string()))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<JsonTree, E> {
        // Only reachable without arbitrary_precision.
        Ok(JsonTree::Number(format!("{v:?}")))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<JsonTree, E> {
        Ok(JsonTree::Str(v.to_owned()))
    }

    fn visit_string<E: de::Error>(self, v: String) -> Result<JsonTree, E> {
        Ok(JsonTree::Str(v))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<JsonTree, A::Error> {
        let mut items = Vec::with_capacity(seq.size_hint().unwrap_or(0));
        while let Some(item) = seq.next_element()? {
            items.push(item);
        }
        Ok(JsonTree::Array(items))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<JsonTree, A::Error> {
        let mut members = Vec::new();
        while let Some(key) = map.next_key::<String>()? {
            if key == NUMBER_TOKEN && members.is_empty() {
                let lexeme: String = map.next_value()?;
                return Ok(JsonTree::Number(lexeme));
            }
            members.push((key, map.next_value()?));
        }
        Ok(JsonTree::Object(members))
    }
}

impl<'de> Deserialize<'de> for JsonTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(TreeVisitor)
    }
}

impl Serialize for JsonTree {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            JsonTree::Null => s.serialize_unit(),
            JsonTree::Bool(b) => s.serialize_bool(*b),
            JsonTree::Number(lexeme) => serde_json::Number::from_str(lexeme)
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            JsonTree::Str(v) => s.serialize_str(v),
            JsonTree::Array(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            JsonTree::Object(members) => {
                let mut map = s.serialize_map(Some(members.len()))?;
                for (k, v) in members {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}
