//! In-memory event log: log, traces, events and their typed attributes.
//!
//! Maps are insertion ordered ([`AttrMap`]) and comparison is order
//! sensitive, so a log that survives a round trip compares equal to the
//! original only if nothing moved. Floats compare by bit pattern and dates
//! compare by (instant in milliseconds, UTC offset).

use std::fmt;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate, NaiveTime, Timelike};
use indexmap::IndexMap;

pub use crate::attrmap::AttrMap;

/// Point in time with millisecond precision and a UTC offset (whole minutes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Timestamp {
    millis: i64,
    offset_minutes: i16,
}

impl Timestamp {
    /// Builds a timestamp from Unix milliseconds and an offset in minutes.
    /// Returns `None` if the offset is not within ±23:59 or the local date
    /// falls outside years 0000..=9999.
    pub fn from_millis(millis: i64, offset_minutes: i16) -> Option<Self> {
        if offset_minutes.unsigned_abs() >= 24 * 60 {
            return None;
        }
        let ts = Timestamp {
            millis,
            offset_minutes,
        };
        let year = ts.to_chrono()?.year();
        (0..=9999).contains(&year).then_some(ts)
    }

    /// Truncates sub-millisecond precision.
    pub fn from_chrono(dt: &DateTime<FixedOffset>) -> Option<Self> {
        let secs = dt.offset().local_minus_utc();
        if secs % 60 != 0 {
            return None;
        }
        Self::from_millis(dt.timestamp_millis(), (secs / 60) as i16)
    }

    pub fn to_chrono(&self) -> Option<DateTime<FixedOffset>> {
        let offset = FixedOffset::east_opt(i32::from(self.offset_minutes) * 60)?;
        Some(DateTime::from_timestamp_millis(self.millis)?.with_timezone(&offset))
    }

    pub fn unix_millis(&self) -> i64 {
        self.millis
    }

    pub fn offset_minutes(&self) -> i16 {
        self.offset_minutes
    }

    /// Parses `YYYY-MM-DDThh:mm:ss(.fff)?(Z|±hh:mm)`. The fraction, when
    /// present, has exactly three digits. Returns `None` when the text does
    /// not have that shape or names an impossible calendar date or time.
    pub fn parse_iso(text: &str) -> Option<Self> {
        let b = text.as_bytes();
        if b.len() < 20 {
            return None;
        }
        let year = digits(&b[0..4])?;
        let month = digits(&b[5..7])?;
        let day = digits(&b[8..10])?;
        let hour = digits(&b[11..13])?;
        let minute = digits(&b[14..16])?;
        let second = digits(&b[17..19])?;
        if b[4] != b'-' || b[7] != b'-' || b[10] != b'T' || b[13] != b':' || b[16] != b':' {
            return None;
        }
        let mut rest = &b[19..];
        let mut millis = 0;
        if rest.first() == Some(&b'.') {
            if rest.len() < 4 {
                return None;
            }
            millis = digits(&rest[1..4])?;
            rest = &rest[4..];
        }
        let offset_minutes: i32 = match rest {
            [b'Z'] => 0,
            [sign @ (b'+' | b'-'), h1, h2, b':', m1, m2] => {
                let oh = digits(&[*h1, *h2])?;
                let om = digits(&[*m1, *m2])?;
                if oh > 23 || om > 59 {
                    return None;
                }
                let total = (oh * 60 + om) as i32;
                if *sign == b'-' {
                    -total
                } else {
                    total
                }
            }
            _ => return None,
        };
        let date = NaiveDate::from_ymd_opt(year as i32, month, day)?;
        if second > 59 {
            return None;
        }
        let time = NaiveTime::from_hms_milli_opt(hour, minute, second, millis)?;
        let local = date.and_time(time);
        let utc_millis = local.and_utc().timestamp_millis() - i64::from(offset_minutes) * 60_000;
        Self::from_millis(utc_millis, offset_minutes as i16)
    }

    /// Renders as ISO-8601 with milliseconds and `Z` or `±hh:mm`.
    pub fn to_iso(&self) -> String {
        let dt = self
            .to_chrono()
            .expect("timestamp constructed within the representable range");
        let mut out = format!(
            "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}",
            dt.year(),
            dt.month(),
            dt.day(),
            dt.hour(),
            dt.minute(),
            dt.second(),
            dt.timestamp_subsec_millis()
        );
        if self.offset_minutes == 0 {
            out.push('Z');
        } else {
            let sign = if self.offset_minutes < 0 { '-' } else { '+' };
            let abs = self.offset_minutes.unsigned_abs();
            out.push_str(&format!("{sign}{:02}:{:02}", abs / 60, abs % 60));
        }
        out
    }
}

fn digits(b: &[u8]) -> Option<u32> {
    b.iter().try_fold(0u32, |acc, &c| {
        c.is_ascii_digit().then(|| acc * 10 + u32::from(c - b'0'))
    })
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso())
    }
}

/// The value kinds JXES can carry. There is no ID kind.
#[derive(Debug, Clone)]
pub enum AttributeValue {
    Str(String),
    Date(Timestamp),
    Int(i64),
    Float(f64),
    Boolean(bool),
    /// Ordered key/value items; keys may repeat.
    List(Vec<(String, Attribute)>),
    /// Ordered map with unique keys.
    Container(AttrMap),
}

impl AttributeValue {
    pub fn kind(&self) -> &'static str {
        match self {
            AttributeValue::Str(_) => "string",
            AttributeValue::Date(_) => "date",
            AttributeValue::Int(_) => "int",
            AttributeValue::Float(_) => "float",
            AttributeValue::Boolean(_) => "boolean",
            AttributeValue::List(_) => "list",
            AttributeValue::Container(_) => "container",
        }
    }
}

impl PartialEq for AttributeValue {
    fn eq(&self, other: &Self) -> bool {
        use AttributeValue::*;
        match (self, other) {
            (Str(a), Str(b)) => a == b,
            (Date(a), Date(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Boolean(a), Boolean(b)) => a == b,
            (List(a), List(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|((ka, va), (kb, vb))| ka == kb && va == vb)
            }
            (Container(a), Container(b)) => maps_equal(a, b),
            _ => false,
        }
    }
}

impl Eq for AttributeValue {}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Str(s) => f.write_str(s),
            AttributeValue::Date(d) => write!(f, "{d}"),
            AttributeValue::Int(i) => write!(f, "{i}"),
            AttributeValue::Float(x) => write!(f, "{x:?}"),
            AttributeValue::Boolean(b) => write!(f, "{b}"),
            AttributeValue::List(items) => write!(f, "<list of {}>", items.len()),
            AttributeValue::Container(m) => write!(f, "<container of {}>", m.len()),
        }
    }
}

impl From<&str> for AttributeValue {
    fn from(s: &str) -> Self {
        AttributeValue::Str(s.to_owned())
    }
}

impl From<String> for AttributeValue {
    fn from(s: String) -> Self {
        AttributeValue::Str(s)
    }
}

impl From<i64> for AttributeValue {
    fn from(v: i64) -> Self {
        AttributeValue::Int(v)
    }
}

impl From<f64> for AttributeValue {
    fn from(v: f64) -> Self {
        AttributeValue::Float(v)
    }
}

impl From<bool> for AttributeValue {
    fn from(v: bool) -> Self {
        AttributeValue::Boolean(v)
    }
}

impl From<Timestamp> for AttributeValue {
    fn from(v: Timestamp) -> Self {
        AttributeValue::Date(v)
    }
}

/// A value plus optional nested child attributes. The key lives in the
/// owning map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub value: AttributeValue,
    pub children: AttrMap,
}

impl Attribute {
    pub fn new(value: impl Into<AttributeValue>) -> Self {
        Attribute {
            value: value.into(),
            children: AttrMap::new(),
        }
    }

    pub fn nested(value: impl Into<AttributeValue>, children: AttrMap) -> Self {
        Attribute {
            value: value.into(),
            children,
        }
    }

    pub fn is_nested(&self) -> bool {
        !self.children.is_empty()
    }
}

impl<T: Into<AttributeValue>> From<T> for Attribute {
    fn from(v: T) -> Self {
        Attribute::new(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Event {
    pub attributes: AttrMap,
}

impl Event {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, attr: impl Into<Attribute>) -> Self {
        self.attributes.insert(key.into(), attr.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&AttributeValue> {
        self.attributes.get(key).map(|a| &a.value)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        maps_equal(&self.attributes, &other.attributes)
    }
}

impl Eq for Event {}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub attributes: AttrMap,
    pub events: Vec<Event>,
}

impl PartialEq for Trace {
    fn eq(&self, other: &Self) -> bool {
        maps_equal(&self.attributes, &other.attributes) && self.events == other.events
    }
}

impl Eq for Trace {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub name: String,
    pub prefix: String,
    pub uri: String,
}

impl Extension {
    pub fn new(name: impl Into<String>, prefix: impl Into<String>, uri: impl Into<String>) -> Self {
        Extension {
            name: name.into(),
            prefix: prefix.into(),
            uri: uri.into(),
        }
    }

    /// Checks that all fields are non-empty and the URI parses.
    pub fn check(&self) -> Result<(), String> {
        for (field, v) in [("name", &self.name), ("prefix", &self.prefix), ("uri", &self.uri)] {
            if v.is_empty() {
                return Err(format!("extension {field} is empty"));
            }
        }
        url::Url::parse(&self.uri)
            .map(|_| ())
            .map_err(|e| format!("extension uri {:?} is not a valid URI: {e}", self.uri))
    }
}

/// Attributes declared present on every trace and on every event.
#[derive(Debug, Clone, Default)]
pub struct GlobalAttributes {
    pub trace_level: AttrMap,
    pub event_level: AttrMap,
}

impl GlobalAttributes {
    pub fn is_empty(&self) -> bool {
        self.trace_level.is_empty() && self.event_level.is_empty()
    }
}

impl PartialEq for GlobalAttributes {
    fn eq(&self, other: &Self) -> bool {
        maps_equal(&self.trace_level, &other.trace_level)
            && maps_equal(&self.event_level, &other.event_level)
    }
}

impl Eq for GlobalAttributes {}

/// Classifier name mapped to the attribute keys it combines.
pub type Classifiers = IndexMap<String, Vec<String>>;

#[derive(Debug, Clone, Default)]
pub struct EventLog {
    pub attributes: AttrMap,
    pub globals: GlobalAttributes,
    pub classifiers: Classifiers,
    pub extensions: Vec<Extension>,
    pub traces: Vec<Trace>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }
}

impl PartialEq for EventLog {
    fn eq(&self, other: &Self) -> bool {
        logs_equivalent(self, other)
    }
}

impl Eq for EventLog {}

/// True when both logs carry the same information in the same order.
pub fn logs_equivalent(a: &EventLog, b: &EventLog) -> bool {
    maps_equal(&a.attributes, &b.attributes)
        && a.globals == b.globals
        && a.classifiers.len() == b.classifiers.len()
        && a.classifiers.iter().eq(b.classifiers.iter())
        && a.extensions == b.extensions
        && a.traces == b.traces
}

fn maps_equal(a: &AttrMap, b: &AttrMap) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|((ka, va), (kb, vb))| ka == kb && va == vb)
}
