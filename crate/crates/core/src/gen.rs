//! Deterministic synthetic event logs.
//!
//! Every trace draws from its own ChaCha8 stream (`seed`, stream `i + 1`),
//! so trace `i` is the same no matter how many traces are requested. Trace
//! lengths follow a geometric distribution truncated to
//! `1..=max_trace_length` whose parameter is solved numerically to hit
//! `mean_events_per_trace`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AttrMap, Attribute, AttributeValue, Event, EventLog, Extension, Timestamp, Trace,
};

/// Relative frequencies of the value kinds used for extra attributes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttrMix {
    pub string: f64,
    pub date: f64,
    pub int: f64,
    pub float: f64,
    pub boolean: f64,
    pub list: f64,
    pub container: f64,
}

impl Default for AttrMix {
    fn default() -> Self {
        AttrMix {
            string: 0.3,
            date: 0.1,
            int: 0.2,
            float: 0.15,
            boolean: 0.1,
            list: 0.075,
            container: 0.075,
        }
    }
}

impl AttrMix {
    fn weights(&self) -> [f64; 7] {
        [self.string, self.date, self.int, self.float, self.boolean, self.list, self.container]
    }
}

/// How many of the extra trace and event attributes are declared global.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalSpec {
    pub trace: usize,
    pub event: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenProfile {
    pub seed: u64,
    pub traces: usize,
    pub mean_events_per_trace: f64,
    pub max_trace_length: usize,
    pub distinct_activities: usize,
    pub attr_mix: AttrMix,
    pub extra_event_attrs: usize,
    pub extra_trace_attrs: usize,
    pub extra_log_attrs: usize,
    /// Chance that a generated attribute carries nested attributes.
    pub nesting_prob: f64,
    pub global_spec: GlobalSpec,
}

impl Default for GenProfile {
    fn default() -> Self {
        GenProfile {
            seed: 0,
            traces: 100,
            mean_events_per_trace: 5.0,
            max_trace_length: 20,
            distinct_activities: 10,
            attr_mix: AttrMix::default(),
            extra_event_attrs: 2,
            extra_trace_attrs: 1,
            extra_log_attrs: 2,
            nesting_prob: 0.1,
            global_spec: GlobalSpec { trace: 1, event: 1 },
        }
    }
}

/// Named profiles shaped like well-known logs.
pub const PRESETS: [&str; 3] = ["level_d2", "bpic15_5", "bpic17"];

impl GenProfile {
    fn shaped(traces: usize, events: usize, activities: usize, max_len: usize) -> Self {
        GenProfile {
            seed: 1,
            traces,
            mean_events_per_trace: events as f64 / traces as f64,
            max_trace_length: max_len,
            distinct_activities: activities,
            ..GenProfile::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "level_d2" | "d2" => Some(Self::level_d2()),
            "bpic15_5" => Some(Self::bpic15_5()),
            "bpic17" => Some(Self::bpic17()),
            _ => None,
        }
    }

    /// 1104 traces, about 11855 events, 8 activities, traces of at most 24.
    pub fn level_d2() -> Self {
        Self::shaped(1104, 11855, 8, 24)
    }

    /// 1156 traces, about 59083 events, 389 activities, traces of at most 154.
    pub fn bpic15_5() -> Self {
        Self::shaped(1156, 59083, 389, 154)
    }

    /// 31509 traces, about 1202267 events, 26 activities, traces of at most 180.
    pub fn bpic17() -> Self {
        Self::shaped(31509, 1202267, 26, 180)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        let w = self.attr_mix.weights();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return bad("attr_mix proportions must be finite and non-negative".into());
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("attr_mix proportions sum to {sum}, not 1"));
        }
        if !(0.0..=1.0).contains(&self.nesting_prob) {
            return bad(format!("nesting_prob {} is outside [0, 1]", self.nesting_prob));
        }
        if self.global_spec.event > self.extra_event_attrs {
            return bad("global_spec.event exceeds extra_event_attrs".into());
        }
        if self.global_spec.trace > self.extra_trace_attrs {
            return bad("global_spec.trace exceeds extra_trace_attrs".into());
        }
        if self.traces == 0 {
            return Ok(());
        }
        if self.max_trace_length == 0 || self.distinct_activities == 0 {
            return bad("max_trace_length and distinct_activities must be positive".into());
        }
        let upper = (self.max_trace_length as f64 + 1.0) / 2.0;
        if !(self.mean_events_per_trace >= 1.0 && self.mean_events_per_trace <= upper) {
            return bad(format!(
                "mean_events_per_trace must lie in [1, {upper}] for max_trace_length {}",
                self.max_trace_length
            ));
        }
        Ok(())
    }
}

/// Trace-length sampler for the truncated geometric distribution.
#[derive(Debug, Clone, Copy)]
struct LengthDist {
    p: f64,
    max: usize,
}

fn truncated_geometric_mean(p: f64, max: usize) -> f64 {
    let q = 1.0 - p;
    let (mut num, mut den, mut w) = (0.0, 0.0, 1.0);
    for k in 1..=max {
        num += k as f64 * w;
        den += w;
        w *= q;
    }
    num / den
}

impl LengthDist {
    fn solve(mean: f64, max: usize) -> Self {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if truncated_geometric_mean(mid, max) > mean {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        LengthDist { p: 0.5 * (lo + hi), max }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let q = 1.0 - self.p;
        if q >= 1.0 - 1e-12 {
            return rng.random_range(1..=self.max);
        }
        if q <= 1e-12 {
            return 1;
        }
        let u: f64 = rng.random();
        let tail = 1.0 - q.powi(self.max as i32);
        let k = 1.0 + ((1.0 - u * tail).ln() / q.ln()).floor();
        (k as usize).clamp(1, self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Str,
    Date,
    Int,
    Float,
    Boolean,
    List,
    Container,
}

const KINDS: [Kind; 7] = [Kind::Str, Kind::Date, Kind::Int, Kind::Float, Kind::Boolean, Kind::List, Kind::Container];
const SCALARS: [Kind; 5] = [Kind::Str, Kind::Date, Kind::Int, Kind::Float, Kind::Boolean];

const FRAGMENTS: [&str; 16] = [
    " ", "&", "<", ">", "\"", "'", "é", "日本", "🙂", "\t", "\n", "x", "42", "-", ":", "Straße",
];
const LEADS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
const OFFSETS: [i16; 6] = [0, 60, 120, -300, 330, -600];

struct Gen<'p> {
    profile: &'p GenProfile,
    mix: [f64; 7],
}

impl Gen<'_> {
    fn kind(&self, rng: &mut impl Rng) -> Kind {
        let mut u: f64 = rng.random();
        for (k, w) in KINDS.iter().zip(self.mix) {
            if u < w {
                return *k;
            }
            u -= w;
        }
        *KINDS.iter().zip(self.mix).rev().find(|(_, w)| *w > 0.0).map(|(k, _)| k).unwrap_or(&Kind::Str)
    }

    fn string(rng: &mut impl Rng) -> String {
        let mut s = String::new();
        s.push(LEADS[rng.random_range(0..LEADS.len())] as char);
        for _ in 0..rng.random_range(0..6) {
            s.push_str(FRAGMENTS[rng.random_range(0..FRAGMENTS.len())]);
        }
        s
    }

    fn timestamp(rng: &mut impl Rng) -> Timestamp {
        let millis = rng.random_range(0..4_102_444_800_000_i64);
        Timestamp::from_millis(millis, OFFSETS[rng.random_range(0..OFFSETS.len())]).expect("in range")
    }

    fn float(rng: &mut impl Rng) -> f64 {
        match rng.random_range(0..5) {
            0 => rng.random_range(-1e6..1e6),
            1 => rng.random_range(-1000..1000) as f64,
            2 => {
                let m: f64 = rng.random_range(1.0..10.0);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                sign * m * 10f64.powi(rng.random_range(-300..300))
            }
            3 => *[0.0, -0.0, 0.1, f64::MIN_POSITIVE, 5e-324, f64::MAX].get(rng.random_range(0..6)).unwrap(),
            _ => rng.random::<f64>(),
        }
    }

    fn int(rng: &mut impl Rng) -> i64 {
        match rng.random_range(0..4) {
            0 => rng.random(),
            1 => *[i64::MIN, i64::MAX, 0, -1].get(rng.random_range(0..4)).unwrap(),
            _ => rng.random_range(-10_000..10_000),
        }
    }

    fn scalar(kind: Kind, rng: &mut impl Rng) -> AttributeValue {
        match kind {
            Kind::Str => AttributeValue::Str(Self::string(rng)),
            Kind::Date => AttributeValue::Date(Self::timestamp(rng)),
            Kind::Int => AttributeValue::Int(Self::int(rng)),
            Kind::Float => AttributeValue::Float(Self::float(rng)),
            Kind::Boolean => AttributeValue::Boolean(rng.random_bool(0.5)),
            Kind::List | Kind::Container => unreachable!("not a scalar kind"),
        }
    }

    fn children(&self, depth: usize, rng: &mut impl Rng) -> AttrMap {
        let mut map = AttrMap::new();
        if depth < 2 && rng.random_bool(self.profile.nesting_prob) {
            for j in 0..rng.random_range(1..=2) {
                let kind = SCALARS[rng.random_range(0..SCALARS.len())];
                map.insert(format!("nested:{j}"), self.attribute(kind, depth + 1, rng));
            }
        }
        map
    }

    fn attribute(&self, kind: Kind, depth: usize, rng: &mut impl Rng) -> Attribute {
        match kind {
            Kind::List => {
                let items = (0..rng.random_range(0..=3))
                    .map(|_| {
                        let k = SCALARS[rng.random_range(0..SCALARS.len())];
                        ("item".to_owned(), Attribute::new(Self::scalar(k, rng)))
                    })
                    .collect();
                Attribute::nested(AttributeValue::List(items), self.children(depth, rng))
            }
            Kind::Container => {
                let mut entries = AttrMap::new();
                for j in 0..rng.random_range(0..=3) {
                    let k = SCALARS[rng.random_range(0..SCALARS.len())];
                    entries.insert(format!("field:{j}"), self.attribute(k, depth + 1, rng));
                }
                Attribute::new(AttributeValue::Container(entries))
            }
            scalar => Attribute::nested(Self::scalar(scalar, rng), self.children(depth, rng)),
        }
    }
}

fn default_value(kind: Kind) -> AttributeValue {
    match kind {
        Kind::Str => AttributeValue::Str("__INVALID__".into()),
        Kind::Date => AttributeValue::Date(Timestamp::from_millis(0, 0).expect("epoch")),
        Kind::Int => AttributeValue::Int(0),
        Kind::Float => AttributeValue::Float(0.0),
        Kind::Boolean => AttributeValue::Boolean(false),
        Kind::List => AttributeValue::List(Vec::new()),
        Kind::Container => AttributeValue::Container(AttrMap::new()),
    }
}

pub fn activity_name(i: usize) -> String {
    format!("Activity {:03}", i + 1)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Builds the log described by `profile`. Trace 0 always has the maximum
/// length, and trace `i` starts with activity `i mod distinct_activities`,
/// so the length bound and the alphabet are both reached once there are
/// enough traces.
pub fn generate(profile: &GenProfile) -> Result<EventLog> {
    profile.validate()?;
    let mut log = EventLog::new();
    if profile.traces == 0 {
        return Ok(log);
    }
    let g = Gen {
        profile,
        mix: profile.attr_mix.weights(),
    };
    let mut head = rng_for(profile.seed, 0);
    let event_kinds: Vec<Kind> = (0..profile.extra_event_attrs).map(|_| g.kind(&mut head)).collect();
    let trace_kinds: Vec<Kind> = (0..profile.extra_trace_attrs).map(|_| g.kind(&mut head)).collect();

    log.extensions = vec![
        Extension::new("Concept", "concept", "http://www.xes-standard.org/concept.xesext"),
        Extension::new("Time", "time", "http://www.xes-standard.org/time.xesext"),
        Extension::new("Lifecycle", "lifecycle", "http://www.xes-standard.org/lifecycle.xesext"),
        Extension::new("Organizational", "org", "http://www.xes-standard.org/org.xesext"),
    ];
    let tg = &mut log.globals.trace_level;
    tg.insert("concept:name".into(), Attribute::new("__INVALID__"));
    for (i, k) in trace_kinds.iter().take(profile.global_spec.trace).enumerate() {
        tg.insert(format!("trace_attr:{i}"), Attribute::new(default_value(*k)));
    }
    let eg = &mut log.globals.event_level;
    eg.insert("concept:name".into(), Attribute::new("__INVALID__"));
    eg.insert("time:timestamp".into(), Attribute::new(default_value(Kind::Date)));
    eg.insert("lifecycle:transition".into(), Attribute::new("complete"));
    eg.insert("org:resource".into(), Attribute::new("__INVALID__"));
    for (i, k) in event_kinds.iter().take(profile.global_spec.event).enumerate() {
        eg.insert(format!("event_attr:{i}"), Attribute::new(default_value(*k)));
    }
    log.classifiers.insert(
        "Activity classifier".into(),
        vec!["concept:name".into(), "lifecycle:transition".into()],
    );
    log.attributes.insert("concept:name".into(), Attribute::new("synthetic log"));
    log.attributes.insert("source:seed".into(), Attribute::new(profile.seed as i64));
    for i in 0..profile.extra_log_attrs {
        let k = g.kind(&mut head);
        log.attributes.insert(format!("log_attr:{i}"), g.attribute(k, 0, &mut head));
    }

    let lengths = LengthDist::solve(profile.mean_events_per_trace, profile.max_trace_length);
    log.traces.reserve(profile.traces);
    for i in 0..profile.traces {
        let mut rng = rng_for(profile.seed, i as u64 + 1);
        let len = if i == 0 { profile.max_trace_length } else { lengths.sample(&mut rng) };
        let mut trace = Trace::default();
        trace.attributes.insert("concept:name".into(), Attribute::new(format!("case {i}")));
        for (j, k) in trace_kinds.iter().enumerate() {
            trace.attributes.insert(format!("trace_attr:{j}"), g.attribute(*k, 0, &mut rng));
        }
        let offset = OFFSETS[rng.random_range(0..OFFSETS.len())];
        let mut clock = rng.random_range(1_262_304_000_000_i64..1_577_836_800_000);
        trace.events.reserve(len);
        for e in 0..len {
            let activity = if e == 0 {
                i % profile.distinct_activities
            } else {
                rng.random_range(0..profile.distinct_activities)
            };
            clock += rng.random_range(0..=3_600_000);
            let mut event = Event::new()
                .with("concept:name", activity_name(activity))
                .with("time:timestamp", Timestamp::from_millis(clock, offset).expect("in range"))
                .with("lifecycle:transition", if rng.random_bool(0.5) { "start" } else { "complete" })
                .with("org:resource", format!("Resource {:02}", rng.random_range(0..20)));
            for (j, k) in event_kinds.iter().enumerate() {
                event.attributes.insert(format!("event_attr:{j}"), g.attribute(*k, 0, &mut rng));
            }
            trace.events.push(event);
        }
        log.traces.push(trace);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::logs_equivalent;
    use crate::stats::log_statistics;

    #[test]
    fn zero_traces_is_empty() {
        let p = GenProfile { traces: 0, ..GenProfile::default() };
        assert!(logs_equivalent(&generate(&p).unwrap(), &EventLog::new()));
    }

    #[test]
    fn deterministic() {
        let p = GenProfile { seed: 42, ..GenProfile::default() };
        assert!(logs_equivalent(&generate(&p).unwrap(), &generate(&p).unwrap()));
        let q = GenProfile { seed: 43, ..p.clone() };
        assert!(!logs_equivalent(&generate(&p).unwrap(), &generate(&q).unwrap()));
    }

    #[test]
    fn level_d2_calibration() {
        let log = generate(&GenProfile::level_d2()).unwrap();
        let s = log_statistics(&log);
        assert_eq!(s.trace_count, 1104);
        assert_eq!(s.distinct_activities, 8);
        assert_eq!(s.max_trace_length, 24);
        let rel = (s.event_count as f64 - 11855.0).abs() / 11855.0;
        assert!(rel <= 0.10, "{s}");
    }

    #[test]
    fn truncated_geometric_mean_is_hit() {
        for (mean, max) in [(1.0, 1), (1.0, 10), (10.738, 24), (51.11, 154), (12.5, 24), (2.0, 3)] {
            let d = LengthDist::solve(mean, max);
            assert!((truncated_geometric_mean(d.p, max) - mean).abs() < 1e-6, "{mean} {max}");
        }
    }

    #[test]
    fn invalid_profiles() {
        let base = GenProfile::default();
        for p in [
            GenProfile { mean_events_per_trace: 11.0, max_trace_length: 20, ..base.clone() },
            GenProfile { mean_events_per_trace: 0.5, ..base.clone() },
            GenProfile { nesting_prob: 1.5, ..base.clone() },
            GenProfile { attr_mix: AttrMix { string: 0.5, ..AttrMix::default() }, ..base.clone() },
            GenProfile { global_spec: GlobalSpec { trace: 0, event: 3 }, ..base.clone() },
            GenProfile { distinct_activities: 0, ..base.clone() },
        ] {
            assert!(matches!(generate(&p), Err(Error::InvalidProfile(_))), "{p:?}");
        }
    }

    #[test]
    fn timestamps_nondecreasing() {
        let log = generate(&GenProfile { seed: 7, ..GenProfile::default() }).unwrap();
        for t in &log.traces {
            let times: Vec<i64> = t
                .events
                .iter()
                .map(|e| match e.get("time:timestamp") {
                    Some(AttributeValue::Date(ts)) => ts.unix_millis(),
                    other => panic!("{other:?}"),
                })
                .collect();
            assert!(times.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn profile_json_defaults() {
        let p: GenProfile = serde_json::from_str(r#"{"seed":9,"traces":3}"#).unwrap();
        assert_eq!(p.seed, 9);
        assert_eq!(p.max_trace_length, GenProfile::default().max_trace_length);
        assert!(serde_json::from_str::<GenProfile>(r#"{"sede":9}"#).is_err());
        assert_eq!(GenProfile::preset("Level-D2"), Some(GenProfile::level_d2()));
    }
}
