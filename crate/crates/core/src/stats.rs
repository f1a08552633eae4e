use std::collections::HashSet;

use serde::Serialize;

use crate::model::{EventLog, Trace};

/// Activity key used to build variants.
pub const ACTIVITY_KEY: &str = "concept:name";

/// Stands in for the activity of an event that has no `concept:name`.
pub const MISSING_ACTIVITY: &str = "\u{2205}";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LogStats {
    pub trace_count: usize,
    pub event_count: usize,
    pub variant_count: usize,
    pub distinct_activities: usize,
    pub max_trace_length: usize,
}

impl std::fmt::Display for LogStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "traces {}, events {}, variants {}, activities {}, max length {}",
            self.trace_count,
            self.event_count,
            self.variant_count,
            self.distinct_activities,
            self.max_trace_length
        )
    }
}

/// Activity labels of a trace's events, in order.
pub fn variant_of(trace: &Trace) -> Vec<String> {
    trace
        .events
        .iter()
        .map(|e| match e.get(ACTIVITY_KEY) {
            Some(v) => v.to_string(),
            None => MISSING_ACTIVITY.to_owned(),
        })
        .collect()
}

pub fn log_statistics(log: &EventLog) -> LogStats {
    let mut variants = HashSet::new();
    let mut activities = HashSet::new();
    let mut stats = LogStats {
        trace_count: log.traces.len(),
        ..LogStats::default()
    };
    for trace in &log.traces {
        stats.event_count += trace.events.len();
        stats.max_trace_length = stats.max_trace_length.max(trace.events.len());
        let variant = variant_of(trace);
        activities.extend(variant.iter().cloned());
        variants.insert(variant);
    }
    stats.variant_count = variants.len();
    stats.distinct_activities = activities.len();
    stats
}
