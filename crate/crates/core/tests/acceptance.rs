//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, and the process exits
//! non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use jxeskit_core::bench::{memory, render_tables, run_bench, BenchCase, Direction, TableFormat, TrackingAllocator};
use jxeskit_core::gen::{AttrMix, GlobalSpec};
use jxeskit_core::io::{encode_log, read_log, write_log};
use jxeskit_core::jxes::to_jxes_vec;
use jxeskit_core::validate::{error_count, validate_document};
use jxeskit_core::xes::{parse_xes, to_xes_vec, XesDocumentMeta};
use jxeskit_core::{
    canonicalize, generate, log_statistics, logs_equivalent, parse_jxes, AttrMap, Attribute, AttributeValue,
    BackendKind, Event, EventLog, Extension, GenProfile, LogFormat, ParseOptions, Timestamp, Trace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

const CORPUS_SIZE: usize = 200;
const CORPUS_SEED: u64 = 0x4A58_4553;
const STATS_PROFILES: usize = 50;
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(60);
const BENCH_BUDGET: Duration = Duration::from_secs(300);
const MIN_SIZE_SAVING: f64 = 0.20;
const STREAMING_MEMORY_RATIO: f64 = 0.7;
const MEMORY_LOG_EVENTS: usize = 100_000;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_profile(rng: &mut ChaCha8Rng) -> GenProfile {
    let max_len = rng.random_range(1..=30usize);
    let upper = (max_len as f64 + 1.0) / 2.0;
    let w: Vec<f64> = (0..7).map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut mix = AttrMix {
        string: w[0] / total,
        date: w[1] / total,
        int: w[2] / total,
        float: w[3] / total,
        boolean: w[4] / total,
        list: w[5] / total,
        container: 0.0,
    };
    mix.container = (1.0 - (mix.string + mix.date + mix.int + mix.float + mix.boolean + mix.list)).max(0.0);
    let extra_event = rng.random_range(0..=4);
    let extra_trace = rng.random_range(0..=3);
    GenProfile {
        seed: rng.random(),
        traces: rng.random_range(0..=30),
        mean_events_per_trace: rng.random_range(1.0..=upper),
        max_trace_length: max_len,
        distinct_activities: rng.random_range(1..=12),
        attr_mix: mix,
        extra_event_attrs: extra_event,
        extra_trace_attrs: extra_trace,
        extra_log_attrs: rng.random_range(0..=3),
        nesting_prob: rng.random_range(0.0..0.5),
        global_spec: GlobalSpec {
            trace: rng.random_range(0..=extra_trace),
            event: rng.random_range(0..=extra_event),
        },
    }
}

fn corpus() -> Vec<EventLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|_| generate(&random_profile(&mut rng)).expect("valid profile")).collect()
}

fn jxes_parse(bytes: &[u8], backend: BackendKind) -> Result<EventLog, String> {
    parse_jxes(bytes, &ParseOptions::new(backend)).map_err(|e| e.to_string())
}

fn xes_parse(bytes: &[u8]) -> Result<EventLog, String> {
    parse_xes(bytes).map(|(l, _)| l).map_err(|e| e.to_string())
}

fn xes_bytes(log: &EventLog) -> Result<Vec<u8>, String> {
    to_xes_vec(log, &XesDocumentMeta::standard()).map_err(|e| e.to_string())
}

fn criterion_round_trip(logs: &[EventLog]) -> Check {
    let start = Instant::now();
    let mut failures = 0;
    for (i, log) in logs.iter().enumerate() {
        let backend = BackendKind::ALL[i % 2];
        let xes_first = (|| {
            let l1 = xes_parse(&xes_bytes(log)?)?;
            let l2 = jxes_parse(&to_jxes_vec(&l1, backend, false).map_err(|e| e.to_string())?, backend)?;
            xes_parse(&xes_bytes(&l2)?)
        })();
        let jxes_first = (|| {
            let l1 = jxes_parse(&to_jxes_vec(log, backend, false).map_err(|e| e.to_string())?, backend)?;
            let l2 = xes_parse(&xes_bytes(&l1)?)?;
            jxes_parse(&canonicalize(&l2).map_err(|e| e.to_string())?, backend)
        })();
        for result in [xes_first, jxes_first] {
            if !result.as_ref().is_ok_and(|back| logs_equivalent(log, back)) {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(failures == 0, || format!("{failures} round-trip failures"))?;
    ensure(elapsed < ROUND_TRIP_BUDGET, || format!("took {elapsed:.1?}, budget {ROUND_TRIP_BUDGET:?}"))?;
    Ok(format!("{} logs, both directions, 0 failures, {elapsed:.1?}", logs.len()))
}

fn criterion_backends(logs: &[EventLog]) -> Check {
    let (mut parse_diffs, mut byte_diffs) = (0, 0);
    for log in logs {
        let doc = canonicalize(log).map_err(|e| e.to_string())?;
        let tree = jxes_parse(&doc, BackendKind::Tree)?;
        let streaming = jxes_parse(&doc, BackendKind::Streaming)?;
        if !logs_equivalent(&tree, &streaming) {
            parse_diffs += 1;
        }
        for pretty in [false, true] {
            let a = to_jxes_vec(&tree, BackendKind::Tree, pretty).map_err(|e| e.to_string())?;
            let b = to_jxes_vec(&streaming, BackendKind::Streaming, pretty).map_err(|e| e.to_string())?;
            if a != b || (!pretty && a != doc) {
                byte_diffs += 1;
            }
        }
    }
    ensure(parse_diffs == 0 && byte_diffs == 0, || {
        format!("{parse_diffs} parse disagreements, {byte_diffs} serialization differences")
    })?;
    Ok(format!("{} documents, parses equivalent, serializations byte-identical", logs.len()))
}

fn criterion_size() -> Check {
    let mut notes = Vec::new();
    for (name, profile) in [("level_d2", GenProfile::level_d2()), ("bpic15_5", GenProfile::bpic15_5())] {
        let log = generate(&profile).map_err(|e| e.to_string())?;
        let st = log_statistics(&log);
        let size = |f: LogFormat| encode_log(&log, f, BackendKind::Streaming).map(|b| b.len()).map_err(|e| e.to_string());
        let (jxes, xes, jxes_gz, xes_gz) =
            (size(LogFormat::Jxes)?, size(LogFormat::Xes)?, size(LogFormat::JxesGz)?, size(LogFormat::XesGz)?);
        let saving = 1.0 - jxes as f64 / xes as f64;
        ensure(saving >= MIN_SIZE_SAVING, || format!("{name}: JXES only {:.1}% smaller than XES", saving * 100.0))?;
        ensure(jxes_gz < jxes && xes_gz < xes, || format!("{name}: gzip variant not smaller"))?;
        notes.push(format!(
            "{name} ({} traces, {} events): JXES {jxes} vs XES {xes} bytes ({:.1}% smaller), gz {jxes_gz}/{xes_gz}",
            st.trace_count,
            st.event_count,
            saving * 100.0
        ));
    }
    Ok(notes.join("; "))
}

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn event_document(listing: &str) -> String {
    format!(r#"{{"traces":[{{"events":[{listing}]}}]}}"#)
}

fn map(pairs: Vec<(&str, Attribute)>) -> AttrMap {
    pairs.into_iter().map(|(k, a)| (k.to_owned(), a)).collect()
}

fn one_event(attrs: AttrMap) -> EventLog {
    let mut log = EventLog::new();
    log.traces.push(Trace {
        attributes: AttrMap::new(),
        events: vec![Event { attributes: attrs }],
    });
    log
}

fn expected_listings() -> Vec<(&'static str, String, EventLog)> {
    let stamp = || Attribute::new(Timestamp::from_millis(1_382_362_086_419, 0).unwrap());

    let mut basic = EventLog::new();
    basic.traces.push(Trace {
        attributes: map(vec![("name", "Mohamed".into()), ("age", "19".into())]),
        events: [("Activity 1", "Bob"), ("Activity 2", "Alice")]
            .into_iter()
            .map(|(a, r)| Event {
                attributes: map(vec![("concept:name", a.into()), ("date", stamp()), ("org:resource", r.into())]),
            })
            .collect(),
    });

    let types = one_event(map(vec![
        ("string", "hi".into()),
        ("date", stamp()),
        ("int", 1.into()),
        ("float", 1.0.into()),
        ("boolean", true.into()),
        (
            "list",
            Attribute::new(AttributeValue::List(vec![
                ("key".into(), 1.into()),
                ("key".into(), 2.into()),
                ("new key".into(), "new value".into()),
            ])),
        ),
        ("container", Attribute::new(AttributeValue::Container(map(vec![("key", 1.into()), ("key-2", "value 2".into())])))),
    ]));

    let nested = one_event(map(vec![(
        "Person",
        Attribute::nested(1, map(vec![("name", "Mohamed".into()), ("age", 19.into()), ("married", false.into())])),
    )]));

    let mut globals = EventLog::new();
    globals.globals.trace_level = map(vec![("Key 1", 1.into())]);
    globals.globals.event_level = map(vec![("Key 2", 2.into())]);

    let mut classifiers = EventLog::new();
    classifiers
        .classifiers
        .insert("Activity classifier".into(), vec!["concept:name".into(), "lifecycle:transition".into()]);

    let mut extensions = EventLog::new();
    extensions.extensions.push(Extension::new("Test", "concept", "http://www.test.org/test.xes"));

    vec![
        ("basic_structure", fixture("basic_structure.json"), basic),
        ("attribute_types", event_document(&fixture("attribute_types.json")), types),
        ("nested_attribute", event_document(&fixture("nested_attribute.json")), nested),
        ("global_attrs", fixture("global_attrs.json"), globals),
        ("classifiers", fixture("classifiers.json"), classifiers),
        ("extensions", fixture("extensions.json"), extensions),
    ]
}

fn criterion_golden() -> Check {
    let mut model_diffs = Vec::new();
    let mut render_diffs = Vec::new();
    let listings = expected_listings();
    for (name, text, expected) in &listings {
        let canonical = fixture(&format!("{name}.canonical.json"));
        let canonical = canonical.trim_end().as_bytes();
        for backend in BackendKind::ALL {
            let log = jxes_parse(text.as_bytes(), backend)?;
            if !logs_equivalent(&log, expected) {
                model_diffs.push(format!("{name}/{backend}"));
            }
            if to_jxes_vec(&log, backend, false).map_err(|e| e.to_string())? != canonical {
                render_diffs.push(format!("{name}/{backend}"));
            }
        }
    }
    let verbatim = fixture("basic_structure_verbatim.json");
    let rejected = BackendKind::ALL.iter().all(|b| jxes_parse(verbatim.as_bytes(), *b).is_err());
    ensure(model_diffs.is_empty(), || format!("model mismatches: {model_diffs:?}"))?;
    ensure(render_diffs.is_empty(), || format!("rendering diffs: {render_diffs:?}"))?;
    ensure(rejected, || "listing with a trailing comma was accepted".into())?;
    Ok(format!("{} listings x 2 backends, 0 model mismatches, 0 rendering diffs", listings.len()))
}

fn well_formed_tables(md: &str) -> Result<usize, String> {
    let mut tables = 0;
    for block in md.split("### ").skip(1) {
        tables += 1;
        let rows: Vec<&str> = block.lines().filter(|l| l.starts_with('|')).collect();
        ensure(rows.len() >= 3, || format!("table without rows: {block}"))?;
        let width = rows[0].matches('|').count();
        ensure(rows.iter().all(|r| r.matches('|').count() == width), || format!("ragged table: {block}"))?;
        for row in &rows[2..] {
            let cells: Vec<&str> = row.trim_matches('|').split('|').map(str::trim).skip(1).collect();
            let values: Vec<Option<f64>> = cells.iter().map(|c| c.trim_matches('*').parse().ok()).collect();
            let flagged: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].starts_with("**")).collect();
            let any_value = values.iter().any(Option::is_some);
            ensure(flagged.len() == usize::from(any_value), || format!("row needs one best flag: {row}"))?;
            if let Some(&b) = flagged.first() {
                let min = values.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
                ensure(values[b] == Some(min), || format!("best flag not on the minimum: {row}"))?;
            }
        }
    }
    Ok(tables)
}

fn import_peak(path: &Path, backend: BackendKind) -> Result<usize, String> {
    let opts = ParseOptions::new(backend);
    let mut best = usize::MAX;
    for _ in 0..2 {
        let (log, peak) = memory::measure(|| read_log(path, LogFormat::Jxes, &opts));
        log.map_err(|e| e.to_string())?;
        best = best.min(peak);
    }
    Ok(best)
}

fn criterion_bench() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("level_d2.json");
    let d2 = generate(&GenProfile::level_d2()).map_err(|e| e.to_string())?;
    write_log(&d2, &input, LogFormat::Jxes, BackendKind::Streaming).map_err(|e| e.to_string())?;
    drop(d2);

    let targets = [
        (LogFormat::Jxes, Some(BackendKind::Tree)),
        (LogFormat::Jxes, Some(BackendKind::Streaming)),
        (LogFormat::Xes, None),
        (LogFormat::XesGz, None),
    ];
    let mut cases: Vec<BenchCase> = Direction::ALL
        .iter()
        .flat_map(|&d| targets.iter().map(|&(f, b)| BenchCase::new(&input, f, d, b)).collect::<Vec<_>>())
        .collect();
    cases.push(BenchCase::new(dir.path().join("missing.json"), LogFormat::Jxes, Direction::Import, None));
    let report = run_bench(&cases, &dir.path().join("scratch")).map_err(|e| e.to_string())?;
    let ok = report.results.iter().filter(|r| r.stats().is_some()).count();
    ensure(ok == 8, || format!("{ok} of 8 cases completed"))?;
    ensure(report.results.len() == 9 && report.results[8].stats().is_none(), || {
        "failing case was not recorded".into()
    })?;
    for r in report.results.iter().filter_map(|r| r.stats()) {
        ensure(r.run_ms.len() == 3, || "expected 3 runs per case".into())?;
    }
    let tables = well_formed_tables(&render_tables(&report, TableFormat::Markdown).map_err(|e| e.to_string())?)?;
    ensure(tables == 5, || format!("expected 5 tables, got {tables}"))?;
    let csv = render_tables(&report, TableFormat::Csv).map_err(|e| e.to_string())?;
    let flagged_rows = csv.lines().filter(|l| l.split(',').any(|c| c.ends_with('*'))).count();
    let value_rows = csv.lines().filter(|l| l.starts_with("level_d2.json,")).count();
    ensure(flagged_rows == tables && value_rows == tables, || format!("csv best flags wrong:\n{csv}"))?;

    let per_trace = GenProfile::level_d2().mean_events_per_trace;
    let profile = GenProfile {
        traces: (MEMORY_LOG_EVENTS as f64 / per_trace).ceil() as usize,
        ..GenProfile::level_d2()
    };
    let big = generate(&profile).map_err(|e| e.to_string())?;
    let events = big.event_count();
    let big_path = dir.path().join("big.json");
    write_log(&big, &big_path, LogFormat::Jxes, BackendKind::Streaming).map_err(|e| e.to_string())?;
    drop(big);
    ensure(events >= MEMORY_LOG_EVENTS * 9 / 10, || format!("memory log has only {events} events"))?;
    let tree = import_peak(&big_path, BackendKind::Tree)?;
    let streaming = import_peak(&big_path, BackendKind::Streaming)?;
    let ratio = streaming as f64 / tree as f64;
    ensure(ratio <= STREAMING_MEMORY_RATIO, || {
        format!("streaming peak {streaming} B is {ratio:.2}x tree peak {tree} B")
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < BENCH_BUDGET, || format!("took {elapsed:.1?}"))?;
    Ok(format!(
        "8/8 cases, 1 failure recorded, {tables} tables; {events}-event import peak streaming/tree = {ratio:.2}; {elapsed:.1?}"
    ))
}

const INVALID_DOCUMENTS: [&str; 25] = [
    r#"{"traces":[{"attrs":{"p":{"value":1,"x":2}}}]}"#,
    r#"{"attrs":{"p":{"nested-attrs":{"a":1},"y":2}}}"#,
    r#"{"attrs":{"p":{"value":1,"nested-attrs":5}}}"#,
    r#"{"attrs":{"p":{"value":{"value":1},"nested-attrs":{}}}}"#,
    r#"{"traces":[{"events":[{"c":{"k":1,"value":2}}]}]}"#,
    r#"{"global-attrs":{"event":{"g":{"nested-attrs":[]}}}}"#,
    r#"{"global-attrs":{"log":{}}}"#,
    r#"{"global-attrs":{"trace":{},"case":{}}}"#,
    r#"{"global-attrs":[]}"#,
    r#"{"global-attrs":{"event":[1]}}"#,
    r#"{"global-attrs":{"trace":{"k":null}}}"#,
    r#"{"classifiers":{"c":"concept:name"}}"#,
    r#"{"classifiers":{"c":[1,2]}}"#,
    r#"{"classifiers":["c"]}"#,
    r#"{"classifiers":{"c":[]}}"#,
    r#"{"classifiers":{"c":["a",null]}}"#,
    r#"{"extensions":[{"name":"n","prefix":"p"}]}"#,
    r#"{"extensions":[{"prefix":"p","uri":"http://x.org/"}]}"#,
    r#"{"extensions":[{"name":"n","prefix":"p","uri":5}]}"#,
    r#"{"extensions":{"name":"n"}}"#,
    r#"{"extensions":[{"name":"n","prefix":"p","uri":"not a uri"}]}"#,
    r#"{"traces":{}}"#,
    r#"{"traces":[{"events":[1]}]}"#,
    r#"{"attrs":{"big":123456789012345678901}}"#,
    r#"{"traces":[{"attrs":{"a":1}},{"events":[{"x":1}]}], "attrs":{"l":[1]}}"#,
];

fn criterion_agreement(logs: &[EventLog]) -> Check {
    let mut docs: Vec<Vec<u8>> = Vec::new();
    for log in logs {
        let doc = canonicalize(log).map_err(|e| e.to_string())?;
        docs.push(doc[..doc.len() / 2].to_vec());
        docs.push(doc);
    }
    let invalid_start = docs.len();
    docs.extend(INVALID_DOCUMENTS.iter().map(|d| d.as_bytes().to_vec()));
    let mut disagreements = Vec::new();
    for (i, doc) in docs.iter().enumerate() {
        let validator_errors = error_count(&validate_document(doc)) > 0;
        for backend in BackendKind::ALL {
            let reader_errors = jxes_parse(doc, backend).is_err();
            if validator_errors != reader_errors {
                disagreements.push(format!("document {i} ({backend})"));
            }
        }
        if i >= invalid_start && !validator_errors {
            disagreements.push(format!("hand-written document {} accepted", i - invalid_start));
        }
    }
    ensure(disagreements.is_empty(), || format!("{} disagreements: {disagreements:?}", disagreements.len()))?;
    Ok(format!(
        "{} generated + {} truncated + {} hand-written documents, 0 disagreements",
        logs.len(),
        logs.len(),
        INVALID_DOCUMENTS.len()
    ))
}

fn brute_force_stats(log: &EventLog) -> [usize; 5] {
    let mut variants: Vec<Vec<String>> = Vec::new();
    let mut activities: Vec<String> = Vec::new();
    let (mut events, mut longest) = (0, 0);
    for trace in &log.traces {
        events += trace.events.len();
        longest = longest.max(trace.events.len());
        let seq: Vec<String> = trace
            .events
            .iter()
            .map(|e| match e.get("concept:name") {
                Some(AttributeValue::Str(s)) => s.clone(),
                other => panic!("generated event without a string activity: {other:?}"),
            })
            .collect();
        for a in &seq {
            if !activities.contains(a) {
                activities.push(a.clone());
            }
        }
        if !variants.contains(&seq) {
            variants.push(seq);
        }
    }
    [log.traces.len(), events, variants.len(), activities.len(), longest]
}

fn criterion_statistics() -> Check {
    let log = jxes_parse(fixture("basic_structure.json").as_bytes(), BackendKind::Tree)?;
    let s = log_statistics(&log);
    let basic = [s.trace_count, s.event_count, s.variant_count, s.distinct_activities, s.max_trace_length];
    ensure(basic == [1, 2, 1, 2, 2], || format!("basic structure gave {basic:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 0x5354);
    let mut mismatches = 0;
    let mut variant_counts = BTreeSet::new();
    for _ in 0..STATS_PROFILES {
        let log = generate(&random_profile(&mut rng)).map_err(|e| e.to_string())?;
        let s = log_statistics(&log);
        let got = [s.trace_count, s.event_count, s.variant_count, s.distinct_activities, s.max_trace_length];
        if got != brute_force_stats(&log) {
            mismatches += 1;
        }
        variant_counts.insert(s.variant_count);
    }
    ensure(mismatches == 0, || format!("{mismatches} of {STATS_PROFILES} profiles disagree"))?;
    Ok(format!(
        "basic structure {basic:?}; {STATS_PROFILES} random profiles match brute force ({} distinct variant counts)",
        variant_counts.len()
    ))
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Check) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {id} {name}: {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL criterion {id} {name}: {detail}");
            false
        }
    }
}

fn main() {
    let logs = corpus();
    let results = [
        run(1, "round trip", || criterion_round_trip(&logs)),
        run(2, "backend equivalence", || criterion_backends(&logs)),
        run(3, "size", criterion_size),
        run(4, "golden listings", criterion_golden),
        run(5, "bench", criterion_bench),
        run(6, "validator/reader agreement", || criterion_agreement(&logs)),
        run(7, "statistics", criterion_statistics),
    ];
    let passed = results.iter().filter(|ok| **ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
