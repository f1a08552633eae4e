use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jxeskit_core::{canonicalize, parse_jxes, ParseOptions};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn jxeskit(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jxeskit"))
        .args(args.iter().map(|a| a.as_ref()))
        .env("JXESKIT_LOG", "off")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn convert_full_cycle_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture("full_document.json");
    let xes = dir.path().join("doc.xes.gz");
    let back = dir.path().join("back.json");
    let out = jxeskit(&[&"convert", &src, &xes]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = jxeskit(&[&"convert", &xes, &back, &"--backend", &"streaming"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let original = parse_jxes(std::fs::File::open(&src).unwrap(), &ParseOptions::default()).unwrap();
    assert_eq!(std::fs::read(&back).unwrap(), canonicalize(&original).unwrap());
}

#[test]
fn convert_empty_document() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(dir.path(), "empty.json", "{}");
    let xes = dir.path().join("empty.xes");
    assert_eq!(code(&jxeskit(&[&"convert", &src, &xes])), 0);
    let body = std::fs::read_to_string(&xes).unwrap();
    let root = body.lines().nth(1).unwrap();
    assert!(root.starts_with("<log ") && root.ends_with("/>"), "{body}");
    assert_eq!(body.lines().count(), 2);
}

#[test]
fn convert_id_attribute_warns() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(
        dir.path(),
        "ids.xes",
        r#"<log><trace><event><id key="identity:id" value="A1"/></event></trace></log>"#,
    );
    let out = jxeskit(&[&"convert", &src, &dir.path().join("ids.json")]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("warning: IdAttribute"), "{}", stderr(&out));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("ids.json")).unwrap(),
        r#"{"traces":[{"events":[{"identity:id":"A1"}]}]}"#
    );
}

#[test]
fn convert_failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.xes");

    let out = jxeskit(&[&"convert", &dir.path().join("missing.json"), &out_path]);
    assert_eq!(code(&out), 1);

    let bad = write(dir.path(), "bad.json", r#"{"traces": [1, }"#);
    let out = jxeskit(&[&"convert", &bad, &out_path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("at byte 15"), "{}", stderr(&out));

    let unknown = write(dir.path(), "unknown.json", r#"{"version": 2}"#);
    assert_eq!(code(&jxeskit(&[&"convert", &unknown, &out_path])), 0);
    std::fs::remove_file(&out_path).unwrap();
    assert_eq!(code(&jxeskit(&[&"convert", &unknown, &out_path, &"--strict"])), 2);

    let bell = write(dir.path(), "bell.json", "{\"attrs\":{\"a\":\"ring\\u0007\"}}");
    let out = jxeskit(&[&"convert", &bell, &out_path]);
    assert_eq!(code(&out), 2);
    assert!(!out_path.exists(), "a failed conversion left output behind");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3, "temporary files left behind");

    let out = jxeskit(&[&"convert", &bell, &dir.path().join("out.txt")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = jxeskit(&[&"validate", &fixture("basic_structure.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "");

    assert_eq!(code(&jxeskit(&[&"validate", &fixture("full_document.json")])), 0);

    let misuse = write(dir.path(), "misuse.json", r#"{"traces":[{"attrs":{"p":{"value":1,"x":2}}}]}"#);
    let out = jxeskit(&[&"validate", &misuse]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).starts_with("error ReservedKeyMisuse at $.traces[0].attrs.p"), "{}", stdout(&out));

    let globals = write(
        dir.path(),
        "globals.json",
        r#"{"global-attrs":{"event":{"Key 2":2}},"traces":[{"events":[{"Key 2":5},{}]}]}"#,
    );
    assert_eq!(code(&jxeskit(&[&"validate", &globals])), 0);
    let out = jxeskit(&[&"validate", &globals, &"--strict", &"--json"]);
    assert_eq!(code(&out), 3);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["warnings"], 1);
    assert_eq!(report["diagnostics"][0]["code"], "GlobalNotSatisfied");
    assert_eq!(report["diagnostics"][0]["json_path"], "$.traces[0].events[1]");

    assert_eq!(code(&jxeskit(&[&"validate", &dir.path().join("nope.json")])), 1);
}

#[test]
fn stats_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = jxeskit(&[&"stats", &fixture("basic_structure.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "traces 1, events 2, variants 1, activities 2, max length 2\n");

    let empty = write(dir.path(), "empty.json", "{}");
    assert_eq!(stdout(&jxeskit(&[&"stats", &empty])), "traces 0, events 0, variants 0, activities 0, max length 0\n");

    let bad = write(dir.path(), "bad.json", "{");
    assert_eq!(code(&jxeskit(&[&"stats", &bad])), 2);
}

#[test]
fn generate_is_reproducible_and_calibrated() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json.gz");
    let b = dir.path().join("b.json.gz");
    for p in [&a, &b] {
        let out = jxeskit(&[&"generate", p, &"--preset", &"level_d2", &"--seed", &"5"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let out = jxeskit(&[&"stats", &a, &"--json"]);
    let stats: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(stats["trace_count"], 1104);
    assert_eq!(stats["distinct_activities"], 8);
    assert_eq!(stats["max_trace_length"], 24);

    let profile = write(dir.path(), "p.json", r#"{"seed":3,"traces":4,"mean_events_per_trace":2.0}"#);
    let x = dir.path().join("p.xes");
    assert_eq!(code(&jxeskit(&[&"generate", &x, &"--profile", &profile])), 0);
    assert!(stdout(&jxeskit(&[&"stats", &x])).starts_with("traces 4,"));

    let bad = write(dir.path(), "bad.json", r#"{"nesting_prob":2}"#);
    assert_eq!(code(&jxeskit(&[&"generate", &x, &"--profile", &bad])), 2);
    assert_eq!(code(&jxeskit(&[&"generate", &x, &"--preset", &"nope"])), 2);
}

#[test]
fn bench_writes_tables_and_records_failures() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("small.json");
    assert_eq!(code(&jxeskit(&[&"generate", &log, &"--preset", &"level_d2", &"--traces", &"30"])), 0);
    let suite = write(
        dir.path(),
        "suite.json",
        r#"{"inputs":["small.json","missing.json"],
            "targets":[{"format":"JXES","backend":"tree"},{"format":"JXES","backend":"streaming"},{"format":"XES"}],
            "runs":1}"#,
    );
    let out_dir = dir.path().join("report");
    let out = jxeskit(&[&"bench", &suite, &out_dir, &"--report", &"md"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("6 of 12 bench cases failed"), "{}", stderr(&out));
    let md = std::fs::read_to_string(out_dir.join("report.md")).unwrap();
    assert_eq!(md, stdout(&out));
    assert!(md.contains("| input | JXES-tree | JXES-streaming | XES |"), "{md}");
    assert!(md.contains("| missing.json | ERROR | ERROR | ERROR |"), "{md}");
    assert!(out_dir.join("report.csv").exists());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["results"].as_array().unwrap().len(), 12);
    let leftovers: Vec<_> = std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 3, "{leftovers:?}");
}
