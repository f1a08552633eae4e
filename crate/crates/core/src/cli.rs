//! The `jxeskit` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse or schema errors (or
//! validation errors), 3 validation warnings under `--strict`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bench::{render_tables, run_bench, BenchSuite, TableFormat};
use crate::error::{Error, Warning};
use crate::gen::{generate, GenProfile, PRESETS};
use crate::io::{read_log, write_log, LogFormat};
use crate::jxes::{BackendKind, ParseOptions};
use crate::model::EventLog;
use crate::stats::log_statistics;
use crate::validate::{error_count, render_json, render_text, validate_document};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_WARNINGS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "jxeskit", version, about = "Read, write, convert, validate and benchmark JXES and XES event logs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between JXES and XES (plain or gzip).
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value = "tree")]
        backend: BackendKind,
        /// Reject unknown and duplicate JXES keys.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        in_format: Option<LogFormat>,
        #[arg(long)]
        out_format: Option<LogFormat>,
        /// Indent JXES output.
        #[arg(long)]
        pretty: bool,
    },
    /// Check a JXES document and print its diagnostics.
    Validate {
        input: PathBuf,
        /// Fail with exit code 3 on warnings.
        #[arg(long)]
        strict: bool,
        /// Print a JSON report instead of one line per diagnostic.
        #[arg(long)]
        json: bool,
    },
    /// Print trace, event, variant and activity counts.
    Stats {
        input: PathBuf,
        #[arg(long, default_value = "tree")]
        backend: BackendKind,
        #[arg(long)]
        in_format: Option<LogFormat>,
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic log from a JSON profile or a named preset.
    Generate {
        output: PathBuf,
        /// JSON profile file.
        #[arg(long, required_unless_present = "preset")]
        profile: Option<PathBuf>,
        #[arg(long, conflicts_with = "profile")]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        traces: Option<usize>,
        #[arg(long)]
        out_format: Option<LogFormat>,
    },
    /// Run a benchmark suite and write report.md, report.csv and report.json.
    Bench {
        suite: PathBuf,
        out_dir: PathBuf,
        /// Override the number of measured runs per case.
        #[arg(long)]
        runs: Option<usize>,
        /// Also print the tables in this format.
        #[arg(long)]
        report: Option<TableFormat>,
    },
}

fn exit_for(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else {
        EXIT_INVALID
    }
}

fn fail(err: Error) -> i32 {
    eprintln!("error: {err}");
    exit_for(&err)
}

fn print_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn format_of(path: &Path, given: Option<LogFormat>) -> Result<LogFormat, i32> {
    given.or_else(|| LogFormat::from_path(path)).ok_or_else(|| {
        eprintln!(
            "error: cannot infer the format of {} (use .json, .jxes, .xes, optionally with .gz, or pass a format flag)",
            path.display()
        );
        EXIT_INVALID
    })
}

fn load(path: &Path, format: Option<LogFormat>, opts: &ParseOptions) -> Result<EventLog, i32> {
    let format = format_of(path, format)?;
    match read_log(path, format, opts) {
        Ok((log, warnings)) => {
            print_warnings(&warnings);
            Ok(log)
        }
        Err(e) => Err(fail(e)),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) | Err(code) => code,
    }
}

fn execute(command: Command) -> Result<i32, i32> {
    match command {
        Command::Convert {
            input,
            output,
            backend,
            strict,
            in_format,
            out_format,
            pretty,
        } => {
            let log = load(&input, in_format, &ParseOptions::new(backend).strict(strict))?;
            let out_format = format_of(&output, out_format)?;
            let written = if pretty && out_format.is_jxes() {
                crate::io::write_atomic(&output, out_format.is_gzip(), |w| {
                    crate::jxes::write_jxes(&log, backend, true, w)
                })
            } else {
                write_log(&log, &output, out_format, backend)
            };
            written.map_err(fail)?;
            Ok(EXIT_OK)
        }
        Command::Validate { input, strict, json } => {
            let bytes = std::fs::read(&input).map_err(|e| fail(Error::Io(e)))?;
            let diags = validate_document(&bytes);
            if json {
                println!("{}", render_json(&diags));
            } else {
                print!("{}", render_text(&diags));
            }
            Ok(if error_count(&diags) > 0 {
                EXIT_INVALID
            } else if strict && !diags.is_empty() {
                EXIT_WARNINGS
            } else {
                EXIT_OK
            })
        }
        Command::Stats {
            input,
            backend,
            in_format,
            json,
        } => {
            let log = load(&input, in_format, &ParseOptions::new(backend))?;
            let stats = log_statistics(&log);
            if json {
                println!("{}", serde_json::to_string(&stats).expect("stats serialize"));
            } else {
                println!("{stats}");
            }
            Ok(EXIT_OK)
        }
        Command::Generate {
            profile,
            output,
            preset,
            seed,
            traces,
            out_format,
        } => {
            let mut p = match (profile, preset) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| fail(Error::Io(e)))?;
                    serde_json::from_str::<GenProfile>(&text)
                        .map_err(|e| fail(Error::InvalidProfile(format!("{}: {e}", path.display()))))?
                }
                (None, Some(name)) => GenProfile::preset(&name).ok_or_else(|| {
                    eprintln!("error: unknown preset {name:?} (known: {})", PRESETS.join(", "));
                    EXIT_INVALID
                })?,
                (None, None) => unreachable!("clap requires --profile or --preset"),
            };
            if let Some(s) = seed {
                p.seed = s;
            }
            if let Some(t) = traces {
                p.traces = t;
            }
            let log = generate(&p).map_err(fail)?;
            let format = format_of(&output, out_format)?;
            write_log(&log, &output, format, BackendKind::Streaming).map_err(fail)?;
            Ok(EXIT_OK)
        }
        Command::Bench {
            suite,
            out_dir,
            runs,
            report,
        } => {
            let mut cases = BenchSuite::load(&suite).map_err(fail)?;
            if let Some(r) = runs {
                for c in &mut cases {
                    c.runs = r;
                }
            }
            std::fs::create_dir_all(&out_dir).map_err(|e| fail(Error::Io(e)))?;
            let scratch = tempfile::tempdir_in(&out_dir).map_err(|e| fail(Error::Io(e)))?;
            let result = run_bench(&cases, scratch.path()).map_err(fail)?;
            let md = render_tables(&result, TableFormat::Markdown).map_err(fail)?;
            let csv = render_tables(&result, TableFormat::Csv).map_err(fail)?;
            let json = serde_json::to_string_pretty(&result).expect("report serializes");
            for (name, body) in [("report.md", &md), ("report.csv", &csv), ("report.json", &json)] {
                std::fs::write(out_dir.join(name), body).map_err(|e| fail(Error::Io(e)))?;
            }
            let failed = result.results.iter().filter(|r| r.stats().is_none()).count();
            if failed > 0 {
                eprintln!("{failed} of {} bench cases failed; see report.json", result.results.len());
            }
            match report {
                Some(TableFormat::Markdown) => print!("{md}"),
                Some(TableFormat::Csv) => print!("{csv}"),
                None => {}
            }
            Ok(EXIT_OK)
        }
    }
}
