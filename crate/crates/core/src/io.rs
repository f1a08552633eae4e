//! File plumbing: gzip sniffing, format inference and atomic writes.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use flate2::bufread::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::jxes::{BackendKind, ParseOptions};
use crate::model::EventLog;
use crate::xes::XesDocumentMeta;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// A reader that transparently inflates gzip input, detected by its magic
/// bytes rather than by file name.
pub enum MaybeGz<R: BufRead> {
    Plain(R),
    Gzip(BufReader<MultiGzDecoder<R>>),
}

impl<R: BufRead> MaybeGz<R> {
    pub fn new(mut inner: R) -> io::Result<Self> {
        let head = inner.fill_buf()?;
        if head.len() >= 2 && head[..2] == GZIP_MAGIC {
            Ok(MaybeGz::Gzip(BufReader::with_capacity(
                64 * 1024,
                MultiGzDecoder::new(inner),
            )))
        } else {
            Ok(MaybeGz::Plain(inner))
        }
    }

    pub fn is_gzip(&self) -> bool {
        matches!(self, MaybeGz::Gzip(_))
    }
}

impl<R: BufRead> Read for MaybeGz<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        match self {
            MaybeGz::Plain(r) => r.read(buf),
            MaybeGz::Gzip(r) => r.read(buf),
        }
    }
}

impl<R: BufRead> BufRead for MaybeGz<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        match self {
            MaybeGz::Plain(r) => r.fill_buf(),
            MaybeGz::Gzip(r) => r.fill_buf(),
        }
    }

    fn consume(&mut self, amt: usize) {
        match self {
            MaybeGz::Plain(r) => r.consume(amt),
            MaybeGz::Gzip(r) => r.consume(amt),
        }
    }
}

/// Opens a file for reading, inflating it if it is gzip-compressed.
pub fn open_input(path: &Path) -> Result<MaybeGz<BufReader<File>>> {
    let file = File::open(path)?;
    Ok(MaybeGz::new(BufReader::with_capacity(64 * 1024, file))?)
}

/// On-disk event log formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogFormat {
    #[serde(rename = "JXES")]
    Jxes,
    #[serde(rename = "JXES-gz")]
    JxesGz,
    #[serde(rename = "XES")]
    Xes,
    #[serde(rename = "XES-gz")]
    XesGz,
}

impl LogFormat {
    pub const ALL: [LogFormat; 4] = [LogFormat::Jxes, LogFormat::JxesGz, LogFormat::Xes, LogFormat::XesGz];

    /// Infers the format from `.json`, `.json.gz`, `.jxes`, `.jxes.gz`,
    /// `.xes` or `.xes.gz`.
    pub fn from_path(path: &Path) -> Option<LogFormat> {
        let name = path.file_name()?.to_str()?.to_ascii_lowercase();
        let (stem, gz) = match name.strip_suffix(".gz") {
            Some(stem) => (stem, true),
            None => (name.as_str(), false),
        };
        let jxes = if stem.ends_with(".json") || stem.ends_with(".jxes") {
            true
        } else if stem.ends_with(".xes") {
            false
        } else {
            return None;
        };
        Some(match (jxes, gz) {
            (true, false) => LogFormat::Jxes,
            (true, true) => LogFormat::JxesGz,
            (false, false) => LogFormat::Xes,
            (false, true) => LogFormat::XesGz,
        })
    }

    pub fn is_jxes(self) -> bool {
        matches!(self, LogFormat::Jxes | LogFormat::JxesGz)
    }

    pub fn is_gzip(self) -> bool {
        matches!(self, LogFormat::JxesGz | LogFormat::XesGz)
    }

    pub fn extension(self) -> &'static str {
        match self {
            LogFormat::Jxes => "json",
            LogFormat::JxesGz => "json.gz",
            LogFormat::Xes => "xes",
            LogFormat::XesGz => "xes.gz",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogFormat::Jxes => "JXES",
            LogFormat::JxesGz => "JXES-gz",
            LogFormat::Xes => "XES",
            LogFormat::XesGz => "XES-gz",
        }
    }
}

impl fmt::Display for LogFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LogFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "jxes" | "json" => Ok(LogFormat::Jxes),
            "jxes-gz" | "json-gz" | "json.gz" | "jxes.gz" => Ok(LogFormat::JxesGz),
            "xes" => Ok(LogFormat::Xes),
            "xes-gz" | "xes.gz" => Ok(LogFormat::XesGz),
            _ => Err(format!("unknown log format {s:?} (expected jxes, jxes-gz, xes or xes-gz)")),
        }
    }
}

/// Writes a file through a temporary sibling that is renamed into place
/// only after `body` succeeds. On failure nothing is left at `path`.
pub fn write_atomic<F>(path: &Path, gzip: bool, body: F) -> Result<u64>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let file = tmp.as_file_mut();
        if gzip {
            let mut enc = GzEncoder::new(io::BufWriter::new(file), Compression::default());
            body(&mut enc)?;
            enc.finish()?.flush()?;
        } else {
            let mut w = io::BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
        }
    }
    let file = tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(file.metadata()?.len())
}

/// Reads a log file of the given format. Gzip input is detected from its
/// content, so `format` only selects between JXES and XES.
pub fn read_log(path: &Path, format: LogFormat, opts: &ParseOptions) -> Result<(EventLog, Vec<Warning>)> {
    let input = BufReader::with_capacity(64 * 1024, File::open(path)?);
    if format.is_jxes() {
        crate::jxes::parse_jxes_with_warnings(input, opts)
    } else {
        crate::xes::parse_xes_with_warnings(input).map(|(log, _, w)| (log, w))
    }
}

/// Writes `log` to `path` atomically and returns the file size in bytes.
pub fn write_log(log: &EventLog, path: &Path, format: LogFormat, backend: BackendKind) -> Result<u64> {
    write_atomic(path, format.is_gzip(), |w| encode_to(log, format, backend, w))
}

/// Serializes `log` in `format` (compressed for the gzip variants).
pub fn encode_log(log: &EventLog, format: LogFormat, backend: BackendKind) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    if format.is_gzip() {
        let mut enc = GzEncoder::new(&mut buf, Compression::default());
        encode_to(log, format, backend, &mut enc)?;
        enc.finish()?;
    } else {
        encode_to(log, format, backend, &mut buf)?;
    }
    Ok(buf)
}

fn encode_to(log: &EventLog, format: LogFormat, backend: BackendKind, w: &mut dyn Write) -> Result<()> {
    if format.is_jxes() {
        crate::jxes::write_jxes(log, backend, false, w)
    } else {
        crate::xes::write_xes(log, &XesDocumentMeta::standard(), w)
    }
}
