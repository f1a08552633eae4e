//! Event logs in JXES (JSON) and XES (XML): a shared in-memory model,
//! readers and writers for both formats, a document validator, a synthetic
//! log generator and a conversion benchmark.

pub mod attrmap;
pub mod bench;
pub mod cli;
pub mod error;
pub mod gen;
pub mod io;
pub mod json;
pub mod jxes;
pub mod model;
pub mod stats;
pub mod validate;
pub mod xes;

pub use error::{Error, Result, Warning};
pub use gen::{generate, GenProfile};
pub use io::LogFormat;
pub use jxes::{canonicalize, parse_jxes, write_jxes, BackendKind, ParseOptions};
pub use model::{
    logs_equivalent, AttrMap, Attribute, AttributeValue, Classifiers, Event, EventLog, Extension,
    GlobalAttributes, Timestamp, Trace,
};
pub use stats::{log_statistics, LogStats};
pub use validate::{validate_document, Diagnostic, Severity};
pub use xes::{parse_xes, write_xes, XesDocumentMeta};
