//! JSON plumbing shared by the JXES backends: a document tree built with
//! serde_json, a hand-written incremental pull lexer, and JSON paths.

mod path;
pub mod pull;
pub mod tree;

pub use path::{Path, Seg};
pub use pull::{PullParser, Token};
pub use tree::JsonTree;

/// Maximum container nesting accepted by both parsers.
pub const MAX_DEPTH: usize = 127;
