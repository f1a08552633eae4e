use std::fmt;

#[derive(Debug, Clone, Copy)]
pub enum Seg<'a> {
    Key(&'a str),
    Index(usize),
}

/// A JSON path kept as a borrowed chain of segments, so descending into a
/// document costs nothing until a path is actually rendered.
#[derive(Debug, Clone, Copy)]
pub struct Path<'a> {
    parent: Option<&'a Path<'a>>,
    seg: Option<Seg<'a>>,
}

impl<'a> Path<'a> {
    pub const ROOT: Path<'static> = Path {
        parent: None,
        seg: None,
    };

    pub fn key<'b>(&'b self, key: &'b str) -> Path<'b> {
        Path {
            parent: Some(self),
            seg: Some(Seg::Key(key)),
        }
    }

    pub fn index(&self, i: usize) -> Path<'_> {
        Path {
            parent: Some(self),
            seg: Some(Seg::Index(i)),
        }
    }

    fn write_segments(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.parent {
            p.write_segments(f)?;
        }
        match self.seg {
            None => f.write_str("$"),
            Some(Seg::Index(i)) => write!(f, "[{i}]"),
            Some(Seg::Key(k)) if is_plain_key(k) => write!(f, ".{k}"),
            Some(Seg::Key(k)) => {
                f.write_str("['")?;
                for c in k.chars() {
                    if c == '\'' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("']")
            }
        }
    }
}

fn is_plain_key(k: &str) -> bool {
    let mut chars = k.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | ':'))
}

impl fmt::Display for Path<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_segments(f)
    }
}
