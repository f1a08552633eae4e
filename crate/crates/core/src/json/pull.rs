//! Incremental JSON tokenizer.
//!
//! Reads from any [`BufRead`] and hands out one [`Token`] at a time. It
//! never holds more of the input than the reader's buffer plus the token
//! being assembled, and it checks the full JSON grammar (RFC 8259) as it
//! goes: separators, nesting, number syntax, string escapes and UTF-8.

use std::io::BufRead;

use super::MAX_DEPTH;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    BeginObject,
    EndObject,
    BeginArray,
    EndArray,
    Key(String),
    Str(String),
    /// Number in its source spelling.
    Number(String),
    Bool(bool),
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    /// A value is required (document start, after `:` or `,` in arrays).
    Value,
    /// Just after `[`: a value or `]`.
    ArrayStart,
    /// Just after `{`: a key or `}`.
    ObjectStart,
    /// After `,` inside an object: a key.
    Key,
    /// After a complete value inside a container.
    Separator,
    /// Top-level value complete; only whitespace may follow.
    Done,
}

pub struct PullParser<R> {
    reader: R,
    offset: u64,
    state: State,
    /// `true` for objects, `false` for arrays.
    stack: Vec<bool>,
    scratch: Vec<u8>,
}

impl<R: BufRead> PullParser<R> {
    pub fn new(reader: R) -> Self {
        PullParser {
            reader,
            offset: 0,
            state: State::Value,
            stack: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// Bytes consumed so far.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::MalformedJson {
            offset: self.offset,
            message: message.into(),
        }
    }

    fn peek(&mut self) -> Result<Option<u8>> {
        Ok(self.reader.fill_buf()?.first().copied())
    }

    fn bump(&mut self) {
        self.reader.consume(1);
        self.offset += 1;
    }

    fn next_byte(&mut self) -> Result<Option<u8>> {
        let b = self.peek()?;
        if b.is_some() {
            self.bump();
        }
        Ok(b)
    }

    fn skip_whitespace(&mut self) -> Result<Option<u8>> {
        loop {
            let buf = self.reader.fill_buf()?;
            if buf.is_empty() {
                return Ok(None);
            }
            let n = buf
                .iter()
                .take_while(|b| matches!(b, b' ' | b'\t' | b'\n' | b'\r'))
                .count();
            let next = buf.get(n).copied();
            self.reader.consume(n);
            self.offset += n as u64;
            if next.is_some() {
                return Ok(next);
            }
        }
    }

    /// Returns the next token, or `None` once the document is complete.
    pub fn next_token(&mut self) -> Result<Option<Token>> {
        let Some(b) = self.skip_whitespace()? else {
            return match self.state {
                State::Done => Ok(None),
                _ => Err(self.error("unexpected end of input")),
            };
        };
        match self.state {
            State::Done => Err(self.error("trailing characters after document")),
            State::Value => self.value(b).map(Some),
            State::ArrayStart => {
                if b == b']' {
                    self.bump();
                    Ok(Some(self.close(false)))
                } else {
                    self.value(b).map(Some)
                }
            }
            State::ObjectStart if b == b'}' => {
                self.bump();
                Ok(Some(self.close(true)))
            }
            State::ObjectStart | State::Key => {
                if b != b'"' {
                    return Err(self.error("expected object key"));
                }
                self.bump();
                let key = self.string()?;
                match self.skip_whitespace()? {
                    Some(b':') => self.bump(),
                    _ => return Err(self.error("expected ':' after object key")),
                }
                self.state = State::Value;
                Ok(Some(Token::Key(key)))
            }
            State::Separator => {
                let in_object = *self.stack.last().expect("separator state implies a container");
                self.bump();
                match (b, in_object) {
                    (b',', true) => {
                        self.state = State::Key;
                        self.next_token()
                    }
                    (b',', false) => {
                        self.state = State::Value;
                        self.next_token()
                    }
                    (b'}', true) => Ok(Some(self.close(true))),
                    (b']', false) => Ok(Some(self.close(false))),
                    _ => {
                        self.offset -= 1;
                        Err(self.error(if in_object {
                            "expected ',' or '}'"
                        } else {
                            "expected ',' or ']'"
                        }))
                    }
                }
            }
        }
    }

    fn close(&mut self, object: bool) -> Token {
        self.stack.pop();
        self.after_value();
        if object {
            Token::EndObject
        } else {
            Token::EndArray
        }
    }

    fn after_value(&mut self) {
        self.state = if self.stack.is_empty() {
            State::Done
        } else {
            State::Separator
        };
    }

    fn open(&mut self, object: bool) -> Result<Token> {
        if self.stack.len() >= MAX_DEPTH {
            return Err(self.error("recursion limit exceeded"));
        }
        self.bump();
        self.stack.push(object);
        if object {
            self.state = State::ObjectStart;
            Ok(Token::BeginObject)
        } else {
            self.state = State::ArrayStart;
            Ok(Token::BeginArray)
        }
    }

    fn value(&mut self, b: u8) -> Result<Token> {
        let token = match b {
            b'{' => return self.open(true),
            b'[' => return self.open(false),
            b'"' => {
                self.bump();
                Token::Str(self.string()?)
            }
            b'-' | b'0'..=b'9' => Token::Number(self.number()?),
            b't' => {
                self.literal(b"true")?;
                Token::Bool(true)
            }
            b'f' => {
                self.literal(b"false")?;
                Token::Bool(false)
            }
            b'n' => {
                self.literal(b"null")?;
                Token::Null
            }
            _ => return Err(self.error("expected value")),
        };
        self.after_value();
        Ok(token)
    }

    fn literal(&mut self, word: &[u8]) -> Result<()> {
        for &expected in word {
            match self.peek()? {
                Some(b) if b == expected => self.bump(),
                _ => return Err(self.error("invalid literal")),
            }
        }
        Ok(())
    }

    fn number(&mut self) -> Result<String> {
        let mut lexeme = String::new();
        let take = |p: &mut Self, lexeme: &mut String| -> Result<Option<u8>> {
            let b = p.peek()?;
            if let Some(c) = b {
                lexeme.push(c as char);
                p.bump();
            }
            Ok(b)
        };
        if self.peek()? == Some(b'-') {
            take(self, &mut lexeme)?;
        }
        match self.peek()? {
            Some(b'0') => {
                take(self, &mut lexeme)?;
            }
            Some(b'1'..=b'9') => {
                while matches!(self.peek()?, Some(b'0'..=b'9')) {
                    take(self, &mut lexeme)?;
                }
            }
            _ => return Err(self.error("invalid number")),
        }
        if self.peek()? == Some(b'.') {
            take(self, &mut lexeme)?;
            if !matches!(self.peek()?, Some(b'0'..=b'9')) {
                return Err(self.error("expected digit after decimal point"));
            }
            while matches!(self.peek()?, Some(b'0'..=b'9')) {
                take(self, &mut lexeme)?;
            }
        }
        if matches!(self.peek()?, Some(b'e' | b'E')) {
            take(self, &mut lexeme)?;
            if matches!(self.peek()?, Some(b'+' | b'-')) {
                take(self, &mut lexeme)?;
            }
            if !matches!(self.peek()?, Some(b'0'..=b'9')) {
                return Err(self.error("expected digit in exponent"));
            }
            while matches!(self.peek()?, Some(b'0'..=b'9')) {
                take(self, &mut lexeme)?;
            }
        }
        Ok(lexeme)
    }

    /// Reads a string body; the opening quote is already consumed.
    fn string(&mut self) -> Result<String> {
        self.scratch.clear();
        loop {
            let buf = self.reader.fill_buf()?;
            if buf.is_empty() {
                return Err(self.error("EOF while parsing a string"));
            }
            let n = buf
                .iter()
                .take_while(|&&b| b != b'"' && b != b'\\' && b >= 0x20)
                .count();
            self.scratch.extend_from_slice(&buf[..n]);
            let stop = buf.get(n).copied();
            self.reader.consume(n);
            self.offset += n as u64;
            match stop {
                None => continue,
                Some(b'"') => {
                    self.bump();
                    break;
                }
                Some(b'\\') => {
                    self.bump();
                    self.escape()?;
                }
                Some(_) => return Err(self.error("control character in string")),
            }
        }
        let bytes = std::mem::take(&mut self.scratch);
        String::from_utf8(bytes).map_err(|e| {
            let mut bytes = e.into_bytes();
            bytes.clear();
            self.scratch = bytes;
            self.error("invalid UTF-8 in string")
        })
    }

    fn escape(&mut self) -> Result<()> {
        let c = match self.next_byte()? {
            Some(b'"') => '"',
            Some(b'\\') => '\\',
            Some(b'/') => '/',
            Some(b'b') => '\u{8}',
            Some(b'f') => '\u{c}',
            Some(b'n') => '\n',
            Some(b'r') => '\r',
            Some(b't') => '\t',
            Some(b'u') => {
                let hi = self.hex4()?;
                let code = if (0xD800..0xDC00).contains(&hi) {
                    if self.next_byte()? != Some(b'\\') || self.next_byte()? != Some(b'u') {
                        return Err(self.error("unpaired surrogate in string"));
                    }
                    let lo = self.hex4()?;
                    if !(0xDC00..0xE000).contains(&lo) {
                        return Err(self.error("unpaired surrogate in string"));
                    }
                    0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
                } else if (0xDC00..0xE000).contains(&hi) {
                    return Err(self.error("unpaired surrogate in string"));
                } else {
                    hi
                };
                char::from_u32(code).ok_or_else(|| self.error("invalid unicode escape"))?
            }
            _ => return Err(self.error("invalid escape")),
        };
        let mut utf8 = [0u8; 4];
        self.scratch.extend_from_slice(c.encode_utf8(&mut utf8).as_bytes());
        Ok(())
    }

    fn hex4(&mut self) -> Result<u32> {
        let mut v = 0;
        for _ in 0..4 {
            let d = match self.next_byte()? {
                Some(b) => (b as char).to_digit(16),
                None => None,
            };
            v = v * 16 + d.ok_or_else(|| self.error("invalid unicode escape"))?;
        }
        Ok(v)
    }

    /// Skips the rest of a value whose first token was `first`.
    pub fn skip_value(&mut self, first: &Token) -> Result<()> {
        let mut depth: usize = match first {
            Token::BeginObject | Token::BeginArray => 1,
            _ => return Ok(()),
        };
        while depth > 0 {
            match self.next_token()? {
                Some(Token::BeginObject | Token::BeginArray) => depth += 1,
                Some(Token::EndObject | Token::EndArray) => depth -= 1,
                Some(_) => {}
                None => return Err(self.error("unexpected end of input")),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::json::JsonTree;

    fn tokens(src: &str) -> Result<Vec<Token>> {
        let mut p = PullParser::new(src.as_bytes());
        let mut out = Vec::new();
        while let Some(t) = p.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    #[test]
    fn tokenizes_document() {
        use Token::*;
        let got = tokens(r#" {"a": [1, -2.5e3, true, null], "b\n": {"c": "d\u00e9\ud83d\ude00"}, "e": {}} "#).unwrap();
        assert_eq!(
            got,
            vec![
                BeginObject,
                Key("a".into()),
                BeginArray,
                Number("1".into()),
                Number("-2.5e3".into()),
                Bool(true),
                Null,
                EndArray,
                Key("b\n".into()),
                BeginObject,
                Key("c".into()),
                Str("dé😀".into()),
                EndObject,
                Key("e".into()),
                BeginObject,
                EndObject,
                EndObject,
            ]
        );
        assert_eq!(tokens("7").unwrap(), vec![Number("7".into())]);
    }

    #[test]
    fn rejects_invalid_documents() {
        for bad in [
            "", "{", "[1,]", "{\"a\" 1}", "{\"a\":1,}", "[1 2]", "01", "1.", "-", "1e", "tru",
            "\"abc", "\"\\x\"", "\"\\ud800\"", "{} x", "{\"a\":1]", "[}", "\"\u{1}\"", "{1:2}",
            ".5", "+1", "[\"\\u12\"]",
        ] {
            assert!(tokens(bad).is_err(), "accepted {bad:?}");
            assert!(JsonTree::parse(bad.as_bytes()).is_err(), "tree accepted {bad:?}");
        }
    }

    #[test]
    fn rejects_invalid_utf8() {
        let mut p = PullParser::new(&b"\"\xff\""[..]);
        assert!(p.next_token().is_err());
    }

    #[test]
    fn error_offset_points_at_problem() {
        let mut p = PullParser::new(&b"[1, 2, x]"[..]);
        let err = loop {
            match p.next_token() {
                Err(e) => break e,
                Ok(Some(_)) => continue,
                Ok(None) => panic!("accepted"),
            }
        };
        match err {
            Error::MalformedJson { offset, .. } => assert_eq!(offset, 7),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn depth_limit_matches_tree_parser() {
        let ok = "[".repeat(MAX_DEPTH) + &"]".repeat(MAX_DEPTH);
        let too_deep = "[".repeat(MAX_DEPTH + 1) + &"]".repeat(MAX_DEPTH + 1);
        assert!(tokens(&ok).is_ok());
        assert!(JsonTree::parse(ok.as_bytes()).is_ok());
        assert!(tokens(&too_deep).is_err());
        assert!(JsonTree::parse(too_deep.as_bytes()).is_err());
    }

    #[test]
    fn works_with_tiny_buffers() {
        let src = r#"{"key with spaces":"a\"b\\c","n":[123456,0.25]}"#;
        let reader = std::io::BufReader::with_capacity(1, src.as_bytes());
        let mut p = PullParser::new(reader);
        let mut n = 0;
        while let Some(t) = p.next_token().unwrap() {
            if let Token::Str(s) = &t {
                assert_eq!(s, "a\"b\\c");
            }
            n += 1;
        }
        assert_eq!(n, 9);
    }
}
