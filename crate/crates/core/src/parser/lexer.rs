//! Quote-aware scanning shared by statement extraction and value tokenizing.
//!
//! The lexer understands just enough of the POSIX shell command language to
//! find word and operator boundaries: single and double quotes, backslash
//! escapes, `$(...)`, `${...}` and backtick substitutions (kept opaque), and
//! the six command separators. Redirections such as `2>&1`, `&>file` and
//! `>|file` stay inside their word.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Operator that terminates a command inside an alias value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separator {
    Pipe,
    PipeErr,
    And,
    Or,
    Background,
    Seq,
    None,
}

impl Separator {
    /// Shell spelling of the operator; empty for [`Separator::None`].
    pub fn as_shell(self) -> &'static str {
        match self {
            Separator::Pipe => "|",
            Separator::PipeErr => "|&",
            Separator::And => "&&",
            Separator::Or => "||",
            Separator::Background => "&",
            Separator::Seq => ";",
            Separator::None => "",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Separator::Pipe => "pipe",
            Separator::PipeErr => "pipe-err",
            Separator::And => "and",
            Separator::Or => "or",
            Separator::Background => "background",
            Separator::Seq => "seq",
            Separator::None => "none",
        }
    }

    pub fn is_pipe(self) -> bool {
        matches!(self, Separator::Pipe | Separator::PipeErr)
    }

    pub fn from_name(name: &str) -> Option<Separator> {
        [
            Separator::Pipe,
            Separator::PipeErr,
            Separator::And,
            Separator::Or,
            Separator::Background,
            Separator::Seq,
            Separator::None,
        ]
        .into_iter()
        .find(|s| s.name() == name)
    }
}

impl fmt::Display for Separator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuoteKind {
    Single,
    Double,
    Backtick,
    Substitution,
    Parameter,
}

impl fmt::Display for QuoteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QuoteKind::Single => "single quote",
            QuoteKind::Double => "double quote",
            QuoteKind::Backtick => "backtick",
            QuoteKind::Substitution => "command substitution",
            QuoteKind::Parameter => "parameter expansion",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unterminated {kind} starting at byte {offset}")]
pub struct LexError {
    pub kind: QuoteKind,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Word,
    Op(Separator),
    Newline,
}

/// A token is a byte span into the scanned source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

/// Split `src` into words, operators and newlines.
///
/// With `comments` set, a `#` at the start of a word discards the rest of
/// the line.
pub(crate) fn tokenize(src: &str, comments: bool) -> Result<Vec<Token>, LexError> {
    let b = src.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < b.len() {
        match b[pos] {
            b' ' | b'\t' | b'\r' => pos += 1,
            b'\n' => {
                tokens.push(Token { kind: TokenKind::Newline, start: pos, end: pos + 1 });
                pos += 1;
            }
            b'#' if comments => {
                while pos < b.len() && b[pos] != b'\n' {
                    pos += 1;
                }
            }
            _ => {
                if let Some((sep, len)) = operator_at(b, pos) {
                    tokens.push(Token { kind: TokenKind::Op(sep), start: pos, end: pos + len });
                    pos += len;
                } else {
                    let end = scan_word(b, pos)?;
                    tokens.push(Token { kind: TokenKind::Word, start: pos, end });
                    pos = end;
                }
            }
        }
    }
    Ok(tokens)
}

fn operator_at(b: &[u8], pos: usize) -> Option<(Separator, usize)> {
    let next = b.get(pos + 1).copied();
    match (b[pos], next) {
        (b'|', Some(b'&')) => Some((Separator::PipeErr, 2)),
        (b'|', Some(b'|')) => Some((Separator::Or, 2)),
        (b'|', _) => Some((Separator::Pipe, 1)),
        (b'&', Some(b'&')) => Some((Separator::And, 2)),
        // `&>file` redirects both streams
        (b'&', Some(b'>')) => None,
        (b'&', _) => Some((Separator::Background, 1)),
        (b';', _) => Some((Separator::Seq, 1)),
        _ => None,
    }
}

fn scan_word(b: &[u8], start: usize) -> Result<usize, LexError> {
    let mut pos = start;
    while pos < b.len() {
        match b[pos] {
            b' ' | b'\t' | b'\r' | b'\n' => break,
            b'\'' => pos = skip_single(b, pos)?,
            b'"' => pos = skip_double(b, pos)?,
            b'`' => pos = skip_backtick(b, pos)?,
            b'\\' => pos = (pos + 2).min(b.len()),
            b'$' if b.get(pos + 1) == Some(&b'(') => pos = skip_group(b, pos + 1, b'(', b')')?,
            b'$' if b.get(pos + 1) == Some(&b'{') => pos = skip_group(b, pos + 1, b'{', b'}')?,
            b'|' | b'&' | b';' => {
                let prev = if pos > start { Some(b[pos - 1]) } else { None };
                let redirect = matches!(prev, Some(b'>') | Some(b'<')) && b[pos] != b';';
                let amp_redirect = b[pos] == b'&' && b.get(pos + 1) == Some(&b'>');
                if redirect || amp_redirect {
                    pos += 1;
                } else {
                    break;
                }
            }
            _ => pos += 1,
        }
    }
    Ok(pos)
}

fn skip_single(b: &[u8], open: usize) -> Result<usize, LexError> {
    b[open + 1..]
        .iter()
        .position(|&c| c == b'\'')
        .map(|i| open + 1 + i + 1)
        .ok_or(LexError { kind: QuoteKind::Single, offset: open })
}

fn skip_double(b: &[u8], open: usize) -> Result<usize, LexError> {
    let mut pos = open + 1;
    while pos < b.len() {
        match b[pos] {
            b'"' => return Ok(pos + 1),
            b'\\' => pos += 2,
            b'`' => pos = skip_backtick(b, pos)?,
            b'$' if b.get(pos + 1) == Some(&b'(') => pos = skip_group(b, pos + 1, b'(', b')')?,
            b'$' if b.get(pos + 1) == Some(&b'{') => pos = skip_group(b, pos + 1, b'{', b'}')?,
            _ => pos += 1,
        }
    }
    Err(LexError { kind: QuoteKind::Double, offset: open })
}

fn skip_backtick(b: &[u8], open: usize) -> Result<usize, LexError> {
    let mut pos = open + 1;
    while pos < b.len() {
        match b[pos] {
            b'`' => return Ok(pos + 1),
            b'\\' => pos += 2,
            _ => pos += 1,
        }
    }
    Err(LexError { kind: QuoteKind::Backtick, offset: open })
}

/// Skip a balanced `(...)` or `{...}` group starting at `open`.
fn skip_group(b: &[u8], open: usize, left: u8, right: u8) -> Result<usize, LexError> {
    let kind = if left == b'(' { QuoteKind::Substitution } else { QuoteKind::Parameter };
    let mut depth = 0usize;
    let mut pos = open;
    while pos < b.len() {
        let c = b[pos];
        if c == left {
            depth += 1;
            pos += 1;
        } else if c == right {
            depth -= 1;
            pos += 1;
            if depth == 0 {
                return Ok(pos);
            }
        } else {
            pos = match c {
                b'\'' => skip_single(b, pos)?,
                b'"' => skip_double(b, pos)?,
                b'`' => skip_backtick(b, pos)?,
                b'\\' => pos + 2,
                _ => pos + 1,
            };
        }
    }
    Err(LexError { kind, offset: open })
}

/// Shell quote removal for a single word.
///
/// Single-quoted text is taken verbatim. Inside double quotes a backslash
/// only escapes `$`, `` ` ``, `"`, `\` and newline. Substitutions are copied
/// through untouched. Unbalanced input is an error.
pub fn unquote(word: &str) -> Result<String, LexError> {
    let b = word.as_bytes();
    let mut out: Vec<u8> = Vec::with_capacity(b.len());
    let mut pos = 0;
    while pos < b.len() {
        match b[pos] {
            b'\'' => {
                let end = skip_single(b, pos)?;
                out.extend_from_slice(&b[pos + 1..end - 1]);
                pos = end;
            }
            b'"' => {
                let end = skip_double(b, pos)?;
                let inner = &b[pos + 1..end - 1];
                let mut i = 0;
                while i < inner.len() {
                    if inner[i] == b'\\' && i + 1 < inner.len() {
                        match inner[i + 1] {
                            b'$' | b'`' | b'"' | b'\\' => {
                                out.push(inner[i + 1]);
                                i += 2;
                                continue;
                            }
                            b'\n' => {
                                i += 2;
                                continue;
                            }
                            _ => {}
                        }
                    }
                    out.push(inner[i]);
                    i += 1;
                }
                pos = end;
            }
            b'\\' => {
                match b.get(pos + 1) {
                    Some(b'\n') => {}
                    Some(_) => {
                        // copy the escaped character, which may be multi-byte
                        let ch_len = utf8_len(b[pos + 1]);
                        out.extend_from_slice(&b[pos + 1..(pos + 1 + ch_len).min(b.len())]);
                        pos += ch_len - 1;
                    }
                    None => out.push(b'\\'),
                }
                pos += 2;
            }
            b'`' => {
                let end = skip_backtick(b, pos)?;
                out.extend_from_slice(&b[pos..end]);
                pos = end;
            }
            b'$' if matches!(b.get(pos + 1), Some(b'(') | Some(b'{')) => {
                let (l, r) = if b[pos + 1] == b'(' { (b'(', b')') } else { (b'{', b'}') };
                let end = skip_group(b, pos + 1, l, r)?;
                out.extend_from_slice(&b[pos..end]);
                pos = end;
            }
            c => {
                out.push(c);
                pos += 1;
            }
        }
    }
    Ok(String::from_utf8(out).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned()))
}

fn utf8_len(first: u8) -> usize {
    match first {
        0x00..=0x7f => 1,
        0xc0..=0xdf => 2,
        0xe0..=0xef => 3,
        _ => 4,
    }
}
