use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Token, TokenKind};
use super::FileId;

/// Physical lines an unterminated quote may pull in before we give up.
const MAX_CONTINUATION_LINES: usize = 32;

/// One `name=value` pair of an `alias` statement, located in its source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAliasOccurrence {
    pub file_id: FileId,
    /// 1-based line on which the statement starts.
    pub line: usize,
    /// Full statement text, from `alias` up to its terminator.
    pub text: String,
    /// Index of the pair among the statement's operands.
    pub pair_index: usize,
    /// The statement followed another command on the same line.
    pub mid_line: bool,
}

/// Statements or operands that were recognised but not turned into occurrences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipTally {
    /// `alias name value`, bare `alias` listings and other pairs without `=`.
    pub non_posix: u64,
    /// Statements whose first operand is a flag (`alias -g ...`, `alias -p`).
    pub flagged: u64,
    /// Unbalanced quotes, invalid names, empty commands.
    pub malformed: u64,
}

impl SkipTally {
    pub fn total(&self) -> u64 {
        self.non_posix + self.flagged + self.malformed
    }

    pub fn add(&mut self, other: &SkipTally) {
        self.non_posix += other.non_posix;
        self.flagged += other.flagged;
        self.malformed += other.malformed;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub occurrences: Vec<RawAliasOccurrence>,
    pub skips: SkipTally,
}

/// Extract from raw bytes, replacing invalid UTF-8.
pub fn extract_aliases_lossy(source: &[u8], file_id: FileId) -> Extraction {
    extract_aliases(&String::from_utf8_lossy(source), file_id)
}

/// Find every `alias` statement in shell source text.
///
/// Statements are recognised at the start of a line and after `;`, `&&`,
/// `||`, `|` or `&`. Commented lines are ignored. Backslash-newline
/// continuations are joined, and a quote left open at the end of a line
/// pulls in following lines until it closes.
pub fn extract_aliases(source: &str, file_id: FileId) -> Extraction {
    let lines: Vec<&str> = source.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let mut out = Extraction::default();
    let mut i = 0;
    while i < lines.len() {
        let mut logical = LogicalLine::default();
        let mut j = logical.push_joined(&lines, i);
        if !logical.text.contains("alias") {
            i = j + 1;
            continue;
        }
        let first_end = j;
        let mut tokens = tokenize(&logical.text, true);
        let mut extra = 0;
        while tokens.is_err() && extra < MAX_CONTINUATION_LINES && j + 1 < lines.len() {
            logical.text.push('\n');
            j = logical.push_joined(&lines, j + 1);
            tokens = tokenize(&logical.text, true);
            extra += 1;
        }
        match tokens {
            Ok(tokens) => {
                collect_statements(&logical, &tokens, file_id, &mut out);
                i = j + 1;
            }
            Err(_) => {
                if starts_alias_statement(&logical.text) {
                    out.skips.malformed += 1;
                }
                i = first_end + 1;
            }
        }
    }
    out
}

#[derive(Default)]
struct LogicalLine {
    text: String,
    /// (byte offset in `text`, 1-based physical line) breakpoints.
    starts: Vec<(usize, usize)>,
}

impl LogicalLine {
    /// Append line `idx` and any backslash continuations; returns the last
    /// physical index consumed.
    fn push_joined(&mut self, lines: &[&str], mut idx: usize) -> usize {
        self.starts.push((self.text.len(), idx + 1));
        loop {
            let line = lines[idx];
            if ends_with_continuation(line) && idx + 1 < lines.len() {
                self.text.push_str(&line[..line.len() - 1]);
                idx += 1;
                self.starts.push((self.text.len(), idx + 1));
            } else {
                self.text.push_str(line);
                return idx;
            }
        }
    }

    fn line_at(&self, offset: usize) -> usize {
        let idx = self.starts.partition_point(|&(o, _)| o <= offset);
        self.starts[idx.saturating_sub(1)].1
    }
}

fn ends_with_continuation(line: &str) -> bool {
    let trailing = line.bytes().rev().take_while(|&b| b == b'\\').count();
    trailing % 2 == 1
}

/// Cheap check used only to decide whether an unparseable line is worth a
/// malformed tally.
fn starts_alias_statement(text: &str) -> bool {
    text.split(|c: char| matches!(c, ';' | '&' | '|' | '\n'))
        .any(|seg| {
            let seg = seg.trim_start();
            seg.strip_prefix("alias").is_some_and(|rest| rest.starts_with([' ', '\t']))
        })
}

fn collect_statements(logical: &LogicalLine, tokens: &[Token], file_id: FileId, out: &mut Extraction) {
    let mut statement: Vec<Token> = Vec::new();
    let mut words_on_line = 0usize;
    let mut mid_line = false;
    for tok in tokens {
        match tok.kind {
            TokenKind::Word => {
                if statement.is_empty() {
                    mid_line = words_on_line > 0;
                }
                statement.push(*tok);
                words_on_line += 1;
            }
            TokenKind::Op(_) | TokenKind::Newline => {
                if !statement.is_empty() {
                    handle_statement(logical, &statement, mid_line, file_id, out);
                    statement.clear();
                }
                if tok.kind == TokenKind::Newline {
                    words_on_line = 0;
                }
            }
        }
    }
    if !statement.is_empty() {
        handle_statement(logical, &statement, mid_line, file_id, out);
    }
}

fn handle_statement(
    logical: &LogicalLine,
    words: &[Token],
    mid_line: bool,
    file_id: FileId,
    out: &mut Extraction,
) {
    let src = logical.text.as_str();
    if words[0].text(src) != "alias" {
        return;
    }
    if words.len() == 1 {
        out.skips.non_posix += 1;
        return;
    }
    if words[1].text(src).starts_with('-') {
        out.skips.flagged += 1;
        return;
    }
    let start = words[0].start;
    let end = words[words.len() - 1].end;
    let text = &src[start..end];
    let line = logical.line_at(start);
    for (k, w) in words[1..].iter().enumerate() {
        if w.text(src).contains('=') {
            out.occurrences.push(RawAliasOccurrence {
                file_id,
                line,
                text: text.to_string(),
                pair_index: k,
                mid_line,
            });
        } else {
            out.skips.non_posix += 1;
        }
    }
}
