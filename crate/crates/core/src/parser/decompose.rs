use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::extract::{extract_aliases, RawAliasOccurrence, SkipTally};
use super::lexer::{tokenize, unquote, LexError, Separator, TokenKind};
use super::FileId;

/// Characters that may not appear in an alias name.
const NAME_FORBIDDEN: &[char] = &['/', '$', '`', '=', '|', '&', ';', '(', ')', '<', '>', '\'', '"', '\\'];

/// Why a statement could not be decomposed. Every variant is a malformed
/// definition; the occurrence is skipped and tallied.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unbalanced quote: {0}")]
    UnbalancedQuote(#[from] LexError),
    #[error("statement is not an alias definition")]
    NotAnAlias,
    #[error("operand {0} does not exist")]
    MissingPair(usize),
    #[error("no unquoted '=' in operand")]
    MissingEquals,
    #[error("empty alias name")]
    EmptyName,
    #[error("invalid alias name {0:?}")]
    InvalidName(String),
    #[error("separator {0:?} is not preceded by a command")]
    EmptyCommand(Separator),
}

/// One command of an alias value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParsedCommand {
    pub env_prefixes: Vec<String>,
    pub name: String,
    /// Argument tokens exactly as written, quotes included.
    pub arguments: Vec<String>,
    pub sudo: bool,
    pub separator_after: Separator,
}

impl ParsedCommand {
    pub fn first_argument(&self) -> Option<&str> {
        self.arguments.first().map(String::as_str)
    }

    /// Words of the command joined by single spaces, without the separator.
    pub fn render(&self) -> String {
        let mut parts: Vec<&str> = self.env_prefixes.iter().map(String::as_str).collect();
        if self.sudo {
            parts.push("sudo");
        }
        parts.push(&self.name);
        parts.extend(self.arguments.iter().map(String::as_str));
        parts.join(" ")
    }
}

/// A decomposed `alias name=value` definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasDefinition {
    pub name: String,
    /// The value after shell quote removal.
    pub value: String,
    pub commands: Vec<ParsedCommand>,
    pub file_id: FileId,
    pub line: usize,
    pub mid_line: bool,
}

impl AliasDefinition {
    /// Build a definition directly from a name and an already unquoted value.
    pub fn new(name: &str, value: &str) -> Result<Self, ParseError> {
        validate_name(name)?;
        Ok(AliasDefinition {
            name: name.to_string(),
            value: value.to_string(),
            commands: tokenize_value(value)?,
            file_id: FileId(0),
            line: 0,
            mid_line: false,
        })
    }

    /// Commands re-joined with single spaces and their separators.
    pub fn reassemble(&self) -> String {
        render_commands(&self.commands)
    }

    /// Number of characters in the value divided by characters in the name.
    pub fn compression_ratio(&self) -> f64 {
        let name = self.name.chars().count();
        if name == 0 {
            return 0.0;
        }
        self.value.chars().count() as f64 / name as f64
    }

    pub fn has_trailing_separator(&self) -> bool {
        self.commands.last().is_some_and(|c| c.separator_after != Separator::None)
    }
}

pub fn render_commands(commands: &[ParsedCommand]) -> String {
    let mut out = String::new();
    for (i, cmd) in commands.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&cmd.render());
        if cmd.separator_after != Separator::None {
            out.push(' ');
            out.push_str(cmd.separator_after.as_shell());
        }
    }
    out
}

/// Split one occurrence into name and value and decompose the value.
pub fn parse_definition(raw: &RawAliasOccurrence) -> Result<AliasDefinition, ParseError> {
    let tokens = tokenize(&raw.text, false)?;
    let words: Vec<&str> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.text(&raw.text))
        .collect();
    if words.first() != Some(&"alias") {
        return Err(ParseError::NotAnAlias);
    }
    let pair = *words.get(raw.pair_index + 1).ok_or(ParseError::MissingPair(raw.pair_index))?;
    let (name, value_word) = split_pair(pair)?;
    validate_name(name)?;
    let value = unquote(value_word)?;
    let commands = tokenize_value(&value)?;
    Ok(AliasDefinition {
        name: name.to_string(),
        value,
        commands,
        file_id: raw.file_id,
        line: raw.line,
        mid_line: raw.mid_line,
    })
}

fn split_pair(pair: &str) -> Result<(&str, &str), ParseError> {
    for (i, c) in pair.char_indices() {
        match c {
            '=' => return Ok((&pair[..i], &pair[i + 1..])),
            '\'' | '"' | '\\' | '`' | '$' => return Err(ParseError::MissingEquals),
            _ => {}
        }
    }
    Err(ParseError::MissingEquals)
}

fn validate_name(name: &str) -> Result<(), ParseError> {
    if name.is_empty() {
        return Err(ParseError::EmptyName);
    }
    if name.chars().any(|c| c.is_whitespace() || NAME_FORBIDDEN.contains(&c)) {
        return Err(ParseError::InvalidName(name.to_string()));
    }
    Ok(())
}

/// Decompose an unquoted alias value into commands.
///
/// Commands are split at `|`, `|&`, `&&`, `||`, `&` and `;` outside quotes;
/// an unquoted newline ends a command like `;`. A trailing separator is kept
/// on the last command. Leading `NAME=VALUE` words become env prefixes and a
/// leading `sudo` followed by another word is unwrapped.
pub fn tokenize_value(value: &str) -> Result<Vec<ParsedCommand>, ParseError> {
    let tokens = tokenize(value, false)?;
    let mut commands = Vec::new();
    let mut words: Vec<&str> = Vec::new();
    for tok in &tokens {
        match tok.kind {
            TokenKind::Word => words.push(tok.text(value)),
            TokenKind::Op(sep) => {
                if words.is_empty() {
                    return Err(ParseError::EmptyCommand(sep));
                }
                commands.push(build_command(&words, sep));
                words.clear();
            }
            TokenKind::Newline => {
                if !words.is_empty() {
                    commands.push(build_command(&words, Separator::Seq));
                    words.clear();
                }
            }
        }
    }
    if !words.is_empty() {
        commands.push(build_command(&words, Separator::None));
    }
    Ok(commands)
}

fn is_assignment(word: &str) -> bool {
    let Some(eq) = word.find('=') else {
        return false;
    };
    let name = &word[..eq];
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn build_command(words: &[&str], separator_after: Separator) -> ParsedCommand {
    let mut i = 0;
    // a command made only of assignments keeps the last one as its name
    while i + 1 < words.len() && is_assignment(words[i]) {
        i += 1;
    }
    let env_prefixes = words[..i].iter().map(|s| s.to_string()).collect();
    let mut sudo = false;
    if words[i] == "sudo" && i + 1 < words.len() {
        sudo = true;
        i += 1;
    }
    ParsedCommand {
        env_prefixes,
        name: words[i].to_string(),
        arguments: words[i + 1..].iter().map(|s| s.to_string()).collect(),
        sudo,
        separator_after,
    }
}

/// Extract and parse every definition in `source`, tallying failures.
pub fn parse_source(source: &str, file_id: FileId) -> (Vec<AliasDefinition>, SkipTally) {
    let extraction = extract_aliases(source, file_id);
    let mut skips = extraction.skips;
    let mut defs = Vec::with_capacity(extraction.occurrences.len());
    for occ in &extraction.occurrences {
        match parse_definition(occ) {
            Ok(def) => defs.push(def),
            Err(_) => skips.malformed += 1,
        }
    }
    (defs, skips)
}

/// Parse a snippet such as `alias gs='git status'` into its definitions.
pub fn parse_alias_statement(text: &str) -> Result<Vec<AliasDefinition>, ParseError> {
    let extraction = extract_aliases(text, FileId(0));
    if extraction.occurrences.is_empty() {
        return Err(ParseError::NotAnAlias);
    }
    extraction.occurrences.iter().map(parse_definition).collect()
}
