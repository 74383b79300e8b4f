//! Alias extraction and decomposition.
//!
//! [`extract_aliases`] finds `alias` statements in shell source,
//! [`parse_definition`] splits one `name=value` pair and hands the value to
//! [`tokenize_value`], which produces the command list.

mod decompose;
mod extract;
pub mod lexer;

use serde::{Deserialize, Serialize};
use std::fmt;

pub use decompose::{
    parse_alias_statement, parse_definition, parse_source, render_commands, tokenize_value, AliasDefinition,
    ParseError, ParsedCommand,
};
pub use extract::{extract_aliases, extract_aliases_lossy, Extraction, RawAliasOccurrence, SkipTally};
pub use lexer::{unquote, LexError, Separator};

/// Opaque identifier of a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FileId(pub u64);

impl fmt::Display for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
