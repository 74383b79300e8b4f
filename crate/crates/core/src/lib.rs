//! Mining toolkit for shell alias definitions.
//!
//! The crate extracts `alias name=value` definitions from dotfiles, breaks
//! each value into commands and arguments, assigns customization-practice
//! labels, keeps everything in a deduplicated relational store, and derives
//! frequency tables, repair suggestions and code-search harvest plans from it.

pub mod analytics;
pub mod classifier;
pub mod corpus;
pub mod harvester;
pub mod parser;
pub mod suggest;

pub use classifier::{classify, KnowledgeBase, PracticeKind, PracticeLabel};
pub use corpus::CorpusStore;
pub use parser::{AliasDefinition, ParsedCommand, Separator};
