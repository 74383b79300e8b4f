//! Deduplicated relational store of files, repositories and parsed aliases.
//!
//! Tables: repos, files, aliases, commands, arguments and labels, linked
//! argument -> command -> alias -> file -> repo. Rows are kept sorted by id
//! and child tables by parent reference, so the children of a row are a
//! contiguous slice.

mod ingest;
mod persist;
mod scan;

use serde::{Deserialize, Serialize};
use sha1::Sha1;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::classifier::{classify, KnowledgeBase, PracticeKind};
use crate::parser::{AliasDefinition, FileId, ParsedCommand, Separator, SkipTally};

pub use ingest::{IngestReport, RepoMeta, SourceFile, SourceFileRecord};
pub use persist::{ExportFormat, StoreError, Table};
pub use scan::{scan, ScanItem, ScanOptions, ScannedFile, DEFAULT_PATTERNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashAlgorithm {
    #[default]
    Sha1,
    Sha256,
}

impl HashAlgorithm {
    pub fn digest(self, bytes: &[u8]) -> String {
        match self {
            HashAlgorithm::Sha1 => hex::encode(Sha1::digest(bytes)),
            HashAlgorithm::Sha256 => hex::encode(Sha256::digest(bytes)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HashAlgorithm::Sha1 => "sha1",
            HashAlgorithm::Sha256 => "sha256",
        }
    }
}

impl FromStr for HashAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sha1" | "sha-1" => Ok(HashAlgorithm::Sha1),
            "sha256" | "sha-256" => Ok(HashAlgorithm::Sha256),
            other => Err(format!("unknown hash algorithm {other:?} (expected sha1 or sha256)")),
        }
    }
}

impl fmt::Display for HashAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoRecord {
    pub id: u64,
    /// `owner/name`
    pub full_name: String,
    pub description: String,
    pub stars: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub id: FileId,
    /// Path relative to the scan root or repository.
    pub path: String,
    /// Base file name.
    pub name: String,
    pub size: u64,
    pub content_hash: String,
    pub repo_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasRow {
    pub id: u64,
    pub file: FileId,
    pub line: usize,
    pub name: String,
    pub value: String,
    pub n_commands: usize,
    pub mid_line: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandRow {
    pub id: u64,
    pub alias_ref: u64,
    pub position: usize,
    pub name: String,
    pub sudo: bool,
    pub env_prefixes: Vec<String>,
    pub separator_after: Separator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentRow {
    pub command_ref: u64,
    pub position: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub alias_ref: u64,
    pub label: PracticeKind,
    pub evidence: String,
    pub typo_fix: bool,
}

/// In-memory relational store; see [`CorpusStore::open`] and
/// [`CorpusStore::save`] for the on-disk form.
#[derive(Debug, Clone, Default)]
pub struct CorpusStore {
    pub hash: HashAlgorithm,
    pub repos: Vec<RepoRecord>,
    pub files: Vec<FileRecord>,
    pub aliases: Vec<AliasRow>,
    pub commands: Vec<CommandRow>,
    pub arguments: Vec<ArgumentRow>,
    pub labels: Vec<LabelRow>,
    pub skips: SkipTally,
    by_hash: HashMap<String, FileId>,
    by_repo_name: HashMap<String, u64>,
}

/// One alias with its child rows.
#[derive(Debug, Clone, Copy)]
pub struct AliasView<'a> {
    pub row: &'a AliasRow,
    pub commands: &'a [CommandRow],
    store: &'a CorpusStore,
}

impl<'a> AliasView<'a> {
    pub fn arguments(&self, command: &CommandRow) -> &'a [ArgumentRow] {
        self.store.arguments_of(command.id)
    }

    pub fn labels(&self) -> &'a [LabelRow] {
        self.store.labels_of(self.row.id)
    }

    pub fn has_label(&self, kind: PracticeKind) -> bool {
        self.labels().iter().any(|l| l.label == kind)
    }

    pub fn file(&self) -> Option<&'a FileRecord> {
        self.store.file(self.row.file)
    }

    /// Rebuild the parsed definition from the stored rows.
    pub fn to_definition(&self) -> AliasDefinition {
        AliasDefinition {
            name: self.row.name.clone(),
            value: self.row.value.clone(),
            commands: self
                .commands
                .iter()
                .map(|c| ParsedCommand {
                    env_prefixes: c.env_prefixes.clone(),
                    name: c.name.clone(),
                    arguments: self.arguments(c).iter().map(|a| a.text.clone()).collect(),
                    sudo: c.sudo,
                    separator_after: c.separator_after,
                })
                .collect(),
            file_id: self.row.file,
            line: self.row.line,
            mid_line: self.row.mid_line,
        }
    }
}

impl CorpusStore {
    pub fn new(hash: HashAlgorithm) -> CorpusStore {
        CorpusStore { hash, ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty() && self.repos.is_empty()
    }

    pub fn contains_hash(&self, hash: &str) -> bool {
        self.by_hash.contains_key(hash)
    }

    pub fn file(&self, id: FileId) -> Option<&FileRecord> {
        let i = self.files.partition_point(|f| f.id < id);
        self.files.get(i).filter(|f| f.id == id)
    }

    pub fn repo(&self, id: u64) -> Option<&RepoRecord> {
        let i = self.repos.partition_point(|r| r.id < id);
        self.repos.get(i).filter(|r| r.id == id)
    }

    pub fn commands_of(&self, alias_id: u64) -> &[CommandRow] {
        slice_by(&self.commands, alias_id, |c| c.alias_ref)
    }

    pub fn arguments_of(&self, command_id: u64) -> &[ArgumentRow] {
        slice_by(&self.arguments, command_id, |a| a.command_ref)
    }

    pub fn labels_of(&self, alias_id: u64) -> &[LabelRow] {
        slice_by(&self.labels, alias_id, |l| l.alias_ref)
    }

    pub fn alias_views(&self) -> impl Iterator<Item = AliasView<'_>> + '_ {
        self.aliases.iter().map(move |row| AliasView { row, commands: self.commands_of(row.id), store: self })
    }

    pub fn definitions(&self) -> Vec<AliasDefinition> {
        self.alias_views().map(|v| v.to_definition()).collect()
    }

    /// Find or create a repository row by full name.
    pub fn upsert_repo(&mut self, full_name: &str, description: &str, stars: u64) -> u64 {
        if let Some(&id) = self.by_repo_name.get(full_name) {
            return id;
        }
        let id = self.repos.last().map_or(1, |r| r.id + 1);
        self.repos.push(RepoRecord {
            id,
            full_name: full_name.to_string(),
            description: description.to_string(),
            stars,
        });
        self.by_repo_name.insert(full_name.to_string(), id);
        id
    }

    /// Append a file and its parsed definitions. Returns `None` if a file
    /// with the same content hash is already stored.
    pub fn insert_file(
        &mut self,
        path: &str,
        size: u64,
        content_hash: String,
        repo_id: Option<u64>,
        definitions: &[AliasDefinition],
    ) -> Option<FileId> {
        if self.by_hash.contains_key(&content_hash) {
            return None;
        }
        let id = FileId(self.files.last().map_or(1, |f| f.id.0 + 1));
        let name = path.rsplit(['/', '\\']).next().unwrap_or(path).to_string();
        self.by_hash.insert(content_hash.clone(), id);
        self.files.push(FileRecord { id, path: path.to_string(), name, size, content_hash, repo_id });
        let mut alias_id = self.aliases.last().map_or(1, |a| a.id + 1);
        let mut command_id = self.commands.last().map_or(1, |c| c.id + 1);
        for def in definitions {
            self.aliases.push(AliasRow {
                id: alias_id,
                file: id,
                line: def.line,
                name: def.name.clone(),
                value: def.value.clone(),
                n_commands: def.commands.len(),
                mid_line: def.mid_line,
            });
            for (position, cmd) in def.commands.iter().enumerate() {
                self.commands.push(CommandRow {
                    id: command_id,
                    alias_ref: alias_id,
                    position,
                    name: cmd.name.clone(),
                    sudo: cmd.sudo,
                    env_prefixes: cmd.env_prefixes.clone(),
                    separator_after: cmd.separator_after,
                });
                for (position, text) in cmd.arguments.iter().enumerate() {
                    self.arguments.push(ArgumentRow { command_ref: command_id, position, text: text.clone() });
                }
                command_id += 1;
            }
            alias_id += 1;
        }
        Some(id)
    }

    /// Recompute the labels table from scratch. Returns the number of labels.
    pub fn relabel(&mut self, kb: &KnowledgeBase) -> usize {
        use rayon::prelude::*;
        let defs: Vec<(u64, AliasDefinition)> = self.alias_views().map(|v| (v.row.id, v.to_definition())).collect();
        let labels: Vec<LabelRow> = defs
            .par_iter()
            .flat_map_iter(|(id, def)| {
                classify(def, kb).into_iter().map(move |l| LabelRow {
                    alias_ref: *id,
                    label: l.kind,
                    evidence: l.evidence,
                    typo_fix: l.typo_fix,
                })
            })
            .collect();
        self.labels = labels;
        self.labels.len()
    }

    /// Rebuild lookup indexes after the tables were replaced wholesale.
    fn reindex(&mut self) {
        self.by_hash = self.files.iter().map(|f| (f.content_hash.clone(), f.id)).collect();
        self.by_repo_name = self.repos.iter().map(|r| (r.full_name.clone(), r.id)).collect();
    }

    /// Full-table scan of the structural invariants; returns every violation.
    pub fn check_integrity(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut check_sorted = |name: &str, ids: Vec<u64>| {
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                problems.push(format!("{name}: ids are not strictly increasing"));
            }
        };
        check_sorted("repos", self.repos.iter().map(|r| r.id).collect());
        check_sorted("files", self.files.iter().map(|f| f.id.0).collect());
        check_sorted("aliases", self.aliases.iter().map(|a| a.id).collect());
        check_sorted("commands", self.commands.iter().map(|c| c.id).collect());

        let mut names = HashMap::new();
        for r in &self.repos {
            if let Some(other) = names.insert(&r.full_name, r.id) {
                problems.push(format!("repos {} and {other} share full_name {}", r.id, r.full_name));
            }
        }
        let mut hashes = HashMap::new();
        for f in &self.files {
            if let Some(other) = hashes.insert(&f.content_hash, f.id) {
                problems.push(format!("files {} and {other} share content hash", f.id));
            }
            if let Some(repo) = f.repo_id {
                if self.repo(repo).is_none() {
                    problems.push(format!("file {} references missing repo {repo}", f.id));
                }
            }
        }
        for a in &self.aliases {
            if self.file(a.file).is_none() {
                problems.push(format!("alias {} references missing file {}", a.id, a.file));
            }
            let cmds = self.commands_of(a.id);
            if cmds.len() != a.n_commands {
                problems.push(format!("alias {} has {} commands, n_commands says {}", a.id, cmds.len(), a.n_commands));
            }
            if cmds.iter().enumerate().any(|(i, c)| c.position != i) {
                problems.push(format!("alias {}: command positions are not dense", a.id));
            }
        }
        let alias_exists = |id: u64| {
            let i = self.aliases.partition_point(|a| a.id < id);
            self.aliases.get(i).is_some_and(|a| a.id == id)
        };
        if self.commands.windows(2).any(|w| w[0].alias_ref > w[1].alias_ref) {
            problems.push("commands are not grouped by alias".to_string());
        }
        for c in &self.commands {
            if !alias_exists(c.alias_ref) {
                problems.push(format!("command {} references missing alias {}", c.id, c.alias_ref));
            }
            if self.arguments_of(c.id).iter().enumerate().any(|(i, a)| a.position != i) {
                problems.push(format!("command {}: argument positions are not dense", c.id));
            }
        }
        if self.arguments.windows(2).any(|w| w[0].command_ref > w[1].command_ref) {
            problems.push("arguments are not grouped by command".to_string());
        }
        for a in &self.arguments {
            let i = self.commands.partition_point(|c| c.id < a.command_ref);
            if !self.commands.get(i).is_some_and(|c| c.id == a.command_ref) {
                problems.push(format!("argument references missing command {}", a.command_ref));
            }
        }
        if self.labels.windows(2).any(|w| w[0].alias_ref > w[1].alias_ref) {
            problems.push("labels are not grouped by alias".to_string());
        }
        for l in &self.labels {
            if !alias_exists(l.alias_ref) {
                problems.push(format!("label references missing alias {}", l.alias_ref));
            }
        }
        problems
    }
}

/// The contiguous run of `rows` whose key equals `id`; `rows` is sorted by key.
fn slice_by<T>(rows: &[T], id: u64, key: impl Fn(&T) -> u64) -> &[T] {
    let lo = rows.partition_point(|r| key(r) < id);
    let hi = lo + rows[lo..].partition_point(|r| key(r) == id);
    &rows[lo..hi]
}
