//! On-disk form, table export and import.
//!
//! A store file is JSON Lines: a `meta` record followed by one record per
//! row, each tagged with its table (`{"table":"alias",...}`). The same
//! stream is what `export all` writes and what `import` reads.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use tempfile::NamedTempFile;
use thiserror::Error;

use super::{AliasRow, ArgumentRow, CommandRow, CorpusStore, FileRecord, HashAlgorithm, LabelRow, RepoRecord};
use crate::parser::SkipTally;

const FORMAT_NAME: &str = "alias-census-store";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("I/O error: {0}")]
    Stream(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
    #[error("import needs an empty store")]
    NotEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Table {
    Repos,
    Files,
    Aliases,
    Commands,
    Arguments,
    Labels,
}

impl Table {
    pub const ALL: [Table; 6] =
        [Table::Repos, Table::Files, Table::Aliases, Table::Commands, Table::Arguments, Table::Labels];

    pub fn name(self) -> &'static str {
        match self {
            Table::Repos => "repos",
            Table::Files => "files",
            Table::Aliases => "aliases",
            Table::Commands => "commands",
            Table::Arguments => "arguments",
            Table::Labels => "labels",
        }
    }

    /// Column order for CSV and JSONL.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Table::Repos => &["id", "full_name", "description", "stars"],
            Table::Files => &["id", "path", "name", "size", "content_hash", "repo_id"],
            Table::Aliases => &["id", "file", "line", "name", "value", "n_commands", "mid_line"],
            Table::Commands => &["id", "alias_ref", "position", "name", "sudo", "env_prefixes", "separator_after"],
            Table::Arguments => &["command_ref", "position", "text"],
            Table::Labels => &["alias_ref", "label", "evidence", "typo_fix"],
        }
    }
}

impl FromStr for Table {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Table::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown table {s:?} (expected one of repos, files, aliases, commands, arguments, labels)"))
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Jsonl,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" | "json" => Ok(ExportFormat::Jsonl),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected jsonl or csv)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Meta {
    format: String,
    version: u32,
    hash: HashAlgorithm,
    skips: SkipTally,
}

#[derive(Serialize)]
#[serde(tag = "table", rename_all = "lowercase")]
enum RecordRef<'a> {
    Meta(&'a Meta),
    Repo(&'a RepoRecord),
    File(&'a FileRecord),
    Alias(&'a AliasRow),
    Command(&'a CommandRow),
    Argument(&'a ArgumentRow),
    Label(&'a LabelRow),
}

#[derive(Deserialize)]
#[serde(tag = "table", rename_all = "lowercase")]
enum Record {
    Meta(Meta),
    Repo(RepoRecord),
    File(FileRecord),
    Alias(AliasRow),
    Command(CommandRow),
    Argument(ArgumentRow),
    Label(LabelRow),
}

impl CorpusStore {
    /// Load the store at `path`, or start an empty one if it does not exist.
    pub fn open(path: &Path, hash: HashAlgorithm) -> Result<CorpusStore, StoreError> {
        match File::open(path) {
            Ok(f) => {
                let mut store = CorpusStore::new(hash);
                store.import(BufReader::new(f))?;
                Ok(store)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(CorpusStore::new(hash)),
            Err(source) => Err(StoreError::Io { path: path.to_path_buf(), source }),
        }
    }

    /// Write the store atomically: a temporary file in the same directory is
    /// renamed over `path`.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let io_err = |source| StoreError::Io { path: path.to_path_buf(), source };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        fs::create_dir_all(dir).map_err(io_err)?;
        let tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            self.write_dump(&mut w)?;
            w.flush().map_err(io_err)?;
        }
        tmp.as_file().sync_all().map_err(io_err)?;
        tmp.persist(path).map_err(|e| io_err(e.error))?;
        Ok(())
    }

    /// Write every table as one tagged JSONL stream. Returns the row count.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<usize, StoreError> {
        let meta = Meta {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            hash: self.hash,
            skips: self.skips,
        };
        let mut rows = 0;
        let mut put = |r: RecordRef| -> Result<(), StoreError> {
            serde_json::to_writer(&mut out, &r).map_err(|e| StoreError::Json { line: rows + 1, source: e })?;
            out.write_all(b"\n")?;
            rows += 1;
            Ok(())
        };
        put(RecordRef::Meta(&meta))?;
        self.repos.iter().try_for_each(|r| put(RecordRef::Repo(r)))?;
        self.files.iter().try_for_each(|r| put(RecordRef::File(r)))?;
        self.aliases.iter().try_for_each(|r| put(RecordRef::Alias(r)))?;
        self.commands.iter().try_for_each(|r| put(RecordRef::Command(r)))?;
        self.arguments.iter().try_for_each(|r| put(RecordRef::Argument(r)))?;
        self.labels.iter().try_for_each(|r| put(RecordRef::Label(r)))?;
        Ok(rows - 1)
    }

    /// Read a tagged JSONL stream into this (empty) store.
    pub fn import<R: BufRead>(&mut self, input: R) -> Result<usize, StoreError> {
        if !self.is_empty() {
            return Err(StoreError::NotEmpty);
        }
        let mut rows = 0;
        let mut saw_meta = false;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(&line).map_err(|source| StoreError::Json { line: i + 1, source })?;
            match record {
                Record::Meta(m) => {
                    if m.format != FORMAT_NAME || m.version != FORMAT_VERSION {
                        return Err(StoreError::Format(format!(
                            "unsupported store format {} v{}",
                            m.format, m.version
                        )));
                    }
                    self.hash = m.hash;
                    self.skips = m.skips;
                    saw_meta = true;
                    continue;
                }
                Record::Repo(r) => self.repos.push(r),
                Record::File(r) => self.files.push(r),
                Record::Alias(r) => self.aliases.push(r),
                Record::Command(r) => self.commands.push(r),
                Record::Argument(r) => self.arguments.push(r),
                Record::Label(r) => self.labels.push(r),
            }
            rows += 1;
        }
        if rows > 0 && !saw_meta {
            return Err(StoreError::Format("missing meta record".to_string()));
        }
        self.repos.sort_by_key(|r| r.id);
        self.files.sort_by_key(|r| r.id);
        self.aliases.sort_by_key(|r| r.id);
        self.commands.sort_by_key(|r| r.id);
        self.arguments.sort_by_key(|r| (r.command_ref, r.position));
        self.labels.sort_by_key(|r| r.alias_ref);
        self.reindex();
        Ok(rows)
    }

    pub fn row_count(&self, table: Table) -> usize {
        match table {
            Table::Repos => self.repos.len(),
            Table::Files => self.files.len(),
            Table::Aliases => self.aliases.len(),
            Table::Commands => self.commands.len(),
            Table::Arguments => self.arguments.len(),
            Table::Labels => self.labels.len(),
        }
    }

    fn table_values(&self, table: Table) -> Vec<Value> {
        fn values<T: Serialize>(rows: &[T]) -> Vec<Value> {
            rows.iter().map(|r| serde_json::to_value(r).expect("rows serialize")).collect()
        }
        match table {
            Table::Repos => values(&self.repos),
            Table::Files => values(&self.files),
            Table::Aliases => values(&self.aliases),
            Table::Commands => values(&self.commands),
            Table::Arguments => values(&self.arguments),
            Table::Labels => values(&self.labels),
        }
    }

    /// Write one table; returns the number of data rows.
    pub fn export<W: Write>(&self, table: Table, format: ExportFormat, out: W) -> Result<usize, StoreError> {
        let rows = self.table_values(table);
        match format {
            ExportFormat::Jsonl => {
                let mut out = out;
                for row in &rows {
                    serde_json::to_writer(&mut out, row).map_err(|e| StoreError::Json { line: 0, source: e })?;
                    out.write_all(b"\n")?;
                }
                out.flush()?;
            }
            ExportFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(table.columns())?;
                for row in &rows {
                    w.write_record(table.columns().iter().map(|c| csv_field(&row[*c])))?;
                }
                w.flush()?;
            }
        }
        Ok(rows.len())
    }

    /// SHA-256 of each table's JSONL export, for comparing stores.
    pub fn table_digests(&self) -> BTreeMap<&'static str, String> {
        Table::ALL
            .into_iter()
            .map(|t| {
                let mut buf = Vec::new();
                self.export(t, ExportFormat::Jsonl, &mut buf).expect("export to memory");
                (t.name(), hex::encode(Sha256::digest(&buf)))
            })
            .collect()
    }
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(_) | Value::Number(_) => v.to_string(),
        Value::Array(_) | Value::Object(_) => v.to_string(),
    }
}
