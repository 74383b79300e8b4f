use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use super::scan::ScannedFile;
use super::CorpusStore;
use crate::parser::{parse_source, AliasDefinition, FileId, SkipTally};

/// Files parsed in parallel per batch.
const BATCH: usize = 256;

/// A file to ingest, with optional repository metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub repo: Option<RepoMeta>,
    pub path: String,
    pub contents: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoMeta {
    pub full_name: String,
    pub description: String,
    pub stars: u64,
}

impl From<ScannedFile> for SourceFile {
    fn from(f: ScannedFile) -> Self {
        SourceFile { repo: None, path: f.path, contents: f.contents }
    }
}

/// JSONL interchange shape for harvested files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFileRecord {
    #[serde(default)]
    pub repo: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub stars: Option<u64>,
    pub path: String,
    #[serde(default)]
    pub size: Option<u64>,
    pub contents: String,
}

impl From<SourceFileRecord> for SourceFile {
    fn from(r: SourceFileRecord) -> Self {
        SourceFile {
            repo: r.repo.map(|full_name| RepoMeta {
                full_name,
                description: r.description.unwrap_or_default(),
                stars: r.stars.unwrap_or(0),
            }),
            path: r.path,
            contents: r.contents.into_bytes(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub files_seen: u64,
    pub files_ingested: u64,
    pub duplicates_dropped: u64,
    pub aliases_parsed: u64,
    pub statements_skipped: u64,
    pub skips: SkipTally,
}

impl IngestReport {
    pub fn duplicate_share(&self) -> f64 {
        if self.files_seen == 0 {
            return 0.0;
        }
        self.duplicates_dropped as f64 / self.files_seen as f64
    }
}

struct Prepared {
    file: SourceFile,
    hash: String,
}

impl CorpusStore {
    /// Hash, deduplicate, parse and store every file of `files`.
    ///
    /// The first file with a given content hash wins, whether it was stored
    /// earlier or appears earlier in `files`. Parsing runs in parallel; rows
    /// are appended in input order so results do not depend on scheduling.
    pub fn ingest<I>(&mut self, files: I) -> IngestReport
    where
        I: IntoIterator,
        I::Item: Into<SourceFile>,
    {
        let mut report = IngestReport::default();
        let mut iter = files.into_iter().map(Into::into).peekable();
        while iter.peek().is_some() {
            let batch: Vec<SourceFile> = iter.by_ref().take(BATCH).collect();
            self.ingest_batch(batch, &mut report);
        }
        report.statements_skipped = report.skips.total();
        report
    }

    fn ingest_batch(&mut self, batch: Vec<SourceFile>, report: &mut IngestReport) {
        let algo = self.hash;
        report.files_seen += batch.len() as u64;
        let hashed: Vec<Prepared> = batch
            .into_par_iter()
            .map(|file| Prepared { hash: algo.digest(&file.contents), file })
            .collect();

        let mut seen = HashSet::new();
        let mut unique = Vec::with_capacity(hashed.len());
        for p in hashed {
            if self.contains_hash(&p.hash) || !seen.insert(p.hash.clone()) {
                report.duplicates_dropped += 1;
                log::debug!("duplicate content: {}", p.file.path);
            } else {
                unique.push(p);
            }
        }

        let parsed: Vec<(Prepared, Vec<AliasDefinition>, SkipTally)> = unique
            .into_par_iter()
            .map(|p| {
                let (defs, skips) = parse_source(&String::from_utf8_lossy(&p.file.contents), FileId(0));
                (p, defs, skips)
            })
            .collect();

        for (p, defs, skips) in parsed {
            let repo_id = p
                .file
                .repo
                .as_ref()
                .map(|r| self.upsert_repo(&r.full_name, &r.description, r.stars));
            let size = p.file.contents.len() as u64;
            if self.insert_file(&p.file.path, size, p.hash, repo_id, &defs).is_some() {
                report.files_ingested += 1;
                report.aliases_parsed += defs.len() as u64;
                report.skips.add(&skips);
                self.skips.add(&skips);
            }
        }
    }
}
