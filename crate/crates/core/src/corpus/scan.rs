use glob::{MatchOptions, Pattern, PatternError};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use walkdir::WalkDir;

/// File-name patterns that select shell configuration files.
pub const DEFAULT_PATTERNS: [&str; 5] = ["*alias*", "*bashrc*", "*zshrc*", "*profile*", "git*"];

const MATCH: MatchOptions = MatchOptions {
    case_sensitive: false,
    require_literal_separator: false,
    require_literal_leading_dot: false,
};

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Base-name patterns; `None` accepts every file.
    pub patterns: Option<Vec<Pattern>>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions::with_patterns(&DEFAULT_PATTERNS).expect("default patterns are valid")
    }
}

impl ScanOptions {
    pub fn all() -> ScanOptions {
        ScanOptions { patterns: None }
    }

    pub fn with_patterns<S: AsRef<str>>(patterns: &[S]) -> Result<ScanOptions, PatternError> {
        let patterns = patterns.iter().map(|p| Pattern::new(p.as_ref())).collect::<Result<_, _>>()?;
        Ok(ScanOptions { patterns: Some(patterns) })
    }

    pub fn accepts(&self, file_name: &str) -> bool {
        match &self.patterns {
            None => true,
            Some(ps) => ps.iter().any(|p| p.matches_with(file_name, MATCH)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScannedFile {
    /// Path relative to the scan root, `/`-separated.
    pub path: String,
    pub contents: Vec<u8>,
}

#[derive(Debug)]
pub enum ScanItem {
    File(ScannedFile),
    Unreadable { path: PathBuf, error: io::Error },
}

/// Walk `paths` in lexicographic order and yield every matching file.
///
/// Directories named `.git` are not entered. A path that is itself a file is
/// yielded when it matches, under its base name.
pub fn scan<'a>(paths: &'a [PathBuf], options: &'a ScanOptions) -> impl Iterator<Item = ScanItem> + 'a {
    paths.iter().flat_map(move |root| {
        WalkDir::new(root)
            .sort_by_file_name()
            .into_iter()
            .filter_entry(|e| !(e.file_type().is_dir() && e.file_name() == ".git"))
            .filter_map(move |entry| match entry {
                Err(err) => {
                    let path = err.path().map(Path::to_path_buf).unwrap_or_else(|| root.clone());
                    Some(ScanItem::Unreadable { path, error: err.into() })
                }
                Ok(e) if !e.file_type().is_file() => None,
                Ok(e) => {
                    let name = e.file_name().to_string_lossy();
                    if !options.accepts(&name) {
                        return None;
                    }
                    let rel = relative(root, e.path());
                    Some(match fs::read(e.path()) {
                        Ok(contents) => ScanItem::File(ScannedFile { path: rel, contents }),
                        Err(error) => ScanItem::Unreadable { path: e.path().to_path_buf(), error },
                    })
                }
            })
    })
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = match path.strip_prefix(root) {
        Ok(r) if !r.as_os_str().is_empty() => r,
        _ => Path::new(path.file_name().unwrap_or(path.as_os_str())),
    };
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}
