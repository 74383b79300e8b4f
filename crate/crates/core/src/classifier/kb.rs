//! Command knowledge used by the practice predicates.
//!
//! Every list is a plain-text data file so it can be swapped without
//! recompiling. Bundled copies are compiled in; [`KnowledgeBase::load_dir`]
//! replaces any file present in the given directory and keeps the bundled
//! version of the rest.

use glob::Pattern;
use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const KNOWN_COMMANDS: &str = "known_commands.txt";
pub const SUBCOMMAND_COMMANDS: &str = "subcommand_commands.txt";
pub const COLOR_FLAGS: &str = "color_flags.tsv";
pub const COLOR_TWINS: &str = "color_twins.tsv";
pub const COLOR_ENV: &str = "color_env.txt";
pub const COLORIZER_TOOLS: &str = "colorizer_tools.txt";
pub const TLDS: &str = "tlds.txt";
pub const LOCATION_EXCLUSIONS: &str = "location_exclusions.txt";
pub const REMOTE_NAMES: &str = "remote_names.txt";

const BUNDLED: &[(&str, &str)] = &[
    (KNOWN_COMMANDS, include_str!("../../data/known_commands.txt")),
    (SUBCOMMAND_COMMANDS, include_str!("../../data/subcommand_commands.txt")),
    (COLOR_FLAGS, include_str!("../../data/color_flags.tsv")),
    (COLOR_TWINS, include_str!("../../data/color_twins.tsv")),
    (COLOR_ENV, include_str!("../../data/color_env.txt")),
    (COLORIZER_TOOLS, include_str!("../../data/colorizer_tools.txt")),
    (TLDS, include_str!("../../data/tlds.txt")),
    (LOCATION_EXCLUSIONS, include_str!("../../data/location_exclusions.txt")),
    (REMOTE_NAMES, include_str!("../../data/remote_names.txt")),
];

#[derive(Debug, Error)]
pub enum KbError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}:{line}: expected `command<TAB>value`")]
    BadMapLine { file: String, line: usize },
    #[error("{file}:{line}: invalid pattern {pattern:?}: {message}")]
    BadPattern { file: String, line: usize, pattern: String, message: String },
    #[error("{0} is empty")]
    Empty(String),
}

/// A colorizing argument pattern; negated patterns turn color off.
#[derive(Debug, Clone)]
pub struct FlagPattern {
    pub pattern: Pattern,
    pub negated: bool,
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub known_commands: HashSet<String>,
    pub subcommand_commands: HashSet<String>,
    /// Command name (or `*` for any command) to argument patterns.
    pub color_flags: HashMap<String, Vec<FlagPattern>>,
    /// Command name to its colorized replacements.
    pub color_twins: HashMap<String, HashSet<String>>,
    pub color_env: Vec<Pattern>,
    pub colorizer_tools: HashSet<String>,
    /// Lower-case top-level domains.
    pub tld_set: HashSet<String>,
    pub location_exclusions: HashSet<String>,
    pub remote_names: HashSet<String>,
}

impl KnowledgeBase {
    /// The compiled-in data set.
    pub fn bundled() -> KnowledgeBase {
        Self::from_sources(|name| Ok(bundled_text(name).to_string())).expect("bundled knowledge base is valid")
    }

    /// Load from `dir`, falling back to the bundled copy for missing files.
    pub fn load_dir(dir: &Path) -> Result<KnowledgeBase, KbError> {
        Self::from_sources(|name| {
            let path = dir.join(name);
            match fs::read_to_string(&path) {
                Ok(text) => Ok(text),
                Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(bundled_text(name).to_string()),
                Err(source) => Err(KbError::Io { path, source }),
            }
        })
    }

    fn from_sources(mut read: impl FnMut(&str) -> Result<String, KbError>) -> Result<KnowledgeBase, KbError> {
        let set = |name: &str, text: &str| -> Result<HashSet<String>, KbError> {
            let s: HashSet<String> = list_lines(text).map(|(_, l)| l.to_string()).collect();
            if s.is_empty() {
                return Err(KbError::Empty(name.to_string()));
            }
            Ok(s)
        };

        let mut known_commands = set(KNOWN_COMMANDS, &read(KNOWN_COMMANDS)?)?;
        let subcommand_commands = set(SUBCOMMAND_COMMANDS, &read(SUBCOMMAND_COMMANDS)?)?;
        // keep the subset relation even for user-supplied lists
        known_commands.extend(subcommand_commands.iter().cloned());

        let mut color_flags: HashMap<String, Vec<FlagPattern>> = HashMap::new();
        for (line, cmd, pat) in map_lines(COLOR_FLAGS, &read(COLOR_FLAGS)?)? {
            let (negated, raw) = match pat.strip_prefix('!') {
                Some(rest) => (true, rest),
                None => (false, pat),
            };
            let pattern = compile(COLOR_FLAGS, line, raw)?;
            color_flags.entry(cmd.to_string()).or_default().push(FlagPattern { pattern, negated });
        }
        if color_flags.is_empty() {
            return Err(KbError::Empty(COLOR_FLAGS.to_string()));
        }

        let mut color_twins: HashMap<String, HashSet<String>> = HashMap::new();
        for (_, cmd, twin) in map_lines(COLOR_TWINS, &read(COLOR_TWINS)?)? {
            color_twins.entry(cmd.to_string()).or_default().insert(twin.to_string());
        }
        if color_twins.is_empty() {
            return Err(KbError::Empty(COLOR_TWINS.to_string()));
        }

        let env_text = read(COLOR_ENV)?;
        let color_env = list_lines(&env_text)
            .map(|(line, p)| compile(COLOR_ENV, line, p))
            .collect::<Result<Vec<_>, _>>()?;
        if color_env.is_empty() {
            return Err(KbError::Empty(COLOR_ENV.to_string()));
        }

        let tld_set = set(TLDS, &read(TLDS)?)?.into_iter().map(|t| t.to_ascii_lowercase()).collect();

        Ok(KnowledgeBase {
            known_commands,
            subcommand_commands,
            color_flags,
            color_twins,
            color_env,
            colorizer_tools: set(COLORIZER_TOOLS, &read(COLORIZER_TOOLS)?)?,
            tld_set,
            location_exclusions: set(LOCATION_EXCLUSIONS, &read(LOCATION_EXCLUSIONS)?)?,
            remote_names: set(REMOTE_NAMES, &read(REMOTE_NAMES)?)?,
        })
    }

    pub fn is_known_command(&self, name: &str) -> bool {
        self.known_commands.contains(name)
    }

    pub fn takes_subcommands(&self, name: &str) -> bool {
        self.subcommand_commands.contains(name)
    }

    /// Whether `arg` turns on color for `command`; returns the matching pattern.
    pub fn color_flag(&self, command: &str, arg: &str) -> Option<&str> {
        let candidates = || {
            self.color_flags
                .get(command)
                .into_iter()
                .chain(self.color_flags.get("*"))
                .flatten()
        };
        if candidates().any(|p| p.negated && p.pattern.matches(arg)) {
            return None;
        }
        candidates().find(|p| !p.negated && p.pattern.matches(arg)).map(|p| p.pattern.as_str())
    }

    pub fn is_color_env(&self, var: &str) -> bool {
        self.color_env.iter().any(|p| p.matches(var))
    }

    pub fn is_color_twin(&self, command: &str, replacement: &str) -> bool {
        self.color_twins.get(command).is_some_and(|t| t.contains(replacement))
    }
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        KnowledgeBase::bundled()
    }
}

/// The bundled text of one data file, for writing out an editable copy.
pub fn bundled_text(name: &str) -> &'static str {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).unwrap_or("")
}

pub fn bundled_files() -> impl Iterator<Item = (&'static str, &'static str)> {
    BUNDLED.iter().copied()
}

fn list_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn map_lines<'a>(file: &str, text: &'a str) -> Result<Vec<(usize, &'a str, &'a str)>, KbError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let (cmd, val) = l
                .split_once('\t')
                .ok_or_else(|| KbError::BadMapLine { file: file.to_string(), line: i + 1 })?;
            Ok((i + 1, cmd.trim(), val.trim()))
        })
        .collect()
}

fn compile(file: &str, line: usize, raw: &str) -> Result<Pattern, KbError> {
    Pattern::new(raw).map_err(|e| KbError::BadPattern {
        file: file.to_string(),
        line,
        pattern: raw.to_string(),
        message: e.msg.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sets_are_non_empty() {
        let kb = KnowledgeBase::bundled();
        assert!(kb.known_commands.len() > 200);
        assert!(!kb.subcommand_commands.is_empty());
        assert!(!kb.colorizer_tools.is_empty());
        assert!(kb.tld_set.len() > 1000);
        assert!(!kb.location_exclusions.is_empty());
        assert!(!kb.color_env.is_empty());
    }

    #[test]
    fn bundled_subcommand_list_is_a_subset_without_help() {
        let known: HashSet<String> =
            list_lines(bundled_text(KNOWN_COMMANDS)).map(|(_, l)| l.to_string()).collect();
        for cmd in list_lines(bundled_text(SUBCOMMAND_COMMANDS)).map(|(_, l)| l) {
            assert!(known.contains(cmd), "{cmd} missing from known commands");
        }
    }

    #[test]
    fn color_flags_honour_negation_and_scope() {
        let kb = KnowledgeBase::bundled();
        assert_eq!(kb.color_flag("grep", "--color=auto"), Some("--color=*"));
        assert_eq!(kb.color_flag("grep", "--color=never"), None);
        assert!(kb.color_flag("ls", "-G").is_some());
        assert!(kb.color_flag("ls", "-lG").is_some());
        assert!(kb.color_flag("grep", "-G").is_none());
        assert!(kb.color_flag("less", "-R").is_some());
        assert!(kb.color_flag("mv", "-i").is_none());
    }

    #[test]
    fn env_and_twins() {
        let kb = KnowledgeBase::bundled();
        assert!(kb.is_color_env("TERM"));
        assert!(kb.is_color_env("LESS_TERMCAP_md"));
        assert!(!kb.is_color_env("EDITOR"));
        assert!(kb.is_color_twin("diff", "colordiff"));
        assert!(!kb.is_color_twin("colordiff", "diff"));
    }

    #[test]
    fn load_dir_overrides_only_present_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(SUBCOMMAND_COMMANDS), "mytool\n").unwrap();
        let kb = KnowledgeBase::load_dir(dir.path()).unwrap();
        assert!(kb.takes_subcommands("mytool"));
        assert!(!kb.takes_subcommands("git"));
        // subset relation is restored
        assert!(kb.is_known_command("mytool"));
        assert!(kb.tld_set.contains("nl"));
    }

    #[test]
    fn empty_or_broken_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(COLORIZER_TOOLS), "# nothing\n").unwrap();
        assert!(matches!(KnowledgeBase::load_dir(dir.path()), Err(KbError::Empty(_))));
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(COLOR_TWINS), "diff colordiff\n").unwrap();
        assert!(matches!(KnowledgeBase::load_dir(dir.path()), Err(KbError::BadMapLine { line: 1, .. })));
    }
}
