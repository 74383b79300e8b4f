use glob::{MatchOptions, Pattern};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use super::{percent, Cell, Partition, StatTable};
use crate::corpus::{CorpusStore, DEFAULT_PATTERNS};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

const MATCH: MatchOptions = MatchOptions {
    case_sensitive: false,
    require_literal_separator: false,
    require_literal_leading_dot: false,
};

#[derive(Debug, Clone)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn bundled() -> Stopwords {
        Stopwords::parse(BUNDLED_STOPWORDS)
    }

    pub fn load(path: &Path) -> io::Result<Stopwords> {
        Ok(Stopwords::parse(&fs::read_to_string(path)?))
    }

    pub fn parse(text: &str) -> Stopwords {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::bundled()
    }
}

/// Lower-cased words of a description, punctuation and stop words removed.
pub fn tokenize_description(text: &str, stopwords: &Stopwords) -> BTreeSet<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !stopwords.contains(w))
        .map(str::to_string)
        .collect()
}

/// Files that define aliases, bucketed by the first matching name pattern.
///
/// Buckets are exclusive and an `other` row takes the rest, so both percent
/// columns sum to 100.
pub fn file_patterns(store: &CorpusStore) -> StatTable {
    let patterns: Vec<Pattern> = DEFAULT_PATTERNS.iter().map(|p| Pattern::new(p).expect("valid pattern")).collect();
    let mut per_file: HashMap<crate::parser::FileId, u64> = HashMap::new();
    for a in &store.aliases {
        *per_file.entry(a.file).or_default() += 1;
    }
    let n_buckets = patterns.len() + 1;
    let mut files = vec![0u64; n_buckets];
    let mut aliases = vec![0u64; n_buckets];
    for f in &store.files {
        let Some(&n) = per_file.get(&f.id) else { continue };
        let b = patterns.iter().position(|p| p.matches_with(&f.name, MATCH)).unwrap_or(patterns.len());
        files[b] += 1;
        aliases[b] += n;
    }
    let total_files: u64 = files.iter().sum();
    let total_aliases: u64 = aliases.iter().sum();
    let mut t = StatTable::new(&["pattern", "files", "files_percent", "aliases", "aliases_percent"], Partition::Whole);
    let names = DEFAULT_PATTERNS.iter().copied().chain(["other"]);
    for (b, name) in names.enumerate() {
        t.push(vec![
            Cell::Text(name.to_string()),
            Cell::Int(files[b]),
            Cell::Percent(percent(files[b], total_files)),
            Cell::Int(aliases[b]),
            Cell::Percent(percent(aliases[b], total_aliases)),
        ]);
    }
    t
}

/// Most common description words over repositories that define aliases,
/// with the aliases contributed by repositories mentioning each word.
pub fn description_words(store: &CorpusStore, stopwords: &Stopwords, k: usize) -> StatTable {
    let mut per_repo: HashMap<u64, u64> = HashMap::new();
    for a in &store.aliases {
        if let Some(repo) = store.file(a.file).and_then(|f| f.repo_id) {
            *per_repo.entry(repo).or_default() += 1;
        }
    }
    let mut words: HashMap<String, (u64, u64)> = HashMap::new();
    for r in store.repos.iter().filter(|r| per_repo.contains_key(&r.id)) {
        for w in tokenize_description(&r.description, stopwords) {
            let e = words.entry(w).or_default();
            e.0 += 1;
            e.1 += per_repo[&r.id];
        }
    }
    let total_repos = per_repo.len() as u64;
    let total_aliases = store.aliases.len() as u64;
    let mut ranked: Vec<(String, (u64, u64))> = words.into_iter().collect();
    ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then_with(|| a.0.cmp(&b.0)));
    let mut t = StatTable::new(&["word", "repos", "repos_percent", "aliases", "aliases_percent"], Partition::Overlapping);
    for (w, (repos, aliases)) in ranked.into_iter().take(k) {
        t.push(vec![
            Cell::Text(w),
            Cell::Int(repos),
            Cell::Percent(percent(repos, total_repos)),
            Cell::Int(aliases),
            Cell::Percent(percent(aliases, total_aliases)),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{HashAlgorithm, SourceFileRecord};

    fn rec(repo: &str, desc: &str, path: &str, body: &str) -> SourceFileRecord {
        SourceFileRecord {
            repo: Some(repo.into()),
            description: Some(desc.into()),
            stars: None,
            path: path.into(),
            size: None,
            contents: body.into(),
        }
    }

    #[test]
    fn description_tokens() {
        let sw = Stopwords::bundled();
        let words: Vec<String> = tokenize_description("My dotfiles", &sw).into_iter().collect();
        assert_eq!(words, ["dotfiles", "my"]);
        let words = tokenize_description("The config files, for Linux & zsh!", &sw);
        assert_eq!(words.into_iter().collect::<Vec<_>>(), ["config", "files", "linux", "zsh"]);
    }

    #[test]
    fn file_buckets() {
        let mut s = CorpusStore::new(HashAlgorithm::Sha1);
        s.ingest(vec![
            rec("a/x", "", "home/.zshrc", "alias a=b\nalias c=d\n"),
            rec("a/x", "", "git.plugin.zsh", "alias g=git\n"),
            rec("a/x", "", "bash_aliases", "alias e=f\n"),
            rec("a/x", "", "misc.sh", "alias h=i\n"),
            rec("a/x", "", "README", "no aliases here\n"),
        ]);
        let t = file_patterns(&s);
        assert_eq!(
            t.to_csv_string(),
            "pattern,files,files_percent,aliases,aliases_percent\n\
             *alias*,1,25.00,1,20.00\n\
             *bashrc*,0,0.00,0,0.00\n\
             *zshrc*,1,25.00,2,40.00\n\
             *profile*,0,0.00,0,0.00\n\
             git*,1,25.00,1,20.00\n\
             other,1,25.00,1,20.00\n"
        );
        assert!(t.percent_violations(0.01).is_empty());
    }

    #[test]
    fn words_count_repos_and_aliases() {
        let mut s = CorpusStore::new(HashAlgorithm::Sha1);
        s.ingest(vec![
            rec("a/dots", "My dotfiles", ".bashrc", "alias a=b\nalias c=d\n"),
            rec("b/dots", "dotfiles for my mac", ".zshrc", "alias e=f\n"),
            rec("c/empty", "my nothing", ".profile", "echo hi\n"),
        ]);
        let t = description_words(&s, &Stopwords::bundled(), 10);
        assert_eq!(
            t.to_csv_string(),
            "word,repos,repos_percent,aliases,aliases_percent\n\
             dotfiles,2,100.00,3,100.00\n\
             my,2,100.00,3,100.00\n\
             mac,1,50.00,1,33.33\n"
        );
        assert!(description_words(&CorpusStore::default(), &Stopwords::bundled(), 10).rows.is_empty());
    }
}
