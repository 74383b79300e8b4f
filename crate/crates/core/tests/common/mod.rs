#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use alias_census::analytics::{self, FlowOptions, SampleOptions, StatTable, Stopwords};
use alias_census::corpus::{HashAlgorithm, RepoMeta, SourceFile};
use alias_census::parser::parse_alias_statement;
use alias_census::{CorpusStore, KnowledgeBase, PracticeKind};

const LABELED_FIXTURE: &str = include_str!("../fixtures/labeled_aliases.tsv");

/// One fixture line: the statement and its hand labels, each with the
/// typo-fix flag.
#[derive(Debug, Clone)]
pub struct Labeled {
    pub statement: String,
    pub labels: Vec<(PracticeKind, bool)>,
}

pub fn labeled_fixture() -> Vec<Labeled> {
    LABELED_FIXTURE
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|line| {
            let (statement, labels) = line.split_once('\t').expect("tab-separated fixture line");
            let labels = if labels == "-" {
                Vec::new()
            } else {
                labels
                    .split(',')
                    .map(|l| {
                        let (name, typo) = match l.strip_suffix("+typo") {
                            Some(n) => (n, true),
                            None => (l, false),
                        };
                        let kind = PracticeKind::from_name(name).unwrap_or_else(|| panic!("unknown label {name}"));
                        (kind, typo)
                    })
                    .collect()
            };
            Labeled { statement: statement.to_string(), labels }
        })
        .collect()
}

pub fn file(path: &str, contents: &str) -> SourceFile {
    SourceFile { repo: None, path: path.to_string(), contents: contents.as_bytes().to_vec() }
}

/// A labeled store holding every fixture statement in one file.
pub fn fixture_store() -> CorpusStore {
    let text: String = labeled_fixture().iter().map(|l| format!("{}\n", l.statement)).collect();
    let mut store = CorpusStore::new(HashAlgorithm::Sha1);
    store.ingest([file("dotfiles/.bash_aliases", &text)]);
    store.relabel(&KnowledgeBase::bundled());
    store
}

const EXTRA_ZSHRC: &str = "\
alias agi='sudo apt-get install'
alias agu='sudo apt-get update && sudo apt-get upgrade'
alias gs='git status'
alias ports='netstat -tulpn | grep LISTEN'
alias psg='ps aux | grep -v grep | grep -i'
alias ..='cd ..'
export PATH=$HOME/bin:$PATH
";

/// The labeled fixture plus a second repository, with descriptions.
pub fn rich_store() -> CorpusStore {
    let text: String = labeled_fixture().iter().map(|l| format!("{}\n", l.statement)).collect();
    let repo = |name: &str, description: &str| {
        Some(RepoMeta { full_name: name.to_string(), description: description.to_string(), stars: 3 })
    };
    let mut store = CorpusStore::new(HashAlgorithm::Sha1);
    store.ingest([
        SourceFile {
            repo: repo("alice/dotfiles", "My dotfiles for bash and vim"),
            ..file("bash/.bash_aliases", &text)
        },
        SourceFile { repo: repo("bob/config", "Personal zsh configuration"), ..file(".zshrc", EXTRA_ZSHRC) },
    ]);
    store.relabel(&KnowledgeBase::bundled());
    store
}

/// Every analytics table with fixed options.
pub fn all_tables(store: &CorpusStore, seed: u64) -> Vec<(&'static str, StatTable)> {
    vec![
        ("top-names", analytics::top_names(store, 20)),
        ("top-commands", analytics::top_commands(store, 20)),
        ("top-arguments", analytics::top_arguments(store, 20)),
        ("breakdown", analytics::command_breakdown(store, "git", 10, 3)),
        ("compression", analytics::compression_histogram(store, 4, None).to_table()),
        ("flows", analytics::pipeline_flows(store, FlowOptions { min_share: 0.0, ..FlowOptions::default() })),
        ("provenance-files", analytics::file_patterns(store)),
        ("provenance-words", analytics::description_words(store, &Stopwords::bundled(), 20)),
        ("practices", analytics::practice_matrix(store, None, 20)),
        ("practice-summary", analytics::practice_summary(store)),
        ("sample", analytics::representative_sample(store, SampleOptions { long_tail: 5, seed, ..SampleOptions::default() })),
    ]
}

/// Parse a generated statement and compare it with what the generator built
/// and with the oracle's operator count and normalization.
pub fn check_statement(s: &gen::GenStatement) -> Result<(), String> {
    let defs = parse_alias_statement(&s.text).map_err(|e| format!("{e}: {}", s.text))?;
    let fail = |what: &str| Err(format!("{what}: {}", s.text));
    let [def] = defs.as_slice() else {
        return fail("expected one definition");
    };
    if def.name != s.name || def.value != s.value {
        return fail("name or value changed");
    }
    if def.commands != s.expected() {
        return fail("decomposition differs");
    }
    let (seps, trailing) = oracle::separator_count(&s.value).ok_or("oracle rejected the value")?;
    if trailing != s.trailing() || def.commands.len() != seps + 1 - usize::from(trailing) {
        return fail("command count differs from separator count");
    }
    let reassembled = def.reassemble();
    if Some(&reassembled) != oracle::normalize(&s.value).as_ref() || reassembled != s.canonical() {
        return fail("reassembly differs from normalized value");
    }
    Ok(())
}
