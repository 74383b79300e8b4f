//! Customization-practice labels.
//!
//! Each practice is a mechanical predicate over a parsed alias and a
//! [`KnowledgeBase`]. The predicates are independent; [`classify`] returns
//! the union, ordered by [`PracticeKind`].

mod distance;
pub mod kb;
mod location;

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::LazyLock;

use crate::parser::{unquote, AliasDefinition, ParsedCommand, Separator};

pub use distance::damerau_levenshtein;
pub use kb::{KbError, KnowledgeBase};
pub use location::{is_location, location_verdict, Exclusion, LocationKind, LocationVerdict};

/// Highest edit distance at which a nickname counts as a typo fix.
pub const TYPO_THRESHOLD: usize = 2;

static SUBCOMMAND_SHAPE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[a-z][a-z0-9-]*$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PracticeKind {
    Nicknaming,
    AbbreviatingSubcommands,
    BookmarkingLocations,
    SubstitutingCommands,
    OverridingDefaults,
    ColorizingOutput,
    ElevatingPrivilege,
    TransformingData,
    ChainingSubcommands,
}

impl PracticeKind {
    pub const ALL: [PracticeKind; 9] = [
        PracticeKind::Nicknaming,
        PracticeKind::AbbreviatingSubcommands,
        PracticeKind::BookmarkingLocations,
        PracticeKind::SubstitutingCommands,
        PracticeKind::OverridingDefaults,
        PracticeKind::ColorizingOutput,
        PracticeKind::ElevatingPrivilege,
        PracticeKind::TransformingData,
        PracticeKind::ChainingSubcommands,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PracticeKind::Nicknaming => "Nicknaming",
            PracticeKind::AbbreviatingSubcommands => "AbbreviatingSubcommands",
            PracticeKind::BookmarkingLocations => "BookmarkingLocations",
            PracticeKind::SubstitutingCommands => "SubstitutingCommands",
            PracticeKind::OverridingDefaults => "OverridingDefaults",
            PracticeKind::ColorizingOutput => "ColorizingOutput",
            PracticeKind::ElevatingPrivilege => "ElevatingPrivilege",
            PracticeKind::TransformingData => "TransformingData",
            PracticeKind::ChainingSubcommands => "ChainingSubcommands",
        }
    }

    pub fn from_name(name: &str) -> Option<PracticeKind> {
        PracticeKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for PracticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PracticeLabel {
    pub kind: PracticeKind,
    /// The token or rule that triggered the label.
    pub evidence: String,
    /// Only ever set on nicknames.
    pub typo_fix: bool,
}

impl PracticeLabel {
    fn new(kind: PracticeKind, evidence: impl Into<String>) -> PracticeLabel {
        PracticeLabel { kind, evidence: evidence.into(), typo_fix: false }
    }
}

/// All labels that apply to `alias`, one per kind, in kind order.
pub fn classify(alias: &AliasDefinition, kb: &KnowledgeBase) -> Vec<PracticeLabel> {
    [
        is_nickname(alias, kb),
        is_subcommand_abbrev(alias, kb),
        is_bookmark(alias, kb),
        is_substitution(alias, kb),
        is_override(alias),
        is_colorizing(alias, kb),
        is_privilege_elevation(alias),
        is_transform_pipeline(alias),
        is_subcommand_chain(alias, kb),
    ]
    .into_iter()
    .flatten()
    .collect()
}

pub fn compression_ratio(alias: &AliasDefinition) -> f64 {
    alias.compression_ratio()
}

fn single_command(alias: &AliasDefinition) -> Option<&ParsedCommand> {
    match alias.commands.as_slice() {
        [only] => Some(only),
        _ => None,
    }
}

/// A new name for a command: one bare command whose name is not itself a
/// known command.
///
/// The nickname is a typo fix when it is within [`TYPO_THRESHOLD`] edits of
/// the command, closer than its own length, and not simply a prefix of it
/// (`g` for `git` is an abbreviation, `got` is a misspelling).
pub fn is_nickname(alias: &AliasDefinition, kb: &KnowledgeBase) -> Option<PracticeLabel> {
    let cmd = single_command(alias)?;
    if !cmd.arguments.is_empty() || !cmd.env_prefixes.is_empty() || cmd.sudo {
        return None;
    }
    if kb.is_known_command(&alias.name) {
        return None;
    }
    let distance = damerau_levenshtein(&alias.name, &cmd.name);
    let typo_fix = alias.name != cmd.name
        && distance <= TYPO_THRESHOLD
        && distance < alias.name.chars().count()
        && !cmd.name.starts_with(alias.name.as_str());
    let evidence = if typo_fix {
        format!("typo:{}:distance={distance}", cmd.name)
    } else {
        format!("command:{}", cmd.name)
    };
    Some(PracticeLabel { kind: PracticeKind::Nicknaming, evidence, typo_fix })
}

/// One command that takes subcommands, given exactly one subcommand-shaped argument.
pub fn is_subcommand_abbrev(alias: &AliasDefinition, kb: &KnowledgeBase) -> Option<PracticeLabel> {
    let cmd = single_command(alias)?;
    if !cmd.env_prefixes.is_empty() || !kb.takes_subcommands(&cmd.name) {
        return None;
    }
    match cmd.arguments.as_slice() {
        [sub] if SUBCOMMAND_SHAPE.is_match(sub) => Some(PracticeLabel::new(
            PracticeKind::AbbreviatingSubcommands,
            format!("{} {sub}", cmd.name),
        )),
        _ => None,
    }
}

/// Some argument or env-prefix value names a location.
///
/// Evidence is `arg:<kind>:<token>` or `env:<kind>:<assignment>` so the two
/// sources can be counted separately.
pub fn is_bookmark(alias: &AliasDefinition, kb: &KnowledgeBase) -> Option<PracticeLabel> {
    for cmd in &alias.commands {
        for arg in &cmd.arguments {
            if let LocationVerdict::Location(kind) = location_verdict(arg, Some(&cmd.name), kb) {
                return Some(PracticeLabel::new(
                    PracticeKind::BookmarkingLocations,
                    format!("arg:{}:{arg}", kind.name()),
                ));
            }
        }
    }
    for cmd in &alias.commands {
        for env in &cmd.env_prefixes {
            let value = env.split_once('=').map_or("", |(_, v)| v);
            if let LocationVerdict::Location(kind) = location_verdict(value, Some(&cmd.name), kb) {
                return Some(PracticeLabel::new(
                    PracticeKind::BookmarkingLocations,
                    format!("env:{}:{env}", kind.name()),
                ));
            }
        }
    }
    None
}

/// A known command name that is bound to something else entirely.
pub fn is_substitution(alias: &AliasDefinition, kb: &KnowledgeBase) -> Option<PracticeLabel> {
    if alias.commands.is_empty() || !kb.is_known_command(&alias.name) {
        return None;
    }
    if alias.commands.iter().any(|c| c.name == alias.name) {
        return None;
    }
    Some(PracticeLabel::new(
        PracticeKind::SubstitutingCommands,
        format!("{}->{}", alias.name, alias.commands[0].name),
    ))
}

/// The alias name is used as a command in the value, which changes it.
pub fn is_override(alias: &AliasDefinition) -> Option<PracticeLabel> {
    let cmd = alias.commands.iter().find(|c| c.name == alias.name)?;
    let unchanged = alias.commands.len() == 1
        && cmd.arguments.is_empty()
        && cmd.env_prefixes.is_empty()
        && !cmd.sudo
        && cmd.separator_after == Separator::None;
    if unchanged {
        return None;
    }
    let evidence = if alias.commands.len() > 1 {
        "extended".to_string()
    } else if let Some(arg) = cmd.first_argument() {
        format!("arg:{arg}")
    } else if let Some(env) = cmd.env_prefixes.first() {
        format!("env:{env}")
    } else if cmd.sudo {
        "sudo".to_string()
    } else {
        format!("separator:{}", cmd.separator_after)
    };
    Some(PracticeLabel::new(PracticeKind::OverridingDefaults, evidence))
}

/// Color enabled by a flag, an environment variable, a colorizer tool or
/// a colorized replacement command.
pub fn is_colorizing(alias: &AliasDefinition, kb: &KnowledgeBase) -> Option<PracticeLabel> {
    let label = |e: String| Some(PracticeLabel::new(PracticeKind::ColorizingOutput, e));
    for cmd in &alias.commands {
        for arg in &cmd.arguments {
            let text = unquote(arg).unwrap_or_else(|_| arg.clone());
            if kb.color_flag(&cmd.name, &text).is_some() {
                return label(format!("flag:{} {text}", cmd.name));
            }
        }
    }
    for cmd in &alias.commands {
        for env in &cmd.env_prefixes {
            let var = env.split_once('=').map_or(env.as_str(), |(n, _)| n);
            if kb.is_color_env(var) {
                return label(format!("env:{var}"));
            }
        }
    }
    for cmd in &alias.commands {
        if kb.colorizer_tools.contains(&cmd.name) {
            return label(format!("tool:{}", cmd.name));
        }
    }
    for cmd in &alias.commands {
        if kb.is_color_twin(&alias.name, &cmd.name) {
            return label(format!("twin:{}->{}", alias.name, cmd.name));
        }
    }
    None
}

pub fn is_privilege_elevation(alias: &AliasDefinition) -> Option<PracticeLabel> {
    let cmd = alias.commands.iter().find(|c| c.sudo)?;
    Some(PracticeLabel::new(PracticeKind::ElevatingPrivilege, format!("sudo {}", cmd.name)))
}

/// Two or more commands joined only by `|` or `|&`.
pub fn is_transform_pipeline(alias: &AliasDefinition) -> Option<PracticeLabel> {
    let n = alias.commands.len();
    if n < 2 {
        return None;
    }
    if !alias.commands[..n - 1].iter().all(|c| c.separator_after.is_pipe()) {
        return None;
    }
    let shape: Vec<&str> = alias.commands.iter().map(|c| c.name.as_str()).collect();
    Some(PracticeLabel::new(PracticeKind::TransformingData, shape.join("|")))
}

/// The same subcommand-taking command invoked at least twice in a row with
/// a subcommand, joined by `&&` or `;`.
pub fn is_subcommand_chain(alias: &AliasDefinition, kb: &KnowledgeBase) -> Option<PracticeLabel> {
    let cmds = &alias.commands;
    let qualifies = |c: &ParsedCommand| {
        kb.takes_subcommands(&c.name) && c.first_argument().is_some_and(|a| !a.starts_with('-'))
    };
    for (i, first) in cmds.iter().enumerate() {
        if !qualifies(first) {
            continue;
        }
        let next = cmds[i + 1..].iter().position(|c| c.name == first.name).map(|p| i + 1 + p);
        let Some(j) = next else {
            continue;
        };
        let joined = cmds[i..j].iter().all(|c| matches!(c.separator_after, Separator::And | Separator::Seq));
        if joined && qualifies(&cmds[j]) {
            let subs = [&cmds[i], &cmds[j]].map(|c| c.first_argument().unwrap_or_default().to_string());
            return Some(PracticeLabel::new(
                PracticeKind::ChainingSubcommands,
                format!("{} {} -> {}", first.name, subs[0], subs[1]),
            ));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn def(name: &str, value: &str) -> AliasDefinition {
        AliasDefinition::new(name, value).unwrap()
    }

    fn kinds(name: &str, value: &str) -> Vec<PracticeKind> {
        classify(&def(name, value), &KnowledgeBase::bundled()).into_iter().map(|l| l.kind).collect()
    }

    use PracticeKind::*;

    #[test]
    fn headline_examples() {
        assert_eq!(kinds("gs", "git status"), [AbbreviatingSubcommands]);
        assert_eq!(kinds("df", "df -h"), [OverridingDefaults]);
        assert_eq!(
            kinds("update", "sudo apt-get update && sudo apt-get upgrade"),
            [ElevatingPrivilege, ChainingSubcommands]
        );
    }

    #[test]
    fn nicknames_and_typos() {
        let kb = KnowledgeBase::bundled();
        let g = is_nickname(&def("g", "git"), &kb).unwrap();
        assert!(!g.typo_fix);
        let got = is_nickname(&def("got", "git"), &kb).unwrap();
        assert!(got.typo_fix);
        assert!(is_nickname(&def("grpe", "grep"), &kb).unwrap().typo_fix);
        assert!(is_nickname(&def("Jupyter", "jupyter"), &kb).unwrap().typo_fix);
        assert!(!is_nickname(&def("v", "vim"), &kb).unwrap().typo_fix);
        assert!(!is_nickname(&def("gi", "git"), &kb).unwrap().typo_fix);
        assert!(is_nickname(&def("ll", "ls -l"), &kb).is_none());
        assert!(is_nickname(&def("s", "sudo su"), &kb).is_none());
        assert!(is_nickname(&def("more", "less"), &kb).is_none());
    }

    #[test]
    fn subcommand_abbreviations() {
        let kb = KnowledgeBase::bundled();
        assert!(is_subcommand_abbrev(&def("gd", "git diff"), &kb).is_some());
        assert!(is_subcommand_abbrev(&def("gcm", "git commit -m"), &kb).is_none());
        assert!(is_subcommand_abbrev(&def("x", "ls status"), &kb).is_none());
        assert!(is_subcommand_abbrev(&def("gv", "git --version"), &kb).is_none());
        assert!(is_subcommand_abbrev(&def("agi", "sudo apt-get install"), &kb).is_some());
    }

    #[test]
    fn bookmarks() {
        let kb = KnowledgeBase::bundled();
        let onoz = is_bookmark(&def("onoz", "cat /var/log/errors.log"), &kb).unwrap();
        assert_eq!(onoz.evidence, "arg:path:/var/log/errors.log");
        assert!(is_bookmark(&def("gm", "git merge origin/master"), &kb).is_none());
        assert!(is_bookmark(&def("c", "clear"), &kb).is_none());
        assert!(is_bookmark(&def("up", "cd ../.."), &kb).is_none());
        assert!(is_bookmark(&def("q", "ls >/dev/null"), &kb).is_none());
        let env = is_bookmark(&def("p", "PYTHONPATH=/opt/lib python"), &kb).unwrap();
        assert!(env.evidence.starts_with("env:"));
    }

    #[test]
    fn substitution_and_override_are_disjoint() {
        assert_eq!(kinds("more", "less"), [SubstitutingCommands]);
        assert_eq!(kinds("vi", "vim"), [SubstitutingCommands]);
        assert_eq!(kinds("grep", "grep --color=auto"), [OverridingDefaults, ColorizingOutput]);
        assert_eq!(kinds("ls", "ls -G"), [OverridingDefaults, ColorizingOutput]);
        assert_eq!(kinds("mount", "mount | column -t"), [OverridingDefaults, TransformingData]);
        assert!(kinds("ls", "ls").is_empty());
    }

    #[test]
    fn colorizing_mechanisms() {
        let kb = KnowledgeBase::bundled();
        let ev = |n: &str, v: &str| is_colorizing(&def(n, v), &kb).map(|l| l.evidence);
        assert_eq!(ev("grep", "grep --color=auto").as_deref(), Some("flag:grep --color=auto"));
        assert_eq!(ev("ssh", "TERM=xterm256color ssh").as_deref(), Some("env:TERM"));
        assert_eq!(ev("lc", "ls -l | grcat conf.ls").as_deref(), Some("tool:grcat"));
        assert_eq!(ev("diff", "colordiff").as_deref(), Some("twin:diff->colordiff"));
        assert_eq!(ev("gr", "grep --color=never"), None);
        assert_eq!(ev("mv", "mv -i"), None);
    }

    #[test]
    fn elevation_quantifies_over_all_commands() {
        assert_eq!(kinds("agi", "sudo apt-get install"), [AbbreviatingSubcommands, ElevatingPrivilege]);
        assert!(kinds("k", "ps aux | sudo tee /tmp/x").contains(&ElevatingPrivilege));
        assert!(kinds("s", "sudo").is_empty() || !kinds("s", "sudo").contains(&ElevatingPrivilege));
    }

    #[test]
    fn pipelines() {
        assert_eq!(kinds("ducks", "du -cksh * | sort -hr | head -n 15"), [TransformingData]);
        assert!(!kinds("gitpull", "git stash && git pull && git stash pop").contains(&TransformingData));
        assert!(!kinds("l", "ls -l").contains(&TransformingData));
        assert!(kinds("e", "dmesg |& less").contains(&TransformingData));
    }

    #[test]
    fn chains() {
        assert_eq!(kinds("brewup", "brew update && brew upgrade"), [ChainingSubcommands]);
        assert_eq!(kinds("whoops", "git reset --hard && git clean -df"), [ChainingSubcommands]);
        assert_eq!(kinds("bup", "brew update; brew upgrade"), [ChainingSubcommands]);
        assert!(kinds("x", "ls; ls").is_empty());
        assert!(!kinds("y", "git pull || git fetch").contains(&ChainingSubcommands));
        assert!(!kinds("z", "git --version && git -h").contains(&ChainingSubcommands));
    }

    #[test]
    fn compression() {
        assert_eq!(compression_ratio(&def("gs", "git status")), 5.0);
        assert_eq!(compression_ratio(&def("ab", "ab")), 1.0);
        assert_eq!(compression_ratio(&def("longname", "x")), 0.125);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PracticeKind::ALL {
            assert_eq!(PracticeKind::from_name(k.name()), Some(k));
        }
    }
}
