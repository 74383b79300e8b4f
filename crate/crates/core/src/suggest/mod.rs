//! Command-line fixes mined from the corpus.
//!
//! [`build_rules`] collects four kinds of evidence from a labeled store and
//! [`suggest`] applies them to a command line typed by a user.

mod rules;

use serde::Serialize;
use std::collections::HashSet;
use std::fmt;

use crate::classifier::{damerau_levenshtein, TYPO_THRESHOLD};
use crate::parser::{render_commands, tokenize_value, ParseError, ParsedCommand, Separator};

pub use rules::{build_rules, Precedent, RuleSet, SudoRule, DEFAULT_MIN_COUNT, DEFAULT_MIN_SUPPORT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    SudoPrefix,
    ArgOrder,
    Chain,
    Typo,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::SudoPrefix => "sudo-prefix",
            RuleKind::ArgOrder => "arg-order",
            RuleKind::Chain => "chain",
            RuleKind::Typo => "typo",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suggestion {
    pub replacement: String,
    pub rule: RuleKind,
    /// In `(0, 1]`.
    pub score: f64,
    /// Number of corpus occurrences backing the rule.
    pub evidence: u64,
    pub detail: String,
}

/// Up to `k` rewrites of `line`, best first.
///
/// Suggestions are ordered by score, then evidence, then replacement text.
/// Every replacement parses and differs from the input.
pub fn suggest(line: &str, rules: &RuleSet, k: usize) -> Result<Vec<Suggestion>, ParseError> {
    let commands = tokenize_value(line)?;
    let mut out = Vec::new();
    for i in 0..commands.len() {
        sudo_suggestions(&commands, i, rules, &mut out);
        order_suggestions(&commands, i, rules, &mut out);
        chain_suggestions(&commands, i, rules, &mut out);
        typo_suggestions(&commands, i, rules, &mut out);
    }
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| b.evidence.cmp(&a.evidence))
            .then_with(|| a.replacement.cmp(&b.replacement))
    });
    let original = render_commands(&commands);
    let mut seen = HashSet::new();
    out.retain(|s| {
        s.replacement != original
            && s.replacement != line.trim()
            && tokenize_value(&s.replacement).is_ok()
            && seen.insert(s.replacement.clone())
    });
    out.truncate(k);
    Ok(out)
}

fn with_command(commands: &[ParsedCommand], i: usize, cmd: ParsedCommand) -> String {
    let mut v = commands.to_vec();
    v[i] = cmd;
    render_commands(&v)
}

fn sudo_suggestions(commands: &[ParsedCommand], i: usize, rules: &RuleSet, out: &mut Vec<Suggestion>) {
    let cmd = &commands[i];
    if cmd.sudo {
        return;
    }
    let Some(rule) = rules.sudo_rule(&cmd.name, cmd.first_argument()) else {
        return;
    };
    let mut fixed = cmd.clone();
    fixed.sudo = true;
    out.push(Suggestion {
        replacement: with_command(commands, i, fixed),
        rule: RuleKind::SudoPrefix,
        score: rule.support,
        evidence: rule.sudo_count,
        detail: format!("{} of {} uses run with sudo", rule.sudo_count, rule.total),
    });
}

fn order_suggestions(commands: &[ParsedCommand], i: usize, rules: &RuleSet, out: &mut Vec<Suggestion>) {
    let cmd = &commands[i];
    let Some(firsts) = rules.order_rules.get(&cmd.name) else {
        return;
    };
    let Some(first) = cmd.first_argument() else {
        return;
    };
    let first_count = firsts.get(first).copied().unwrap_or(0);
    for (j, tok) in cmd.arguments.iter().enumerate().skip(1) {
        if tok.starts_with('-') {
            continue;
        }
        let count = firsts.get(tok).copied().unwrap_or(0);
        if count <= first_count {
            continue;
        }
        let mut fixed = cmd.clone();
        let moved = fixed.arguments.remove(j);
        fixed.arguments.insert(0, moved);
        out.push(Suggestion {
            replacement: with_command(commands, i, fixed),
            rule: RuleKind::ArgOrder,
            score: count as f64 / (count + first_count) as f64,
            evidence: count,
            detail: format!("`{} {tok}` seen {count} times, `{} {first}` {first_count}", cmd.name, cmd.name),
        });
    }
}

fn chain_suggestions(commands: &[ParsedCommand], i: usize, rules: &RuleSet, out: &mut Vec<Suggestion>) {
    let cmd = &commands[i];
    if i > 0 && !matches!(commands[i - 1].separator_after, Separator::And | Separator::Seq) {
        return;
    }
    let Some(sub) = cmd.first_argument() else {
        return;
    };
    let Some(precedents) = rules.chain_rules.get(&(cmd.name.clone(), sub.to_string())) else {
        return;
    };
    let head = render_commands(&commands[..i]);
    let tail = render_commands(&commands[i..]);
    let total: u64 = precedents.iter().map(|p| p.count).sum();
    for p in precedents {
        if head.ends_with(&p.before) {
            continue;
        }
        let replacement = if head.is_empty() { format!("{} {tail}", p.before) } else { format!("{head} {} {tail}", p.before) };
        out.push(Suggestion {
            replacement,
            rule: RuleKind::Chain,
            score: p.count as f64 / total as f64,
            evidence: p.count,
            detail: format!("{} of {total} chains ending in `{} {sub}`", p.count, cmd.name),
        });
    }
}

fn typo_suggestions(commands: &[ParsedCommand], i: usize, rules: &RuleSet, out: &mut Vec<Suggestion>) {
    let cmd = &commands[i];
    let word = cmd.name.as_str();
    if rules.typo_index.contains_key(word) {
        return;
    }
    let len = word.chars().count();
    for (known, &count) in &rules.typo_index {
        if known.chars().count().abs_diff(len) > TYPO_THRESHOLD {
            continue;
        }
        let d = damerau_levenshtein(word, known);
        if d == 0 || d > TYPO_THRESHOLD || d >= len {
            continue;
        }
        let mut fixed = cmd.clone();
        fixed.name = known.clone();
        out.push(Suggestion {
            replacement: with_command(commands, i, fixed),
            rule: RuleKind::Typo,
            score: 1.0 / (1.0 + d as f64),
            evidence: count,
            detail: format!("`{word}` is {d} edit{} from `{known}`", if d == 1 { "" } else { "s" }),
        });
    }
}
