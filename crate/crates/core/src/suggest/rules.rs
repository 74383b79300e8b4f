use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use crate::classifier::{is_subcommand_chain, KnowledgeBase};
use crate::corpus::{AliasView, CorpusStore};
use crate::parser::{render_commands, ParsedCommand, Separator};

pub const DEFAULT_MIN_SUPPORT: f64 = 0.8;
pub const DEFAULT_MIN_COUNT: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SudoRule {
    /// Fraction of occurrences written with `sudo`.
    pub support: f64,
    pub sudo_count: u64,
    pub total: u64,
}

/// A chain of invocations that preceded a subcommand in the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precedent {
    /// The commands run before, rendered with their separators, e.g.
    /// `brew update &&`.
    pub before: String,
    pub count: u64,
}

/// Rules mined from a corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSet {
    pub min_support: f64,
    pub min_count: u64,
    /// `(command, Some(first argument))`, or `(command, None)` over all
    /// occurrences of the command.
    pub sudo_rules: BTreeMap<(String, Option<String>), SudoRule>,
    /// command -> token -> occurrences as the first argument.
    pub order_rules: BTreeMap<String, BTreeMap<String, u64>>,
    /// `(command, subcommand)` -> precedents, most frequent first.
    pub chain_rules: BTreeMap<(String, String), Vec<Precedent>>,
    /// Command words and alias names with their occurrence counts.
    pub typo_index: BTreeMap<String, u64>,
}

impl RuleSet {
    pub fn is_empty(&self) -> bool {
        self.sudo_rules.is_empty() && self.order_rules.is_empty() && self.chain_rules.is_empty() && self.typo_index.is_empty()
    }

    pub fn sudo_rule(&self, command: &str, first_arg: Option<&str>) -> Option<&SudoRule> {
        first_arg
            .and_then(|a| self.sudo_rules.get(&(command.to_string(), Some(a.to_string()))))
            .or_else(|| self.sudo_rules.get(&(command.to_string(), None)))
    }
}

/// Mine a rule set from the store.
///
/// Sudo rules keep `(command, first argument)` pairs, and commands as a
/// whole, seen at least `min_count` times with `sudo` in at least
/// `min_support` of them. Order rules count non-flag first arguments.
/// Chain rules come from aliases that chain subcommands of one command:
/// each invocation after the first is keyed by its `(command, subcommand)`
/// and remembers what ran before it.
pub fn build_rules(store: &CorpusStore, kb: &KnowledgeBase, min_support: f64, min_count: u64) -> RuleSet {
    let mut sudo_counts: BTreeMap<(String, Option<String>), (u64, u64)> = BTreeMap::new();
    let mut order_rules: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut chains: BTreeMap<(String, String), BTreeMap<String, u64>> = BTreeMap::new();
    let mut typo_index: BTreeMap<String, u64> = BTreeMap::new();

    for view in store.alias_views() {
        *typo_index.entry(view.row.name.clone()).or_default() += 1;
        for cmd in view.commands {
            *typo_index.entry(cmd.name.clone()).or_default() += 1;
            let first = view.arguments(cmd).first().map(|a| a.text.clone());
            let mut keys = vec![(cmd.name.clone(), None)];
            if first.is_some() {
                keys.push((cmd.name.clone(), first.clone()));
            }
            for key in keys {
                let e = sudo_counts.entry(key).or_default();
                e.1 += 1;
                e.0 += cmd.sudo as u64;
            }
            if let Some(tok) = first.filter(|t| !t.starts_with('-')) {
                *order_rules.entry(cmd.name.clone()).or_default().entry(tok).or_default() += 1;
            }
        }
        collect_chains(&view, kb, &mut chains);
    }

    let sudo_rules = sudo_counts
        .into_iter()
        .filter_map(|(key, (sudo, total))| {
            let support = sudo as f64 / total as f64;
            (support >= min_support && total >= min_count && sudo > 0).then_some((
                key,
                SudoRule { support, sudo_count: sudo, total },
            ))
        })
        .collect();
    let chain_rules = chains
        .into_iter()
        .map(|(key, befores)| {
            let mut v: Vec<Precedent> = befores.into_iter().map(|(before, count)| Precedent { before, count }).collect();
            v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.before.cmp(&b.before)));
            (key, v)
        })
        .collect();
    RuleSet { min_support, min_count, sudo_rules, order_rules, chain_rules, typo_index }
}

fn collect_chains(view: &AliasView, kb: &KnowledgeBase, chains: &mut BTreeMap<(String, String), BTreeMap<String, u64>>) {
    let def = view.to_definition();
    if is_subcommand_chain(&def, kb).is_none() {
        return;
    }
    let cmds = &def.commands;
    let mut start = 0;
    while start < cmds.len() {
        // maximal run of one command joined by && or ;
        let mut end = start;
        while end + 1 < cmds.len()
            && cmds[end + 1].name == cmds[start].name
            && matches!(cmds[end].separator_after, Separator::And | Separator::Seq)
        {
            end += 1;
        }
        if end > start && kb.takes_subcommands(&cmds[start].name) {
            for j in start + 1..=end {
                let Some(sub) = cmds[j].first_argument().filter(|s| !s.starts_with('-')) else {
                    continue;
                };
                let before: Vec<ParsedCommand> = cmds[start..j].to_vec();
                chains
                    .entry((cmds[j].name.clone(), sub.to_string()))
                    .or_default()
                    .entry(render_commands(&before))
                    .and_modify(|c| *c += 1)
                    .or_insert(1);
            }
        }
        start = end + 1;
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
enum RuleRecord {
    Meta { min_support: f64, min_count: u64 },
    Sudo { command: String, first_arg: Option<String>, support: f64, sudo_count: u64, total: u64 },
    Order { command: String, token: String, count: u64 },
    Chain { command: String, subcommand: String, before: String, count: u64 },
    Typo { token: String, count: u64 },
}

impl RuleSet {
    /// One JSON object per line, tagged by `rule`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<usize> {
        let mut n = 0;
        let mut put = |r: RuleRecord| -> io::Result<()> {
            serde_json::to_writer(&mut out, &r)?;
            out.write_all(b"\n")?;
            n += 1;
            Ok(())
        };
        put(RuleRecord::Meta { min_support: self.min_support, min_count: self.min_count })?;
        for ((command, first_arg), r) in &self.sudo_rules {
            put(RuleRecord::Sudo {
                command: command.clone(),
                first_arg: first_arg.clone(),
                support: r.support,
                sudo_count: r.sudo_count,
                total: r.total,
            })?;
        }
        for (command, tokens) in &self.order_rules {
            for (token, count) in tokens {
                put(RuleRecord::Order { command: command.clone(), token: token.clone(), count: *count })?;
            }
        }
        for ((command, subcommand), precedents) in &self.chain_rules {
            for p in precedents {
                put(RuleRecord::Chain {
                    command: command.clone(),
                    subcommand: subcommand.clone(),
                    before: p.before.clone(),
                    count: p.count,
                })?;
            }
        }
        for (token, count) in &self.typo_index {
            put(RuleRecord::Typo { token: token.clone(), count: *count })?;
        }
        Ok(n - 1)
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<RuleSet> {
        let mut rules = RuleSet::default();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: RuleRecord = serde_json::from_str(&line)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
            match rec {
                RuleRecord::Meta { min_support, min_count } => {
                    rules.min_support = min_support;
                    rules.min_count = min_count;
                }
                RuleRecord::Sudo { command, first_arg, support, sudo_count, total } => {
                    rules.sudo_rules.insert((command, first_arg), SudoRule { support, sudo_count, total });
                }
                RuleRecord::Order { command, token, count } => {
                    rules.order_rules.entry(command).or_default().insert(token, count);
                }
                RuleRecord::Chain { command, subcommand, before, count } => {
                    rules.chain_rules.entry((command, subcommand)).or_default().push(Precedent { before, count });
                }
                RuleRecord::Typo { token, count } => {
                    rules.typo_index.insert(token, count);
                }
            }
        }
        for v in rules.chain_rules.values_mut() {
            v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.before.cmp(&b.before)));
        }
        Ok(rules)
    }
}
