use std::collections::BTreeMap;

use super::{percent, ranked, Cell, Partition, StatTable};
use crate::corpus::CorpusStore;

const TOP_COLUMNS: [&str; 4] = ["rank", "token", "count", "percent"];

fn top_table(items: Vec<&str>, k: usize) -> StatTable {
    let total = items.len() as u64;
    let mut t = StatTable::new(&TOP_COLUMNS, Partition::Whole);
    for (i, (token, count)) in ranked(items).into_iter().take(k).enumerate() {
        t.push(vec![
            Cell::Int(i as u64 + 1),
            Cell::Text(token.to_string()),
            Cell::Int(count),
            Cell::Percent(percent(count, total)),
        ]);
    }
    t
}

/// Most common alias names, as a share of all aliases.
pub fn top_names(store: &CorpusStore, k: usize) -> StatTable {
    top_table(store.aliases.iter().map(|a| a.name.as_str()).collect(), k)
}

/// Most common command words, as a share of all command occurrences.
pub fn top_commands(store: &CorpusStore, k: usize) -> StatTable {
    top_table(store.commands.iter().map(|c| c.name.as_str()).collect(), k)
}

/// Most common argument tokens, as a share of all argument occurrences.
pub fn top_arguments(store: &CorpusStore, k: usize) -> StatTable {
    top_table(store.arguments.iter().map(|a| a.text.as_str()).collect(), k)
}

/// For one command: its most common exact argument sequences, each with
/// the alias names that most often stand for it.
///
/// `percent` is the share of the command's occurrences using that argument
/// sequence; the `aliases` column lists `name (share)` within the sequence.
pub fn command_breakdown(store: &CorpusStore, command: &str, k_args: usize, k_aliases: usize) -> StatTable {
    // argument sequence -> alias name -> count
    let mut combos: BTreeMap<String, BTreeMap<&str, u64>> = BTreeMap::new();
    let mut total = 0u64;
    for view in store.alias_views() {
        for cmd in view.commands.iter().filter(|c| c.name == command) {
            let args: Vec<&str> = view.arguments(cmd).iter().map(|a| a.text.as_str()).collect();
            *combos.entry(args.join(" ")).or_default().entry(view.row.name.as_str()).or_default() += 1;
            total += 1;
        }
    }
    let mut ranked_combos: Vec<(String, u64, BTreeMap<&str, u64>)> = combos
        .into_iter()
        .map(|(args, names)| (args, names.values().sum(), names))
        .collect();
    ranked_combos.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut t = StatTable::new(&["command", "arguments", "count", "percent", "aliases"], Partition::Whole);
    for (args, count, names) in ranked_combos.into_iter().take(k_args) {
        let mut names: Vec<(&str, u64)> = names.into_iter().collect();
        names.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let aliases: Vec<String> = names
            .iter()
            .take(k_aliases)
            .map(|(n, c)| format!("{n} ({:.2})", percent(*c, count)))
            .collect();
        t.push(vec![
            Cell::Text(command.to_string()),
            Cell::Text(args),
            Cell::Int(count),
            Cell::Percent(percent(count, total)),
            Cell::Text(aliases.join(", ")),
        ]);
    }
    t
}
