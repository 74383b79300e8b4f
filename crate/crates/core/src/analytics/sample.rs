use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap, HashSet};

use super::{ranked, Cell, Partition, StatTable};
use crate::corpus::CorpusStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOptions {
    pub n_cmds: usize,
    pub n_args: usize,
    pub n_aliases: usize,
    pub long_tail: usize,
    pub seed: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { n_cmds: 50, n_args: 10, n_aliases: 3, long_tail: 200, seed: 0 }
    }
}

/// Aliases for manual coding: the top alias names for the top argument
/// sequences of the top commands, plus a seeded uniform sample of aliases
/// whose exact `(name, value)` occurs only once.
///
/// Each alias appears at most once. The seed is repeated on every row.
pub fn representative_sample(store: &CorpusStore, opts: SampleOptions) -> StatTable {
    // command -> argument sequence -> alias name -> (count, first alias index)
    type Names<'a> = BTreeMap<&'a str, (u64, usize)>;
    let mut usage: HashMap<&str, BTreeMap<String, Names>> = HashMap::new();
    let views: Vec<_> = store.alias_views().collect();
    for (i, v) in views.iter().enumerate() {
        for c in v.commands {
            let args: Vec<&str> = v.arguments(c).iter().map(|a| a.text.as_str()).collect();
            let e = usage
                .entry(c.name.as_str())
                .or_default()
                .entry(args.join(" "))
                .or_default()
                .entry(v.row.name.as_str())
                .or_insert((0, i));
            e.0 += 1;
        }
    }

    let mut t = StatTable::new(
        &["source", "alias_id", "name", "value", "command", "arguments", "count", "seed"],
        Partition::Overlapping,
    );
    let mut taken = HashSet::new();
    let commands = ranked(store.commands.iter().map(|c| c.name.as_str()));
    for (cmd, _) in commands.into_iter().take(opts.n_cmds) {
        let combos = &usage[cmd];
        let mut by_count: Vec<(&String, u64)> =
            combos.iter().map(|(args, names)| (args, names.values().map(|n| n.0).sum())).collect();
        by_count.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (args, _) in by_count.into_iter().take(opts.n_args) {
            let mut names: Vec<(&str, (u64, usize))> = combos[args].iter().map(|(n, c)| (*n, *c)).collect();
            names.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then_with(|| a.0.cmp(b.0)));
            for (_, (count, i)) in names.into_iter().take(opts.n_aliases) {
                if taken.insert(i) {
                    let v = &views[i];
                    t.push(vec![
                        Cell::Text("top".into()),
                        Cell::Int(v.row.id),
                        Cell::Text(v.row.name.clone()),
                        Cell::Text(v.row.value.clone()),
                        Cell::Text(cmd.to_string()),
                        Cell::Text(args.clone()),
                        Cell::Int(count),
                        Cell::Int(opts.seed),
                    ]);
                }
            }
        }
    }

    let mut pair_counts: HashMap<(&str, &str), u64> = HashMap::new();
    for v in &views {
        *pair_counts.entry((v.row.name.as_str(), v.row.value.as_str())).or_default() += 1;
    }
    let unique: Vec<usize> = (0..views.len())
        .filter(|&i| !taken.contains(&i) && pair_counts[&(views[i].row.name.as_str(), views[i].row.value.as_str())] == 1)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let amount = opts.long_tail.min(unique.len());
    let mut picked: Vec<usize> = index::sample(&mut rng, unique.len(), amount).into_iter().map(|j| unique[j]).collect();
    picked.sort_unstable();
    for i in picked {
        let v = &views[i];
        t.push(vec![
            Cell::Text("long-tail".into()),
            Cell::Int(v.row.id),
            Cell::Text(v.row.name.clone()),
            Cell::Text(v.row.value.clone()),
            Cell::Text(v.commands.first().map(|c| c.name.clone()).unwrap_or_default()),
            Cell::Text(String::new()),
            Cell::Int(1),
            Cell::Int(opts.seed),
        ]);
    }
    t
}
