use std::collections::{BTreeSet, HashMap, HashSet};

use super::{percent, ranked, Cell, Partition, StatTable};
use crate::classifier::PracticeKind;
use crate::corpus::CorpusStore;

/// Cells below this percentage are left empty.
const MIN_CELL_PERCENT: f64 = 1.0;

const MATRIX_COLUMNS: [&str; 12] = [
    "command",
    "aliases",
    "Nicknaming",
    "AbbreviatingSubcommands",
    "BookmarkingLocations",
    "SubstitutingCommands",
    "OverridingDefaults",
    "ColorizingOutput",
    "ElevatingPrivilege",
    "TransformingData",
    "ChainingSubcommands",
    "compression_median",
];

/// Count and share of aliases carrying each label. An alias may carry
/// several labels, so the shares overlap.
pub fn practice_summary(store: &CorpusStore) -> StatTable {
    let total = store.aliases.len() as u64;
    let mut counts: HashMap<PracticeKind, BTreeSet<u64>> = HashMap::new();
    let mut typos = BTreeSet::new();
    for l in &store.labels {
        counts.entry(l.label).or_default().insert(l.alias_ref);
        if l.typo_fix {
            typos.insert(l.alias_ref);
        }
    }
    let mut t = StatTable::new(&["practice", "aliases", "percent"], Partition::Overlapping);
    for kind in PracticeKind::ALL {
        let n = counts.get(&kind).map_or(0, |s| s.len() as u64);
        t.push(vec![Cell::Text(kind.name().to_string()), Cell::Int(n), Cell::Percent(percent(n, total))]);
    }
    let n = typos.len() as u64;
    t.push(vec![Cell::Text("Nicknaming (typo fix)".to_string()), Cell::Int(n), Cell::Percent(percent(n, total))]);
    t
}

/// For each command, the share of aliases involving it that carry each label.
///
/// An alias involves a command when it names it or uses it anywhere in its
/// value. Commands are `commands` in the given order, or else the `k` most
/// involved command words. Shares below 1% are left empty.
pub fn practice_matrix(store: &CorpusStore, commands: Option<&[String]>, k: usize) -> StatTable {
    let command_words: HashSet<&str> = store.commands.iter().map(|c| c.name.as_str()).collect();
    // command -> involved alias ids
    let mut involved: HashMap<&str, Vec<usize>> = HashMap::new();
    let views: Vec<_> = store.alias_views().collect();
    for (i, v) in views.iter().enumerate() {
        let mut names: BTreeSet<&str> = v.commands.iter().map(|c| c.name.as_str()).collect();
        if command_words.contains(v.row.name.as_str()) {
            names.insert(v.row.name.as_str());
        }
        for n in names {
            involved.entry(n).or_default().push(i);
        }
    }
    let selected: Vec<String> = match commands {
        Some(list) => list.to_vec(),
        None => ranked(involved.iter().flat_map(|(c, ids)| std::iter::repeat_n(*c, ids.len())))
            .into_iter()
            .take(k)
            .map(|(c, _)| c.to_string())
            .collect(),
    };

    let mut t = StatTable::new(&MATRIX_COLUMNS, Partition::Overlapping);
    for cmd in selected {
        let ids = involved.get(cmd.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if ids.is_empty() {
            continue;
        }
        let total = ids.len() as u64;
        let mut row = vec![Cell::Text(cmd.clone()), Cell::Int(total)];
        for kind in PracticeKind::ALL {
            let n = ids.iter().filter(|&&i| views[i].has_label(kind)).count() as u64;
            let p = percent(n, total);
            row.push(if p < MIN_CELL_PERCENT { Cell::Empty } else { Cell::Percent(p) });
        }
        let mut ratios: Vec<f64> = ids.iter().map(|&i| views[i].to_definition().compression_ratio()).collect();
        ratios.sort_by(f64::total_cmp);
        row.push(Cell::Float(median(&ratios)));
        t.push(row);
    }
    t
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::KnowledgeBase;
    use crate::corpus::{HashAlgorithm, SourceFile};

    fn store(src: &str) -> CorpusStore {
        let mut s = CorpusStore::new(HashAlgorithm::Sha1);
        s.ingest(vec![SourceFile { repo: None, path: ".bashrc".into(), contents: src.as_bytes().to_vec() }]);
        s.relabel(&KnowledgeBase::bundled());
        s
    }

    #[test]
    fn all_mv_overrides() {
        let s = store("alias mv='mv -i'\nalias mv='mv -i'\nalias mv='mv -i'\nalias mv='mv -i'\n");
        let t = practice_matrix(&s, None, 10);
        assert_eq!(t.rows.len(), 1);
        let row = &t.rows[0];
        assert_eq!(row[0], Cell::Text("mv".into()));
        assert_eq!(row[1], Cell::Int(4));
        assert_eq!(row[t.column("OverridingDefaults").unwrap()], Cell::Percent(100.0));
        assert_eq!(row[t.column("Nicknaming").unwrap()], Cell::Empty);
    }

    #[test]
    fn involvement_includes_redefinitions() {
        let s = store("alias vim=nvim\nalias v=vim\nalias e='vim ~/.vimrc'\n");
        let t = practice_matrix(&s, Some(&["vim".to_string(), "absent".to_string()]), 10);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][1], Cell::Int(3));
        let sub = t.column("SubstitutingCommands").unwrap();
        assert_eq!(t.rows[0][sub].as_percent().map(|p| (p * 100.0).round()), Some(3333.0));
    }

    #[test]
    fn unlabeled_store_is_empty() {
        let s = CorpusStore::default();
        assert!(practice_matrix(&s, None, 10).rows.is_empty());
        let t = practice_summary(&s);
        assert!(t.rows.iter().all(|r| r[1] == Cell::Int(0)));
    }

    #[test]
    fn summary_counts() {
        let s = store("alias gs='git status'\nalias got=git\nalias ls='ls --color=auto'\n");
        let t = practice_summary(&s);
        let get = |name: &str| t.rows.iter().find(|r| r[0] == Cell::Text(name.into())).unwrap()[1].clone();
        assert_eq!(get("AbbreviatingSubcommands"), Cell::Int(1));
        assert_eq!(get("Nicknaming"), Cell::Int(1));
        assert_eq!(get("Nicknaming (typo fix)"), Cell::Int(1));
        assert_eq!(get("ColorizingOutput"), Cell::Int(1));
    }
}
