use std::collections::{BTreeMap, HashSet};

use super::{percent, ranked, Cell, Partition, StatTable};
use crate::corpus::CorpusStore;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Number of commands in the pipelines considered.
    pub length: usize,
    /// Drop edges carrying less than this fraction of their source's
    /// outgoing weight at that position.
    pub min_share: f64,
    /// Keep only the most frequent command shapes.
    pub top_shapes: Option<usize>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { length: 3, min_share: 0.10, top_shapes: Some(250) }
    }
}

/// Edges between consecutive positions of pure pipelines of one length.
///
/// A pipeline is an alias of exactly `length` commands joined only by `|`
/// or `|&`. Each row is `(position, source, target, weight, share)` where
/// `share` is the percentage of the source's outgoing weight at that
/// position. Before filtering, the weights at each position sum to the
/// number of pipelines.
pub fn pipeline_flows(store: &CorpusStore, options: FlowOptions) -> StatTable {
    let n = options.length.max(2);
    let shapes: Vec<Vec<&str>> = store
        .alias_views()
        .filter(|v| v.commands.len() == n && v.commands[..n - 1].iter().all(|c| c.separator_after.is_pipe()))
        .map(|v| v.commands.iter().map(|c| c.name.as_str()).collect())
        .collect();
    let keep: Option<HashSet<Vec<&str>>> = options
        .top_shapes
        .map(|k| ranked(shapes.iter().cloned()).into_iter().take(k).map(|(s, _)| s).collect());

    // (position, source) -> target -> weight
    let mut edges: BTreeMap<(usize, &str), BTreeMap<&str, u64>> = BTreeMap::new();
    for shape in shapes.iter().filter(|s| keep.as_ref().is_none_or(|k| k.contains(*s))) {
        for (i, pair) in shape.windows(2).enumerate() {
            *edges.entry((i, pair[0])).or_default().entry(pair[1]).or_default() += 1;
        }
    }

    let mut t = StatTable::new(&["position", "source", "target", "weight", "share"], Partition::GroupedBy(&[0, 1]));
    for ((pos, source), targets) in edges {
        let out: u64 = targets.values().sum();
        let mut targets: Vec<(&str, u64)> = targets.into_iter().collect();
        targets.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (target, w) in targets {
            if (w as f64) < options.min_share * out as f64 {
                continue;
            }
            t.push(vec![
                Cell::Int(pos as u64),
                Cell::Text(source.to_string()),
                Cell::Text(target.to_string()),
                Cell::Int(w),
                Cell::Percent(percent(w, out)),
            ]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{HashAlgorithm, SourceFile};

    fn store(src: &str) -> CorpusStore {
        let mut s = CorpusStore::new(HashAlgorithm::Sha1);
        s.ingest(vec![SourceFile { repo: None, path: ".bashrc".into(), contents: src.as_bytes().to_vec() }]);
        s
    }

    fn all(length: usize) -> FlowOptions {
        FlowOptions { length, min_share: 0.0, top_shapes: None }
    }

    #[test]
    fn hand_counted_edges() {
        let s = store(
            "alias a='ps aux | sort -k3 | head'\nalias b='ps -ef | sort | head -5'\nalias c='ps | grep x'\nalias d='ps | sort; head'\n",
        );
        let t = pipeline_flows(&s, all(3));
        assert_eq!(
            t.to_csv_string(),
            "position,source,target,weight,share\n0,ps,sort,2,100.00\n1,sort,head,2,100.00\n"
        );
        let t = pipeline_flows(&s, all(2));
        assert_eq!(t.to_csv_string(), "position,source,target,weight,share\n0,ps,grep,1,100.00\n");
    }

    #[test]
    fn weights_per_position_sum_to_pipeline_count() {
        let s = store(
            "alias a='ls | grep x | wc -l'\nalias b='ls | sort | head'\nalias c='ps | grep y | wc'\nalias d='ls |& grep z | less'\n",
        );
        let t = pipeline_flows(&s, all(3));
        for pos in 0..2u64 {
            let sum: u64 = t
                .rows
                .iter()
                .filter(|r| r[0] == Cell::Int(pos))
                .map(|r| match r[3] {
                    Cell::Int(w) => w,
                    _ => 0,
                })
                .sum();
            assert_eq!(sum, 4);
        }
        assert!(t.percent_violations(0.01).is_empty());
    }

    #[test]
    fn min_share_filters_minor_edges() {
        let mut src = String::new();
        for i in 0..9 {
            src.push_str(&format!("alias a{i}='ps | grep p{i}'\n"));
        }
        src.push_str("alias z='ps | less'\n");
        let s = store(&src);
        let opts = FlowOptions { length: 2, min_share: 0.2, top_shapes: None };
        let t = pipeline_flows(&s, opts);
        assert_eq!(t.rows.len(), 1);
        assert!(pipeline_flows(&CorpusStore::default(), FlowOptions::default()).rows.is_empty());
    }
}
