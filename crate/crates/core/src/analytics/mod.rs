//! Aggregate statistics over a [`CorpusStore`](crate::corpus::CorpusStore).
//!
//! Every operation returns a [`StatTable`], which renders to CSV or JSONL.
//! Ranking ties are broken lexicographically so output is byte-stable.

mod compression;
mod flows;
mod frequency;
mod practices;
mod provenance;
mod sample;

use serde_json::{Map, Number, Value};
use std::collections::HashMap;
use std::hash::Hash;
use std::io::{self, Write};

pub use compression::{compression_histogram, CompressionHistogram, DEFAULT_BINS_PER_DECADE};
pub use flows::{pipeline_flows, FlowOptions};
pub use frequency::{command_breakdown, top_arguments, top_commands, top_names};
pub use practices::{practice_matrix, practice_summary};
pub use provenance::{description_words, file_patterns, tokenize_description, Stopwords};
pub use sample::{representative_sample, SampleOptions};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    /// Rendered with two decimals.
    Percent(f64),
    Float(f64),
    Bool(bool),
    /// Structured value: JSON in JSONL, compact JSON text in CSV.
    Json(Value),
    Empty,
}

impl Cell {
    /// The cell as written to CSV.
    pub fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Percent(p) => format!("{p:.2}"),
            Cell::Float(f) => format!("{f:.6}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Json(v) => v.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(n) => Value::from(*n),
            Cell::Percent(p) => number(round_to(*p, 2)),
            Cell::Float(f) => number(round_to(*f, 6)),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Json(v) => v.clone(),
            Cell::Empty => Value::Null,
        }
    }

    pub fn as_percent(&self) -> Option<f64> {
        match self {
            Cell::Percent(p) => Some(*p),
            _ => None,
        }
    }
}

fn number(f: f64) -> Value {
    Number::from_f64(f).map_or(Value::Null, Value::Number)
}

fn round_to(x: f64, places: i32) -> f64 {
    let m = 10f64.powi(places);
    (x * m).round() / m
}

/// How the percentage columns of a table relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    /// Rows are disjoint shares of one total; each percent column sums to at most 100.
    Whole,
    /// Shares of a per-group total; the group is identified by these columns.
    GroupedBy(&'static [usize]),
    /// Rows may overlap (one alias counted under several rows); only each
    /// cell is bounded by 100.
    Overlapping,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub partition: Partition,
}

impl StatTable {
    pub fn new(columns: &[&'static str], partition: Partition) -> StatTable {
        StatTable { columns: columns.to_vec(), rows: Vec::new(), partition }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(io::Error::other)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io::Error::other)?;
        }
        w.flush()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for row in &self.rows {
            let obj: Map<String, Value> =
                self.columns.iter().zip(row).map(|(c, cell)| (c.to_string(), cell.json())).collect();
            serde_json::to_writer(&mut out, &obj)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Check the percentage columns against [`Partition`], allowing `slack`
    /// percentage points of rounding per summed row. Returns the violations.
    pub fn percent_violations(&self, slack: f64) -> Vec<String> {
        let mut problems = Vec::new();
        let pct_cols: Vec<usize> = (0..self.columns.len())
            .filter(|&c| self.rows.iter().any(|r| r[c].as_percent().is_some()))
            .collect();
        for &c in &pct_cols {
            let mut sums: HashMap<String, (f64, usize)> = HashMap::new();
            for row in &self.rows {
                let Some(p) = row[c].as_percent() else { continue };
                if !(0.0..=100.0 + slack).contains(&p) {
                    problems.push(format!("{}: cell {p} outside [0, 100]", self.columns[c]));
                }
                let key = match self.partition {
                    Partition::Whole => String::new(),
                    Partition::GroupedBy(g) => g.iter().map(|&i| row[i].csv()).collect::<Vec<_>>().join("\u{1f}"),
                    Partition::Overlapping => continue,
                };
                let e = sums.entry(key).or_default();
                e.0 += p;
                e.1 += 1;
            }
            let mut keys: Vec<_> = sums.into_iter().collect();
            keys.sort_by(|a, b| a.0.cmp(&b.0));
            for (key, (sum, n)) in keys {
                if sum > 100.0 + slack * n as f64 {
                    problems.push(format!("{} sums to {sum:.4} over {n} rows (group {key:?})", self.columns[c]));
                }
            }
        }
        problems
    }
}

/// Percentage of `part` in `whole`, 0 when `whole` is 0.
pub(crate) fn percent(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Count occurrences and rank by count descending, then key ascending.
pub(crate) fn ranked<K: Ord + Hash + Clone>(items: impl IntoIterator<Item = K>) -> Vec<(K, u64)> {
    let mut counts: HashMap<K, u64> = HashMap::new();
    for k in items {
        *counts.entry(k).or_default() += 1;
    }
    let mut v: Vec<(K, u64)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}
