use super::{percent, Cell, Partition, StatTable};
use crate::corpus::CorpusStore;

pub const DEFAULT_BINS_PER_DECADE: u32 = 4;

/// Decades shown when there is no positive ratio to place.
const DEFAULT_DECADES: (i32, i32) = (-1, 2);

/// Log-spaced histogram of compression ratios (value length / name length).
///
/// Bins are `[10^(k/b), 10^((k+1)/b))` for `b` bins per decade, aligned to
/// whole decades and always spanning the ratio 1. Ratios of zero (empty
/// values) are counted separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionHistogram {
    pub bins_per_decade: u32,
    /// Index `k` of the first bin.
    pub first_bin: i32,
    pub counts: Vec<u64>,
    pub zero_count: u64,
}

impl CompressionHistogram {
    pub fn from_ratios(ratios: &[f64], bins_per_decade: u32) -> CompressionHistogram {
        let b = bins_per_decade.max(1);
        let positive: Vec<f64> = ratios.iter().copied().filter(|r| *r > 0.0).collect();
        let (lo_dec, hi_dec) = if positive.is_empty() {
            DEFAULT_DECADES
        } else {
            let min = positive.iter().copied().fold(f64::INFINITY, f64::min);
            let max = positive.iter().copied().fold(0.0, f64::max);
            let lo = (min.log10().floor() as i32).min(0);
            let mut hi = (max.log10().floor() as i32 + 1).max(1);
            if max >= 10f64.powi(hi) {
                hi += 1;
            }
            (lo, hi)
        };
        let first_bin = lo_dec * b as i32;
        let n_bins = ((hi_dec - lo_dec) * b as i32) as usize;
        let mut h = CompressionHistogram {
            bins_per_decade: b,
            first_bin,
            counts: vec![0; n_bins],
            zero_count: (ratios.len() - positive.len()) as u64,
        };
        for r in positive {
            let i = h.bin_of(r);
            h.counts[i] += 1;
        }
        h
    }

    pub fn edge(&self, k: i32) -> f64 {
        10f64.powf(k as f64 / self.bins_per_decade as f64)
    }

    /// Lower and upper edge of bin `i`.
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        let k = self.first_bin + i as i32;
        (self.edge(k), self.edge(k + 1))
    }

    fn bin_of(&self, r: f64) -> usize {
        let guess = (r.log10() * self.bins_per_decade as f64).floor() as i32 - self.first_bin;
        let mut i = guess.clamp(0, self.counts.len() as i32 - 1) as usize;
        // correct floating-point error at the edges
        while i > 0 && r < self.bounds(i).0 {
            i -= 1;
        }
        while i + 1 < self.counts.len() && r >= self.bounds(i).1 {
            i += 1;
        }
        i
    }

    pub fn total(&self) -> u64 {
        self.zero_count + self.counts.iter().sum::<u64>()
    }

    /// Median estimated from the bins: the geometric midpoint of the bin
    /// holding the middle element, averaged over both middle elements when
    /// the count is even.
    pub fn approx_median(&self) -> Option<f64> {
        let n = self.total();
        if n == 0 {
            return None;
        }
        let lower = self.value_at_rank((n - 1) / 2);
        let upper = self.value_at_rank(n / 2);
        Some((lower + upper) / 2.0)
    }

    fn value_at_rank(&self, rank: u64) -> f64 {
        if rank < self.zero_count {
            return 0.0;
        }
        let mut seen = self.zero_count;
        for (i, c) in self.counts.iter().enumerate() {
            seen += c;
            if rank < seen {
                let (lo, hi) = self.bounds(i);
                return (lo * hi).sqrt();
            }
        }
        unreachable!("rank below total")
    }

    /// Width of the bin containing `ratio` (0 for the zero bin).
    pub fn bin_width_at(&self, ratio: f64) -> f64 {
        if ratio <= 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.bounds(self.bin_of(ratio));
        hi - lo
    }

    pub fn to_table(&self) -> StatTable {
        let total = self.total();
        let mut t = StatTable::new(&["bin_lo", "bin_hi", "count", "percent", "ratio_one"], Partition::Whole);
        t.push(vec![
            Cell::Float(0.0),
            Cell::Float(0.0),
            Cell::Int(self.zero_count),
            Cell::Percent(percent(self.zero_count, total)),
            Cell::Bool(false),
        ]);
        for (i, &c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.bounds(i);
            t.push(vec![
                Cell::Float(lo),
                Cell::Float(hi),
                Cell::Int(c),
                Cell::Percent(percent(c, total)),
                Cell::Bool(lo <= 1.0 && 1.0 < hi),
            ]);
        }
        t
    }
}

/// Histogram over all aliases, or over aliases involving `command`.
pub fn compression_histogram(store: &CorpusStore, bins_per_decade: u32, command: Option<&str>) -> CompressionHistogram {
    let ratios: Vec<f64> = store
        .alias_views()
        .filter(|v| command.is_none_or(|c| v.row.name == c || v.commands.iter().any(|x| x.name == c)))
        .map(|v| v.to_definition().compression_ratio())
        .collect();
    CompressionHistogram::from_ratios(&ratios, bins_per_decade)
}
