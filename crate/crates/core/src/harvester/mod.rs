//! Size-partitioned code-search sampling.
//!
//! Code search services cap how many results a single query can page
//! through. Splitting the population into file-size ranges and querying each
//! range in both sort orders retrieves up to twice the cap per range; ranges
//! whose reported population exceeds that are split until they fit.

mod clock;
mod github;
mod run;
mod simulated;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::corpus::SourceFileRecord;

pub use clock::{Clock, RateLimiter, SimulatedClock, SystemClock};
pub use github::{GithubBackend, DEFAULT_API_URL, TOKEN_VAR};
pub use run::{max_requests_in_window, Harvester, RequestLogEntry, RequestOutcome, RetryPolicy};
pub use simulated::{SimulatedBackend, SimulationConfig};

pub const DEFAULT_CAP: u64 = 1000;
pub const DEFAULT_STEP: u64 = 100;
pub const DEFAULT_RATE_PER_MIN: usize = 30;

/// Inclusive byte interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SizeRange {
    pub lo: u64,
    pub hi: u64,
}

impl SizeRange {
    pub fn new(lo: u64, hi: u64) -> SizeRange {
        assert!(lo <= hi, "empty size range {lo}..{hi}");
        SizeRange { lo, hi }
    }

    pub fn width(self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn contains(self, size: u64) -> bool {
        self.lo <= size && size <= self.hi
    }

    /// Halves, or `None` for a single byte.
    pub fn split(self) -> Option<(SizeRange, SizeRange)> {
        if self.lo == self.hi {
            return None;
        }
        let mid = self.lo + (self.hi - self.lo) / 2;
        Some((SizeRange::new(self.lo, mid), SizeRange::new(mid + 1, self.hi)))
    }
}

impl fmt::Display for SizeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    Newest,
    Oldest,
}

impl SortOrder {
    pub const BOTH: [SortOrder; 2] = [SortOrder::Newest, SortOrder::Oldest];

    pub fn name(self) -> &'static str {
        match self {
            SortOrder::Newest => "newest",
            SortOrder::Oldest => "oldest",
        }
    }
}

impl fmt::Display for SortOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SearchQuery {
    pub term: String,
    pub size: SizeRange,
}

impl SearchQuery {
    /// `<term> language:Shell size:<lo>..<hi>`
    pub fn query_string(&self) -> String {
        format!("{} language:Shell size:{}..{}", self.term, self.size.lo, self.size.hi)
    }
}

/// A file returned by a search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestedFile {
    pub repo: String,
    pub path: String,
    pub description: Option<String>,
    pub stars: Option<u64>,
    pub size: u64,
    pub contents: String,
}

impl HarvestedFile {
    /// Files are identified by repository and path.
    pub fn identity(&self) -> (&str, &str) {
        (&self.repo, &self.path)
    }
}

impl From<HarvestedFile> for SourceFileRecord {
    fn from(f: HarvestedFile) -> Self {
        SourceFileRecord {
            repo: Some(f.repo),
            description: f.description,
            stars: f.stars,
            path: f.path,
            size: Some(f.size),
            contents: f.contents,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchPage {
    pub total_count: u64,
    pub items: Vec<HarvestedFile>,
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    /// Worth retrying: rate limiting, timeouts, server errors.
    #[error("transient backend failure: {0}")]
    Transient(String),
    #[error("page {page} is beyond the result cap")]
    PageOutOfRange { page: u64 },
    #[error("backend failure: {0}")]
    Fatal(String),
}

/// A code search service.
pub trait SearchBackend {
    /// Results per page.
    fn page_size(&self) -> u64;
    /// Results reachable through paging for one query and order.
    fn cap(&self) -> u64;
    /// One page (1-based) of results. Pages past `cap / page_size` fail with
    /// [`BackendError::PageOutOfRange`].
    fn search(&mut self, query: &SearchQuery, order: SortOrder, page: u64) -> Result<SearchPage, BackendError>;
}

impl<B: SearchBackend + ?Sized> SearchBackend for Box<B> {
    fn page_size(&self) -> u64 {
        (**self).page_size()
    }
    fn cap(&self) -> u64 {
        (**self).cap()
    }
    fn search(&mut self, query: &SearchQuery, order: SortOrder, page: u64) -> Result<SearchPage, BackendError> {
        (**self).search(query, order, page)
    }
}

/// Queries to run: disjoint ascending size ranges covering `1..=max_size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestPlan {
    pub term: String,
    pub ranges: Vec<SizeRange>,
    pub cap_per_order: u64,
    pub max_size: u64,
    /// Single-byte ranges known to hold more than can be retrieved.
    #[serde(default)]
    pub unsamplable: BTreeSet<SizeRange>,
}

impl HarvestPlan {
    pub fn query(&self, range: SizeRange) -> SearchQuery {
        SearchQuery { term: self.term.clone(), size: range }
    }

    /// Split threshold used by default: what both sort orders can retrieve.
    pub fn default_threshold(&self) -> u64 {
        2 * self.cap_per_order
    }

    /// Problems with range layout, empty when the plan is well formed.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut expect = 1;
        for r in &self.ranges {
            if r.lo > r.hi {
                problems.push(format!("range {r} is inverted"));
            }
            if r.lo != expect {
                problems.push(format!("range {r} should start at {expect}"));
            }
            expect = r.hi + 1;
        }
        if expect != self.max_size + 1 {
            problems.push(format!("ranges end at {} instead of {}", expect - 1, self.max_size));
        }
        problems
    }
}

/// Uniform ranges of `step` bytes from 1 to `max_size`; the last may be
/// shorter.
pub fn plan(term: &str, max_size: u64, step: u64) -> HarvestPlan {
    let max_size = max_size.max(1);
    let step = step.max(1);
    let mut ranges = Vec::new();
    let mut lo = 1;
    while lo <= max_size {
        let hi = (lo + step - 1).min(max_size);
        ranges.push(SizeRange::new(lo, hi));
        lo = hi + 1;
    }
    HarvestPlan { term: term.to_string(), ranges, cap_per_order: DEFAULT_CAP, max_size, unsamplable: BTreeSet::new() }
}

/// Split every range whose reported population exceeds `threshold` in two.
/// Single-byte ranges over the threshold stay and are flagged unsamplable.
/// Ranges without a count are kept.
pub fn refine(plan: &HarvestPlan, counts: &BTreeMap<SizeRange, u64>, threshold: u64) -> HarvestPlan {
    let mut out = HarvestPlan { ranges: Vec::with_capacity(plan.ranges.len()), ..plan.clone() };
    for &r in &plan.ranges {
        match counts.get(&r) {
            Some(&n) if n > threshold => match r.split() {
                Some((a, b)) => out.ranges.extend([a, b]),
                None => {
                    out.ranges.push(r);
                    out.unsamplable.insert(r);
                }
            },
            _ => out.ranges.push(r),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "status", content = "reason")]
pub enum RangeStatus {
    Complete,
    /// More files than both sort orders reach.
    Truncated,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RangeReport {
    pub range: SizeRange,
    /// Population reported by the backend.
    pub total_count: Option<u64>,
    pub retrieved: u64,
    pub requests: u64,
    pub unsamplable: bool,
    #[serde(flatten)]
    pub status: RangeStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarvestReport {
    pub retrieved: u64,
    pub estimated_population: u64,
    /// `retrieved / estimated_population`, clamped to `[0, 1]`.
    pub coverage: f64,
    /// More files were retrieved than the backend reported.
    pub over_count: bool,
    pub requests: u64,
    pub ranges: Vec<RangeReport>,
}

impl HarvestReport {
    pub fn from_ranges(ranges: Vec<RangeReport>, requests: u64) -> HarvestReport {
        let retrieved = ranges.iter().map(|r| r.retrieved).sum();
        let estimated_population = ranges.iter().filter_map(|r| r.total_count).sum();
        let (coverage, over_count) = match estimated_population {
            // nothing to miss
            0 => (1.0, retrieved > 0),
            n => {
                let c = retrieved as f64 / n as f64;
                (c.min(1.0), c > 1.0)
            }
        };
        HarvestReport { retrieved, estimated_population, coverage, over_count, requests, ranges }
    }

    pub fn counts(&self) -> BTreeMap<SizeRange, u64> {
        self.ranges.iter().filter_map(|r| Some((r.range, r.total_count?))).collect()
    }

    pub fn failed(&self) -> impl Iterator<Item = &RangeReport> {
        self.ranges.iter().filter(|r| matches!(r.status, RangeStatus::Failed(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Simulated,
    Github,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "simulated" | "sim" => Ok(BackendKind::Simulated),
            "github" => Ok(BackendKind::Github),
            _ => Err(format!("unknown backend `{s}` (expected simulated or github)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(p: &HarvestPlan) -> Vec<(u64, u64)> {
        p.ranges.iter().map(|r| (r.lo, r.hi)).collect()
    }

    #[test]
    fn uniform_plans() {
        let p = plan("alias", 300, 100);
        assert_eq!(bounds(&p), [(1, 100), (101, 200), (201, 300)]);
        assert_eq!(p.query(p.ranges[1]).query_string(), "alias language:Shell size:101..200");
        assert_eq!(bounds(&plan("alias", 1, 100)), [(1, 1)]);
        assert_eq!(bounds(&plan("alias", 4, 1)), [(1, 1), (2, 2), (3, 3), (4, 4)]);
        assert_eq!(bounds(&plan("alias", 250, 100)), [(1, 100), (101, 200), (201, 250)]);
        for p in [plan("a", 29_000, 100), plan("a", 7, 3), plan("a", 1, 1)] {
            assert!(p.check().is_empty(), "{:?}", p.check());
        }
    }

    #[test]
    fn refine_splits_only_dense_ranges() {
        let p = plan("alias", 300, 100);
        let counts = BTreeMap::from([(p.ranges[0], 5000), (p.ranges[1], 2000), (p.ranges[2], 10)]);
        let r = refine(&p, &counts, p.default_threshold());
        assert_eq!(bounds(&r), [(1, 50), (51, 100), (101, 200), (201, 300)]);
        assert!(r.check().is_empty());
        let calm = BTreeMap::from([(p.ranges[0], 1999), (p.ranges[1], 2000)]);
        assert_eq!(refine(&p, &calm, 2000), p);
    }

    #[test]
    fn single_byte_ranges_are_flagged() {
        let p = plan("alias", 3, 1);
        let r = refine(&p, &BTreeMap::from([(SizeRange::new(2, 2), 9999)]), 2000);
        assert_eq!(r.ranges, p.ranges);
        assert_eq!(r.unsamplable, BTreeSet::from([SizeRange::new(2, 2)]));
    }

    #[test]
    fn report_clamps_coverage() {
        let rr = |total, retrieved| RangeReport {
            range: SizeRange::new(1, 1),
            total_count: Some(total),
            retrieved,
            requests: 1,
            unsamplable: false,
            status: RangeStatus::Complete,
        };
        let r = HarvestReport::from_ranges(vec![rr(10, 5), rr(10, 10)], 2);
        assert_eq!((r.retrieved, r.estimated_population), (15, 20));
        assert!((r.coverage - 0.75).abs() < 1e-12 && !r.over_count);
        let r = HarvestReport::from_ranges(vec![rr(10, 12)], 1);
        assert_eq!(r.coverage, 1.0);
        assert!(r.over_count);
    }
}
