use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Duration;

use super::{
    refine, BackendError, Clock, HarvestPlan, HarvestReport, HarvestedFile, RangeReport, RangeStatus, RateLimiter,
    SearchBackend, SearchPage, SearchQuery, SizeRange, SortOrder,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 4, base_delay: Duration::from_secs(2), max_delay: Duration::from_secs(64) }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (0-based).
    pub fn delay(&self, attempt: u32) -> Duration {
        self.base_delay.saturating_mul(1 << attempt.min(16)).min(self.max_delay)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "detail")]
pub enum RequestOutcome {
    Ok { total_count: u64, items: u64 },
    Transient(String),
    OutOfRange,
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RequestLogEntry {
    /// Dispatch time since the harvester's clock started.
    #[serde(serialize_with = "as_secs")]
    pub at: Duration,
    pub range: SizeRange,
    pub order: SortOrder,
    pub page: u64,
    pub outcome: RequestOutcome,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Largest number of logged dispatches inside any half-open window.
pub fn max_requests_in_window(log: &[RequestLogEntry], window: Duration) -> usize {
    let mut times: Vec<Duration> = log.iter().map(|e| e.at).collect();
    times.sort_unstable();
    let mut best = 0;
    let mut start = 0;
    for end in 0..times.len() {
        while times[start] + window <= times[end] {
            start += 1;
        }
        best = best.max(end - start + 1);
    }
    best
}

/// Runs plans against a backend through one rate-limited dispatch queue.
pub struct Harvester<B, C> {
    backend: B,
    clock: C,
    limiter: RateLimiter,
    retry: RetryPolicy,
    log: Vec<RequestLogEntry>,
    /// First newest-order page of each surveyed range, reused by execute.
    first_pages: HashMap<SearchQuery, SearchPage>,
}

impl<B: SearchBackend, C: Clock> Harvester<B, C> {
    pub fn new(backend: B, clock: C, rate_per_min: usize) -> Self {
        Harvester {
            backend,
            clock,
            limiter: RateLimiter::per_minute(rate_per_min),
            retry: RetryPolicy::default(),
            log: Vec::new(),
            first_pages: HashMap::new(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn request_log(&self) -> &[RequestLogEntry] {
        &self.log
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    pub fn rate_limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    fn request(&mut self, query: &SearchQuery, order: SortOrder, page: u64) -> Result<SearchPage, BackendError> {
        if page == 1 && order == SortOrder::Newest {
            if let Some(p) = self.first_pages.remove(query) {
                return Ok(p);
            }
        }
        let mut attempt = 0;
        loop {
            let at = self.limiter.acquire(&self.clock);
            let result = self.backend.search(query, order, page);
            let outcome = match &result {
                Ok(p) => RequestOutcome::Ok { total_count: p.total_count, items: p.items.len() as u64 },
                Err(BackendError::Transient(m)) => RequestOutcome::Transient(m.clone()),
                Err(BackendError::PageOutOfRange { .. }) => RequestOutcome::OutOfRange,
                Err(BackendError::Fatal(m)) => RequestOutcome::Fatal(m.clone()),
            };
            self.log.push(RequestLogEntry { at, range: query.size, order, page, outcome });
            match result {
                Err(BackendError::Transient(m)) => {
                    if attempt >= self.retry.max_retries {
                        return Err(BackendError::Transient(m));
                    }
                    log::debug!("retrying {} page {page} after: {m}", query.query_string());
                    self.clock.sleep(self.retry.delay(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    /// Reported population of each range, from one request per range.
    /// Ranges whose request fails are left out.
    pub fn survey(&mut self, plan: &HarvestPlan, ranges: &[SizeRange]) -> BTreeMap<SizeRange, u64> {
        let mut counts = BTreeMap::new();
        for &r in ranges {
            let q = plan.query(r);
            match self.request(&q, SortOrder::Newest, 1) {
                Ok(p) => {
                    counts.insert(r, p.total_count);
                    self.first_pages.insert(q, p);
                }
                Err(e) => log::warn!("survey of {r} failed: {e}"),
            }
        }
        counts
    }

    /// Survey and split until no range holds more than `threshold` files,
    /// or only single-byte ranges do.
    pub fn refine_to_fixpoint(&mut self, plan: &HarvestPlan, threshold: u64) -> (HarvestPlan, BTreeMap<SizeRange, u64>) {
        let mut plan = plan.clone();
        let mut counts: BTreeMap<SizeRange, u64> = BTreeMap::new();
        let mut tried: HashSet<SizeRange> = HashSet::new();
        loop {
            let todo: Vec<SizeRange> = plan.ranges.iter().copied().filter(|r| tried.insert(*r)).collect();
            counts.extend(self.survey(&plan, &todo));
            let next = refine(&plan, &counts, threshold);
            if next == plan {
                counts.retain(|r, _| plan.ranges.contains(r));
                return (plan, counts);
            }
            plan = next;
        }
    }

    /// Fetch every range in both sort orders, keeping each file once.
    pub fn execute(&mut self, plan: &HarvestPlan) -> (Vec<HarvestedFile>, HarvestReport) {
        let mut files = Vec::new();
        let mut seen: HashSet<(String, String)> = HashSet::new();
        let mut reports = Vec::with_capacity(plan.ranges.len());
        for &r in &plan.ranges {
            reports.push(self.execute_range(plan, r, &mut seen, &mut files));
        }
        let requests = reports.iter().map(|r| r.requests).sum();
        (files, HarvestReport::from_ranges(reports, requests))
    }

    fn execute_range(
        &mut self,
        plan: &HarvestPlan,
        range: SizeRange,
        seen: &mut HashSet<(String, String)>,
        out: &mut Vec<HarvestedFile>,
    ) -> RangeReport {
        let query = plan.query(range);
        let page_size = self.backend.page_size().max(1);
        let cap = plan.cap_per_order.min(self.backend.cap());
        let max_pages = cap.div_ceil(page_size);
        // a page kept from the survey was dispatched earlier
        let reused = self.first_pages.contains_key(&query) as usize;
        let before = self.log.len() - reused;
        let mut total: Option<u64> = None;
        let mut retrieved = 0;
        let mut failure = None;
        for order in SortOrder::BOTH {
            // one order already reached everything
            if total.is_some_and(|t| retrieved >= t) {
                break;
            }
            for page in 1..=max_pages {
                match self.request(&query, order, page) {
                    Ok(p) => {
                        total.get_or_insert(p.total_count);
                        let n = p.items.len() as u64;
                        for f in p.items {
                            if seen.insert((f.repo.clone(), f.path.clone())) {
                                retrieved += 1;
                                out.push(f);
                            }
                        }
                        if n < page_size || page * page_size >= p.total_count {
                            break;
                        }
                    }
                    Err(BackendError::PageOutOfRange { .. }) => break,
                    Err(e) => {
                        log::warn!("{} ({order}, page {page}) failed: {e}", query.query_string());
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
        }
        let status = match failure {
            Some(m) => RangeStatus::Failed(m),
            None if total.is_some_and(|t| retrieved < t) => RangeStatus::Truncated,
            None => RangeStatus::Complete,
        };
        RangeReport {
            range,
            total_count: total,
            retrieved,
            requests: (self.log.len() - before) as u64,
            unsamplable: plan.unsamplable.contains(&range),
            status,
        }
    }
}
