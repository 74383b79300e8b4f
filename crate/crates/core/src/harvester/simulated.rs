use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use super::{BackendError, HarvestedFile, SearchBackend, SearchPage, SearchQuery, SizeRange, SortOrder};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n_files: usize,
    pub seed: u64,
    /// Parameters of the log-normal size distribution, in ln-bytes.
    pub mu: f64,
    pub sigma: f64,
    /// Sizes are redrawn until they fall in `1..=max_size`.
    pub max_size: u64,
    /// Files placed uniformly inside one range, out of `n_files`.
    pub dense: Option<(SizeRange, usize)>,
    /// Chance that a request fails transiently.
    pub failure_rate: f64,
    pub page_size: u64,
    pub cap: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_files: 10_000,
            seed: 0,
            mu: 1500f64.ln(),
            sigma: 1.0,
            max_size: 29_000,
            dense: None,
            failure_rate: 0.0,
            page_size: 100,
            cap: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SimFile {
    id: u64,
    size: u64,
    indexed_at: u64,
}

/// An in-memory search service over a synthetic population with exact
/// counts.
#[derive(Debug, Clone)]
pub struct SimulatedBackend {
    /// Sorted by size, then id.
    files: Vec<SimFile>,
    page_size: u64,
    cap: u64,
    failure_rate: f64,
    rng: ChaCha8Rng,
    requests: u64,
}

impl SimulatedBackend {
    pub fn generate(config: &SimulationConfig) -> SimulatedBackend {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let max_size = config.max_size.max(1);
        let mut sizes = Vec::with_capacity(config.n_files);
        if let Some((range, n)) = config.dense {
            for _ in 0..n.min(config.n_files) {
                sizes.push(rng.random_range(range.lo..=range.hi));
            }
        }
        let dist = LogNormal::new(config.mu, config.sigma).expect("valid log-normal parameters");
        while sizes.len() < config.n_files {
            let s = dist.sample(&mut rng).round();
            if s >= 1.0 && s <= max_size as f64 {
                sizes.push(s as u64);
            }
        }
        let mut b = SimulatedBackend::from_sizes(sizes, rng.random());
        b.page_size = config.page_size.max(1);
        b.cap = config.cap;
        b.failure_rate = config.failure_rate;
        b
    }

    /// A population with the given file sizes.
    pub fn from_sizes(sizes: Vec<u64>, seed: u64) -> SimulatedBackend {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut files: Vec<SimFile> = sizes
            .into_iter()
            .enumerate()
            .map(|(i, size)| SimFile { id: i as u64, size, indexed_at: rng.random() })
            .collect();
        files.sort_by_key(|f| (f.size, f.id));
        SimulatedBackend { files, page_size: 100, cap: 1000, failure_rate: 0.0, rng, requests: 0 }
    }

    pub fn population(&self) -> u64 {
        self.files.len() as u64
    }

    /// Number of files in `range`.
    pub fn true_count(&self, range: SizeRange) -> u64 {
        self.slice(range).len() as u64
    }

    pub fn requests(&self) -> u64 {
        self.requests
    }

    fn slice(&self, range: SizeRange) -> &[SimFile] {
        let a = self.files.partition_point(|f| f.size < range.lo);
        let b = self.files.partition_point(|f| f.size <= range.hi);
        &self.files[a..b]
    }

    fn to_harvested(f: &SimFile) -> HarvestedFile {
        HarvestedFile {
            repo: format!("user{}/dotfiles", f.id / 4),
            path: format!("f{}/.bash_aliases", f.id),
            description: Some("my dotfiles".to_string()),
            stars: Some(f.id % 50),
            size: f.size,
            contents: format!("alias s{}='echo {}'\n", f.id, f.size),
        }
    }
}

impl SearchBackend for SimulatedBackend {
    fn page_size(&self) -> u64 {
        self.page_size
    }

    fn cap(&self) -> u64 {
        self.cap
    }

    fn search(&mut self, query: &SearchQuery, order: SortOrder, page: u64) -> Result<SearchPage, BackendError> {
        self.requests += 1;
        if self.failure_rate > 0.0 && self.rng.random_bool(self.failure_rate.min(1.0)) {
            return Err(BackendError::Transient("simulated outage".into()));
        }
        if page == 0 || page > self.cap.div_ceil(self.page_size) {
            return Err(BackendError::PageOutOfRange { page });
        }
        let mut hits: Vec<&SimFile> = self.slice(query.size).iter().collect();
        match order {
            SortOrder::Newest => hits.sort_by(|a, b| b.indexed_at.cmp(&a.indexed_at).then(a.id.cmp(&b.id))),
            SortOrder::Oldest => hits.sort_by(|a, b| a.indexed_at.cmp(&b.indexed_at).then(a.id.cmp(&b.id))),
        }
        let reachable = (hits.len() as u64).min(self.cap) as usize;
        let from = (((page - 1) * self.page_size) as usize).min(reachable);
        let to = ((page * self.page_size) as usize).min(reachable);
        Ok(SearchPage {
            total_count: hits.len() as u64,
            items: hits[from..to].iter().map(|f| Self::to_harvested(f)).collect(),
        })
    }
}
