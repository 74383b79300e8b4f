use anyhow::{Context as _, Result};
use serde::Serialize;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use alias_census::analytics::{self, FlowOptions, SampleOptions, StatTable, Stopwords};
use alias_census::corpus::{
    scan, CorpusStore, ExportFormat, HashAlgorithm, IngestReport, ScanItem, ScanOptions, SourceFile, SourceFileRecord,
    Table,
};
use alias_census::harvester::{
    self, BackendKind, GithubBackend, HarvestPlan, HarvestReport, Harvester, SearchBackend, SimulatedBackend,
    SimulatedClock, SimulationConfig, SizeRange, SystemClock,
};
use alias_census::suggest::{self, RuleSet};
use alias_census::KnowledgeBase;

use crate::config::Config;
use crate::{
    user_error, Cli, Command, ExportArgs, FixArgs, HarvestArgs, HarvestCommand, ImportArgs, RuleArgs, RunArgs,
    ScanArgs, StatsArgs, StatsTable, SuggestCommand,
};

const DEFAULT_STORE: &str = "alias-census-store.jsonl";

struct Context {
    config: Config,
    store_path: PathBuf,
    kb_dir: Option<PathBuf>,
    json: bool,
    seed: u64,
}

impl Context {
    fn new(cli: &Cli) -> Result<Context> {
        let config = Config::discover(cli.config.as_deref()).map_err(|e| user_error(format!("{e:#}")))?;
        let store_path = cli
            .store
            .clone()
            .or_else(|| config.get("store").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_STORE));
        let kb_dir = cli.kb_dir.clone().or_else(|| config.get("kb_dir").map(PathBuf::from));
        let json = cli.json || config.flag("json").map_err(config_error)?;
        let seed = match cli.seed {
            Some(s) => s,
            None => config.parsed("seed").map_err(config_error)?.unwrap_or(0),
        };
        Ok(Context { config, store_path, kb_dir, json, seed })
    }

    fn kb(&self) -> Result<KnowledgeBase> {
        match &self.kb_dir {
            None => Ok(KnowledgeBase::bundled()),
            Some(dir) => KnowledgeBase::load_dir(dir)
                .map_err(|e| user_error(format!("knowledge base {}: {e}", dir.display()))),
        }
    }

    fn open_store(&self, hash: HashAlgorithm) -> Result<CorpusStore> {
        CorpusStore::open(&self.store_path, hash)
            .map_err(|e| user_error(format!("cannot open store {}: {e}", self.store_path.display())))
    }

    /// The store, which must already exist.
    fn existing_store(&self) -> Result<CorpusStore> {
        if !self.store_path.exists() {
            return Err(user_error(format!(
                "no store at {} (run `alias-census scan` first or pass --store)",
                self.store_path.display()
            )));
        }
        self.open_store(HashAlgorithm::default())
    }

    fn save_store(&self, store: &CorpusStore) -> Result<()> {
        store.save(&self.store_path).with_context(|| format!("saving store {}", self.store_path.display()))
    }

    fn cfg<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.config.parsed(key).map_err(config_error)?.unwrap_or(default)),
        }
    }
}

fn config_error(e: anyhow::Error) -> anyhow::Error {
    user_error(format!("{e:#}"))
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Context::new(&cli)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Scan(args) => scan_cmd(&ctx, args, &mut out)?,
        Command::Classify => classify_cmd(&ctx, &mut out)?,
        Command::Stats(args) => stats_cmd(&ctx, args, &mut out)?,
        Command::Export(args) => export_cmd(&ctx, args, &mut out)?,
        Command::Import(args) => import_cmd(&ctx, args, &mut out)?,
        Command::Suggest(SuggestCommand::Build(args)) => suggest_build(&ctx, args, &mut out)?,
        Command::Suggest(SuggestCommand::Fix(args)) => suggest_fix(&ctx, args, &mut out)?,
        Command::Harvest(HarvestCommand::Plan(args)) => harvest_plan(&ctx, args, &mut out)?,
        Command::Harvest(HarvestCommand::Run(args)) => harvest_run(&ctx, args, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn emit_table(ctx: &Context, table: &StatTable, out: &mut dyn Write) -> Result<()> {
    if ctx.json {
        table.write_jsonl(out)?;
    } else {
        table.write_csv(out)?;
    }
    Ok(())
}

/// One record: a JSON object, or a CSV header and row.
fn emit_record<T: Serialize>(ctx: &Context, record: &T, out: &mut dyn Write) -> Result<()> {
    let value = serde_json::to_value(record)?;
    if ctx.json {
        serde_json::to_writer(&mut *out, &value)?;
        writeln!(out)?;
        return Ok(());
    }
    let serde_json::Value::Object(map) = value else {
        unreachable!("records are objects");
    };
    let mut w = csv_writer(out);
    w.write_record(map.keys())?;
    w.write_record(map.values().map(|v| match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }))?;
    w.flush()?;
    Ok(())
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().flexible(false).from_writer(out)
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|e| user_error(format!("cannot read {}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(f)))
}

fn read_jsonl_files(path: &Path) -> Result<Vec<SourceFile>> {
    let mut files = Vec::new();
    for (i, line) in open_input(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SourceFileRecord = serde_json::from_str(&line)
            .map_err(|e| user_error(format!("{} line {}: {e}", path.display(), i + 1)))?;
        files.push(rec.into());
    }
    Ok(files)
}

#[derive(Serialize)]
struct ScanSummary {
    files_seen: u64,
    files_ingested: u64,
    duplicates_dropped: u64,
    aliases_parsed: u64,
    skipped_non_posix: u64,
    skipped_flagged: u64,
    skipped_malformed: u64,
    unreadable: u64,
    labels: usize,
}

impl ScanSummary {
    fn new(r: IngestReport, unreadable: u64, labels: usize) -> ScanSummary {
        ScanSummary {
            files_seen: r.files_seen,
            files_ingested: r.files_ingested,
            duplicates_dropped: r.duplicates_dropped,
            aliases_parsed: r.aliases_parsed,
            skipped_non_posix: r.skips.non_posix,
            skipped_flagged: r.skips.flagged,
            skipped_malformed: r.skips.malformed,
            unreadable,
            labels,
        }
    }
}

fn scan_cmd(ctx: &Context, args: ScanArgs, out: &mut dyn Write) -> Result<()> {
    if args.paths.is_empty() && args.from_jsonl.is_empty() {
        return Err(user_error("nothing to scan: give paths or --from-jsonl"));
    }
    for p in &args.paths {
        if !p.exists() {
            return Err(user_error(format!("no such file or directory: {}", p.display())));
        }
    }
    let options = if args.all {
        ScanOptions::all()
    } else if !args.include.is_empty() {
        ScanOptions::with_patterns(&args.include).map_err(|e| user_error(format!("bad --include pattern: {e}")))?
    } else {
        ScanOptions::default()
    };
    let explicit: Option<HashAlgorithm> = match args.hash {
        Some(h) => Some(h),
        None => ctx.config.parsed("hash").map_err(config_error)?,
    };
    let mut store = ctx.open_store(explicit.unwrap_or_default())?;
    if let Some(hash) = explicit.filter(|&h| h != store.hash && !store.is_empty()) {
        return Err(user_error(format!(
            "store {} uses {} hashes, not {hash}",
            ctx.store_path.display(),
            store.hash
        )));
    }
    let kb = ctx.kb()?;

    let mut unreadable = 0;
    let mut files: Vec<SourceFile> = Vec::new();
    for item in scan(&args.paths, &options) {
        match item {
            ScanItem::File(f) => files.push(f.into()),
            ScanItem::Unreadable { path, error } => {
                log::warn!("skipping {}: {error}", path.display());
                unreadable += 1;
            }
        }
    }
    for p in &args.from_jsonl {
        files.extend(read_jsonl_files(p)?);
    }
    let report = store.ingest(files);
    log::info!(
        "ingested {} of {} files, {} aliases",
        report.files_ingested,
        report.files_seen,
        report.aliases_parsed
    );
    let labels = store.relabel(&kb);
    ctx.save_store(&store)?;
    emit_record(ctx, &ScanSummary::new(report, unreadable, labels), out)
}

#[derive(Serialize)]
struct ClassifySummary {
    aliases: usize,
    labeled_aliases: usize,
    labels: usize,
}

fn classify_cmd(ctx: &Context, out: &mut dyn Write) -> Result<()> {
    let kb = ctx.kb()?;
    let mut store = ctx.existing_store()?;
    let labels = store.relabel(&kb);
    ctx.save_store(&store)?;
    let labeled_aliases = store.alias_views().filter(|v| !v.labels().is_empty()).count();
    emit_record(ctx, &ClassifySummary { aliases: store.aliases.len(), labeled_aliases, labels }, out)
}

fn stats_cmd(ctx: &Context, args: StatsArgs, out: &mut dyn Write) -> Result<()> {
    let store = ctx.existing_store()?;
    let table = match args.table {
        StatsTable::TopNames => analytics::top_names(&store, args.top),
        StatsTable::TopCommands => analytics::top_commands(&store, args.top),
        StatsTable::TopArguments => analytics::top_arguments(&store, args.top),
        StatsTable::Breakdown => {
            let Some(cmd) = &args.command else {
                return Err(user_error("`stats breakdown` needs --command"));
            };
            analytics::command_breakdown(&store, cmd, args.args, args.aliases)
        }
        StatsTable::Compression => {
            if args.bins == 0 {
                return Err(user_error("--bins must be positive"));
            }
            analytics::compression_histogram(&store, args.bins, args.command.as_deref()).to_table()
        }
        StatsTable::Flows => {
            if args.length < 2 {
                return Err(user_error("--length must be at least 2"));
            }
            let top_shapes = (args.shapes > 0).then_some(args.shapes);
            analytics::pipeline_flows(&store, FlowOptions { length: args.length, min_share: args.min_share, top_shapes })
        }
        StatsTable::ProvenanceFiles => analytics::file_patterns(&store),
        StatsTable::ProvenanceWords => {
            let path = args.stopwords.clone().or_else(|| ctx.config.get("stopwords").map(PathBuf::from));
            let stopwords = match path {
                Some(p) => Stopwords::load(&p)
                    .map_err(|e| user_error(format!("cannot read stop words {}: {e}", p.display())))?,
                None => Stopwords::bundled(),
            };
            analytics::description_words(&store, &stopwords, args.top)
        }
        StatsTable::Practices => {
            let commands = (!args.commands.is_empty()).then_some(args.commands.as_slice());
            analytics::practice_matrix(&store, commands, args.top)
        }
        StatsTable::PracticeSummary => analytics::practice_summary(&store),
        StatsTable::Sample => analytics::representative_sample(
            &store,
            SampleOptions {
                n_cmds: args.n_cmds,
                n_args: args.n_args,
                n_aliases: args.n_aliases,
                long_tail: args.long_tail,
                seed: ctx.seed,
            },
        ),
    };
    emit_table(ctx, &table, out)
}

fn export_cmd(ctx: &Context, args: ExportArgs, out: &mut dyn Write) -> Result<()> {
    let store = ctx.existing_store()?;
    let mut file;
    let sink: &mut dyn Write = match &args.output {
        Some(p) => {
            file = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            &mut file
        }
        None => out,
    };
    if args.table == "store" {
        if args.format != ExportFormat::Jsonl {
            return Err(user_error("a whole-store dump is always JSONL"));
        }
        store.write_dump(&mut *sink)?;
    } else {
        let table: Table = args.table.parse().map_err(user_error)?;
        store.export(table, args.format, &mut *sink)?;
    }
    sink.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ImportSummary {
    rows: usize,
    aliases: usize,
}

fn import_cmd(ctx: &Context, args: ImportArgs, out: &mut dyn Write) -> Result<()> {
    let existing = ctx.open_store(HashAlgorithm::default())?;
    if !existing.is_empty() {
        return Err(user_error(format!("store {} is not empty", ctx.store_path.display())));
    }
    let mut store = CorpusStore::default();
    let rows = store
        .import(open_input(&args.input)?)
        .map_err(|e| user_error(format!("cannot import {}: {e}", args.input.display())))?;
    let problems = store.check_integrity();
    if let Some(p) = problems.first() {
        return Err(user_error(format!("{} is inconsistent: {p}", args.input.display())));
    }
    ctx.save_store(&store)?;
    emit_record(ctx, &ImportSummary { rows, aliases: store.aliases.len() }, out)
}

fn rules_path(ctx: &Context, args: &RuleArgs) -> PathBuf {
    args.rules
        .clone()
        .or_else(|| ctx.config.get("rules").map(PathBuf::from))
        .unwrap_or_else(|| ctx.store_path.with_file_name("rules.jsonl"))
}

fn build_rules(ctx: &Context, args: &RuleArgs) -> Result<RuleSet> {
    let min_support = ctx.cfg(args.min_support, "min_support", suggest::DEFAULT_MIN_SUPPORT)?;
    let min_count = ctx.cfg(args.min_count, "min_count", suggest::DEFAULT_MIN_COUNT)?;
    if !(0.0..=1.0).contains(&min_support) {
        return Err(user_error("--min-support must be between 0 and 1"));
    }
    let store = ctx.existing_store()?;
    Ok(suggest::build_rules(&store, &ctx.kb()?, min_support, min_count))
}

#[derive(Serialize)]
struct RuleSummary {
    rules_file: String,
    sudo_rules: usize,
    order_rules: usize,
    chain_rules: usize,
    typo_words: usize,
}

fn suggest_build(ctx: &Context, args: RuleArgs, out: &mut dyn Write) -> Result<()> {
    let rules = build_rules(ctx, &args)?;
    let path = rules_path(ctx, &args);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    rules.write_jsonl(&mut w)?;
    w.flush()?;
    let summary = RuleSummary {
        rules_file: path.display().to_string(),
        sudo_rules: rules.sudo_rules.len(),
        order_rules: rules.order_rules.values().map(|m| m.len()).sum(),
        chain_rules: rules.chain_rules.values().map(|v| v.len()).sum(),
        typo_words: rules.typo_index.len(),
    };
    emit_record(ctx, &summary, out)
}

fn suggest_fix(ctx: &Context, args: FixArgs, out: &mut dyn Write) -> Result<()> {
    let line = args.line.join(" ");
    let path = rules_path(ctx, &args.rules);
    let rules = if path.exists() && args.rules.min_support.is_none() && args.rules.min_count.is_none() {
        RuleSet::read_jsonl(BufReader::new(File::open(&path)?))
            .map_err(|e| user_error(format!("bad rules file {}: {e}", path.display())))?
    } else {
        build_rules(ctx, &args.rules)?
    };
    let found = suggest::suggest(&line, &rules, args.top).map_err(|e| user_error(format!("cannot parse `{line}`: {e}")))?;
    if found.is_empty() {
        log::info!("no suggestions for `{line}`");
    }
    let mut t = StatTable::new(
        &["rank", "replacement", "rule", "score", "evidence", "detail"],
        analytics::Partition::Overlapping,
    );
    for (i, s) in found.into_iter().enumerate() {
        use analytics::Cell;
        t.push(vec![
            Cell::Int(i as u64 + 1),
            Cell::Text(s.replacement),
            Cell::Text(s.rule.name().to_string()),
            Cell::Float(s.score),
            Cell::Int(s.evidence),
            Cell::Text(s.detail),
        ]);
    }
    emit_table(ctx, &t, out)
}

struct HarvestSettings {
    term: String,
    max_size: u64,
    step: u64,
    backend: BackendKind,
    api_url: Option<String>,
    rate: usize,
}

fn harvest_settings(ctx: &Context, a: &HarvestArgs) -> Result<HarvestSettings> {
    let s = HarvestSettings {
        term: a.term.clone().or_else(|| ctx.config.get("term").map(str::to_string)).unwrap_or_else(|| "alias".into()),
        max_size: ctx.cfg(a.max_size, "max_size", 29_000)?,
        step: ctx.cfg(a.step, "step", harvester::DEFAULT_STEP)?,
        backend: ctx.cfg(a.backend, "backend", BackendKind::Simulated)?,
        api_url: a.api_url.clone().or_else(|| ctx.config.get("api_url").map(str::to_string)),
        rate: ctx.cfg(a.rate_limit, "rate_limit", harvester::DEFAULT_RATE_PER_MIN)?,
    };
    if s.max_size == 0 || s.step == 0 || s.rate == 0 {
        return Err(user_error("--max-size, --step and --rate-limit must be positive"));
    }
    if !(0.0..=1.0).contains(&a.sim_failure_rate) {
        return Err(user_error("--sim-failure-rate must be between 0 and 1"));
    }
    Ok(s)
}

fn parse_dense(spec: &str) -> Result<(SizeRange, usize)> {
    let bad = || user_error(format!("bad --sim-dense `{spec}` (expected LO..HI:N)"));
    let (range, n) = spec.split_once(':').ok_or_else(bad)?;
    let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((SizeRange::new(lo, hi), n.trim().parse().map_err(|_| bad())?))
}

/// Run `f` with a harvester over the configured backend. The simulator
/// runs on simulated time.
fn with_harvester<T>(
    ctx: &Context,
    a: &HarvestArgs,
    s: &HarvestSettings,
    f: &mut dyn FnMut(&mut dyn HarvestOps) -> Result<T>,
) -> Result<T> {
    match s.backend {
        BackendKind::Simulated => {
            let config = SimulationConfig {
                n_files: a.sim_files,
                seed: ctx.seed,
                max_size: s.max_size,
                dense: a.sim_dense.as_deref().map(parse_dense).transpose()?,
                failure_rate: a.sim_failure_rate,
                ..Default::default()
            };
            let clock = SimulatedClock::new();
            let mut h = Harvester::new(SimulatedBackend::generate(&config), &clock, s.rate);
            f(&mut h)
        }
        BackendKind::Github => {
            let backend = GithubBackend::from_env(s.api_url.as_deref());
            let mut h = Harvester::new(backend, SystemClock::new(), s.rate);
            f(&mut h)
        }
    }
}

/// The harvester operations used here, object safe over backend and clock.
trait HarvestOps {
    fn refine_to_fixpoint(&mut self, plan: &HarvestPlan, threshold: u64) -> HarvestPlan;
    fn execute(&mut self, plan: &HarvestPlan) -> (Vec<harvester::HarvestedFile>, HarvestReport);
    fn peak_window(&self) -> usize;
}

impl<B: SearchBackend, C: harvester::Clock> HarvestOps for Harvester<B, C> {
    fn refine_to_fixpoint(&mut self, plan: &HarvestPlan, threshold: u64) -> HarvestPlan {
        Harvester::refine_to_fixpoint(self, plan, threshold).0
    }

    fn execute(&mut self, plan: &HarvestPlan) -> (Vec<harvester::HarvestedFile>, HarvestReport) {
        Harvester::execute(self, plan)
    }

    fn peak_window(&self) -> usize {
        harvester::max_requests_in_window(self.request_log(), self.rate_limiter().window())
    }
}

fn harvest_plan(ctx: &Context, a: HarvestArgs, out: &mut dyn Write) -> Result<()> {
    let s = harvest_settings(ctx, &a)?;
    let mut plan = harvester::plan(&s.term, s.max_size, s.step);
    if !a.no_refine {
        plan = with_harvester(ctx, &a, &s, &mut |h| Ok(h.refine_to_fixpoint(&plan, plan.default_threshold())))?;
    }
    if ctx.json {
        serde_json::to_writer(&mut *out, &plan)?;
        writeln!(out)?;
        return Ok(());
    }
    let mut w = csv_writer(out);
    w.write_record(["lo", "hi", "query", "unsamplable"])?;
    for r in &plan.ranges {
        w.write_record([
            r.lo.to_string(),
            r.hi.to_string(),
            plan.query(*r).query_string(),
            plan.unsamplable.contains(r).to_string(),
        ])?;
    }
    Ok(())
}

fn harvest_run(ctx: &Context, a: RunArgs, out: &mut dyn Write) -> Result<()> {
    if a.output.is_none() && !a.ingest {
        return Err(user_error("give --output, --ingest or both"));
    }
    let s = harvest_settings(ctx, &a.harvest)?;
    let loaded: Option<HarvestPlan> = match &a.plan {
        None => None,
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| user_error(format!("cannot read plan {}: {e}", p.display())))?;
            let plan: HarvestPlan =
                serde_json::from_str(&text).map_err(|e| user_error(format!("bad plan {}: {e}", p.display())))?;
            if let Some(problem) = plan.check().first() {
                return Err(user_error(format!("bad plan {}: {problem}", p.display())));
            }
            Some(plan)
        }
    };
    let (files, report, peak) = with_harvester(ctx, &a.harvest, &s, &mut |h| {
        let plan = match &loaded {
            Some(p) => p.clone(),
            None => {
                let p = harvester::plan(&s.term, s.max_size, s.step);
                if a.harvest.no_refine {
                    p
                } else {
                    h.refine_to_fixpoint(&p, p.default_threshold())
                }
            }
        };
        let (files, report) = h.execute(&plan);
        Ok((files, report, h.peak_window()))
    })?;
    log::info!(
        "retrieved {} of an estimated {} files ({:.2}% coverage) in {} requests, at most {peak} per minute",
        report.retrieved,
        report.estimated_population,
        report.coverage * 100.0,
        report.requests
    );
    let records: Vec<SourceFileRecord> = files.into_iter().map(Into::into).collect();
    if let Some(p) = &a.output {
        let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
        for r in &records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    if a.ingest {
        let mut store = ctx.open_store(HashAlgorithm::default())?;
        store.ingest(records.into_iter().map(SourceFile::from));
        store.relabel(&ctx.kb()?);
        ctx.save_store(&store)?;
    }
    if ctx.json {
        serde_json::to_writer(&mut *out, &report)?;
        writeln!(out)?;
        return Ok(());
    }
    let mut w = csv_writer(out);
    w.write_record(["lo", "hi", "total_count", "retrieved", "requests", "unsamplable", "status"])?;
    for r in &report.ranges {
        let status = match &r.status {
            harvester::RangeStatus::Complete => "complete".to_string(),
            harvester::RangeStatus::Truncated => "truncated".to_string(),
            harvester::RangeStatus::Failed(m) => format!("failed: {m}"),
        };
        w.write_record([
            r.range.lo.to_string(),
            r.range.hi.to_string(),
            r.total_count.map(|c| c.to_string()).unwrap_or_default(),
            r.retrieved.to_string(),
            r.requests.to_string(),
            r.unsamplable.to_string(),
            status,
        ])?;
    }
    Ok(())
}
