use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use squadkit::datasource::{
    filter_variants, DataSource, FixtureStore, FollowDirection, DEFAULT_SEARCH_LIMIT, DEFAULT_TWEET_COUNT,
};
use squadkit::features::{extract_features, AccountRecord, ExtractOptions, FEATURE_NAMES};
use squadkit::genmodels::export::{read_csv, read_ndjson, write_csv, write_ndjson};
use squadkit::genmodels::{generate_all, GenerationModelId, VariantRecord};
use squadkit::learn::{default_grid, small_grid};
use squadkit::mentions::{
    aggregate_typo_stats, analyze_tweet_content, classify_mentions, render_rank_table, render_typo_tables,
    search_rank_probe, AccountCategory, MentionRecord, TweetText, TypoVerdict,
};
use squadkit::pipeline::{
    report_render, scan, train_model, ModelBundle, PipelineConfig, ReportFormat, ScanReport, TrainOptions,
};
use squadkit::similarity::EmojiMap;
use squadkit::{Error, Result};

#[derive(Parser)]
#[command(name = "squadkit", version, about = "Username-squatting variant generation and detection")]
struct Cli {
    /// Fixture directory used as the account data source.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 42)]
    seed_rng: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate username variants for one or more seeds.
    Generate(GenerateArgs),
    /// Resolve generated variants to active, suspended or missing accounts.
    Filter(FilterArgs),
    /// Extract pair features for every active variant of a seed.
    Extract(ExtractArgs),
    /// Train and save a classifier bundle from a labeled feature file.
    Train(TrainArgs),
    /// Generate, filter, extract and classify the variants of a seed.
    Scan(ScanArgs),
    /// Classify mentions of variant accounts as typos or purposeful.
    TypoMentions(TypoArgs),
    /// Record search ranks of a seed and its variants for every prefix.
    RankProbe(RankArgs),
    /// Count URLs and follow-me requests in tweets by the given authors.
    ContentRisk(ContentArgs),
    /// Re-render a saved JSON scan report.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Seed username; repeatable.
    #[arg(long = "seed")]
    seeds_inline: Vec<String>,
    /// File with one seed per line (a CSV whose first column is `seed` also works).
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Comma-separated model names; all ten when omitted.
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    #[arg(long)]
    no_stacking: bool,
    #[arg(long)]
    no_repetition: bool,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<VariantFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantFormat {
    Ndjson,
    Csv,
}

#[derive(Args)]
struct FilterArgs {
    /// Seed to generate variants for; ignored when `--variants` is given.
    #[arg(long)]
    seed: Option<String>,
    /// Previously generated variants (.csv or ndjson).
    #[arg(long)]
    variants: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    seed: String,
    #[arg(long)]
    variants: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled feature CSV.
    #[arg(long)]
    data: PathBuf,
    /// Where to write the model bundle.
    #[arg(long)]
    model_out: PathBuf,
    #[arg(long, default_value_t = 5)]
    smote_k: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, value_enum, default_value = "default")]
    grid: GridChoice,
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridChoice {
    Default,
    Small,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    seed: String,
    /// Model bundle; overrides `model_path` from the config.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    AFollowsB,
    BFollowsA,
    Either,
    Mutual,
}

impl From<Direction> for FollowDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::AFollowsB => FollowDirection::AFollowsB,
            Direction::BFollowsA => FollowDirection::BFollowsA,
            Direction::Either => FollowDirection::Either,
            Direction::Mutual => FollowDirection::Mutual,
        }
    }
}

#[derive(Args)]
struct TypoArgs {
    /// Restrict to mentions of this seed's variants.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, value_enum, default_value = "either")]
    direction: Direction,
    /// Emit one CSV row per tweet instead of the summary tables.
    #[arg(long)]
    verdicts: bool,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    seed: String,
    #[arg(long, default_value_t = DEFAULT_SEARCH_LIMIT)]
    max_results: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: DataFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct ContentArgs {
    /// Comma-separated author usernames.
    #[arg(long, value_delimiter = ',')]
    authors: Vec<String>,
    /// Saved JSON scan report; its flagged variants are added to the authors.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TWEET_COUNT)]
    tweets: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON scan report written by `scan`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "table")]
    format: String,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::Config(_) => 2,
        Error::InvalidInput(_) | Error::Data(_) | Error::Io(_) => 3,
        Error::Backend(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("squadkit: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct Ctx {
    fixtures: Option<PathBuf>,
    config: Option<PathBuf>,
    seed_rng: u64,
    out: Option<PathBuf>,
}

impl Ctx {
    fn store(&self) -> Result<FixtureStore> {
        let dir = self
            .fixtures
            .as_ref()
            .ok_or_else(|| Error::Usage("this command needs --fixtures <dir>".into()))?;
        FixtureStore::load(dir)
    }

    fn config(&self) -> Result<PipelineConfig> {
        match &self.config {
            Some(p) => PipelineConfig::load(p),
            None => Ok(PipelineConfig::default()),
        }
    }

    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, bytes)?,
            None => match io::stdout().lock().write_all(bytes) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                other => other?,
            },
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx { fixtures: cli.fixtures, config: cli.config, seed_rng: cli.seed_rng, out: cli.out };
    match cli.command {
        Command::Generate(a) => cmd_generate(&ctx, a),
        Command::Filter(a) => cmd_filter(&ctx, a),
        Command::Extract(a) => cmd_extract(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Scan(a) => cmd_scan(&ctx, a),
        Command::TypoMentions(a) => cmd_typo(&ctx, a),
        Command::RankProbe(a) => cmd_rank(&ctx, a),
        Command::ContentRisk(a) => cmd_content(&ctx, a),
        Command::Report(a) => cmd_report(&ctx, a),
    }
}

fn read_seed_file(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| l.split(',').next().unwrap_or("").trim())
        .filter(|s| !s.is_empty() && !s.starts_with('#') && *s != "seed")
        .map(str::to_string)
        .collect())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_variants(path: &Path) -> Result<Vec<VariantRecord>> {
    let f = BufReader::new(File::open(path)?);
    if is_csv(path) {
        read_csv(f)
    } else {
        read_ndjson(f)
    }
}

fn cmd_generate(ctx: &Ctx, a: GenerateArgs) -> Result<()> {
    let mut seeds = a.seeds_inline;
    if let Some(p) = &a.seeds {
        seeds.extend(read_seed_file(p)?);
    }
    if seeds.is_empty() {
        return Err(Error::Usage("give at least one --seed or a --seeds file".into()));
    }
    let mut settings = ctx.config()?.generation;
    if !a.models.is_empty() {
        let models = a.models.iter().map(|m| m.parse::<GenerationModelId>()).collect::<Result<Vec<_>>>();
        settings.models = Some(models.map_err(|e| Error::Usage(e.to_string()))?);
    }
    if a.no_stacking {
        settings.stacking = Some(false);
    }
    if a.no_repetition {
        settings.self_repetition = Some(false);
    }
    if a.max_len.is_some() {
        settings.max_len = a.max_len;
    }
    let cfg = settings.to_config()?;
    let mut all = Vec::new();
    for s in &seeds {
        all.extend(generate_all(s, &cfg)?);
    }
    let format = a.format.unwrap_or(match &ctx.out {
        Some(p) if is_csv(p) => VariantFormat::Csv,
        _ => VariantFormat::Ndjson,
    });
    let mut buf = Vec::new();
    match format {
        VariantFormat::Ndjson => write_ndjson(&all, &mut buf)?,
        VariantFormat::Csv => write_csv(&all, &mut buf)?,
    }
    ctx.emit(&buf)?;
    eprintln!("{} variants for {} seed(s)", all.len(), seeds.len());
    Ok(())
}

fn variants_for(ctx: &Ctx, seed: Option<&str>, file: Option<&PathBuf>) -> Result<Vec<VariantRecord>> {
    match (file, seed) {
        (Some(p), _) => read_variants(p),
        (None, Some(s)) => generate_all(s, &ctx.config()?.generation.to_config()?),
        (None, None) => Err(Error::Usage("give --seed or --variants".into())),
    }
}

#[derive(Serialize)]
struct FilterSummary {
    active: Vec<String>,
    suspended: Vec<String>,
    not_found: Vec<String>,
    unresolved: BTreeMap<String, String>,
}

fn cmd_filter(ctx: &Ctx, a: FilterArgs) -> Result<()> {
    let store = ctx.store()?;
    let variants = variants_for(ctx, a.seed.as_deref(), a.variants.as_ref())?;
    let f = filter_variants(&variants, &store, ctx.config()?.lookup_batch)?;
    let summary = FilterSummary {
        active: f.active.iter().map(|(v, _)| v.username.clone()).collect(),
        suspended: f.suspended.iter().map(|v| v.username.clone()).collect(),
        not_found: f.not_found.iter().map(|v| v.username.clone()).collect(),
        unresolved: f.unresolved.iter().map(|(v, e)| (v.username.clone(), e.clone())).collect(),
    };
    ctx.emit((serde_json::to_string_pretty(&summary)? + "\n").as_bytes())
}

fn active_seed(store: &FixtureStore, seed: &str) -> Result<AccountRecord> {
    let lookup = store.lookup_batch(&[seed.to_string()])?;
    match lookup.entries.into_values().next() {
        Some(squadkit::datasource::LookupOutcome::Active(rec)) => Ok(rec),
        _ => Err(Error::InvalidInput(format!("seed {seed} is not an active account"))),
    }
}

fn cmd_extract(ctx: &Ctx, a: ExtractArgs) -> Result<()> {
    let store = ctx.store()?;
    let cfg = ctx.config()?;
    let seed = active_seed(&store, &a.seed)?;
    let variants = variants_for(ctx, Some(&a.seed), a.variants.as_ref())?;
    let f = filter_variants(&variants, &store, cfg.lookup_batch)?;
    let opts = ExtractOptions { image_threshold: cfg.image_threshold, emoji: EmojiMap::default() };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["seed", "variant"];
    header.extend(FEATURE_NAMES);
    header.push("incomplete");
    w.write_record(&header).map_err(Error::from)?;
    for (_, rec) in &f.active {
        let x = extract_features(&seed, rec, &store, store.embeddings(), &opts)?;
        let mut row = vec![seed.username.clone(), rec.username.clone()];
        row.extend(x.features.to_array().iter().map(|v| format!("{v:?}")));
        row.push(x.incomplete.to_string());
        w.write_record(&row).map_err(Error::from)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    ctx.emit(&buf)
}

fn cmd_train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let examples = squadkit::features::read_labeled_csv(BufReader::new(File::open(&a.data)?))?;
    let opts = TrainOptions {
        test_fraction: a.test_fraction,
        smote_k: a.smote_k,
        folds: a.folds,
        grid: match a.grid {
            GridChoice::Default => default_grid(),
            GridChoice::Small => small_grid(),
        },
        rng_seed: ctx.seed_rng,
    };
    let outcome = train_model(&examples, &opts)?;
    outcome.bundle.save(&a.model_out)?;
    ctx.emit(outcome.summary_json()?.as_bytes())
}

fn cmd_scan(ctx: &Ctx, a: ScanArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse()?;
    let store = ctx.store()?;
    let cfg = ctx.config()?;
    let model = a
        .model
        .or_else(|| cfg.model_path.clone())
        .ok_or_else(|| Error::Config("no model bundle: pass --model or set model_path".into()))?;
    let bundle = ModelBundle::load(&model)?;
    let report = scan(&a.seed, &store, store.embeddings(), &bundle, &cfg)?;
    ctx.emit(report_render(&report, format)?.as_bytes())
}

fn categories(store: &FixtureStore) -> Result<BTreeMap<String, AccountCategory>> {
    store
        .categories()
        .iter()
        .map(|(seed, c)| Ok((seed.clone(), c.parse::<AccountCategory>()?)))
        .collect()
}

fn verdict_name(v: Option<TypoVerdict>) -> &'static str {
    match v {
        Some(TypoVerdict::TypoMention) => "typo",
        Some(TypoVerdict::PurposefulMention) => "purposeful",
        Some(TypoVerdict::Unknown) => "unknown",
        None => "excluded",
    }
}

fn cmd_typo(ctx: &Ctx, a: TypoArgs) -> Result<()> {
    let store = ctx.store()?;
    let records: Vec<MentionRecord> = store
        .tweets()
        .iter()
        .filter(|t| !t.mentioned_variant.is_empty())
        .filter(|t| a.seed.as_ref().is_none_or(|s| t.seed.eq_ignore_ascii_case(s)))
        .cloned()
        .collect();
    let verdicts = classify_mentions(&records, &store, a.direction.into());
    if a.verdicts {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["tweet_id", "seed", "mentioner", "mentioned_variant", "verdict"]).map_err(Error::from)?;
        for (r, v) in records.iter().zip(&verdicts) {
            w.write_record([&r.tweet_id, &r.seed, &r.mentioner, &r.mentioned_variant, verdict_name(*v)])
                .map_err(Error::from)?;
        }
        let buf = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        return ctx.emit(&buf);
    }
    let stats = aggregate_typo_stats(&records, &verdicts, &categories(&store)?)?;
    ctx.emit(render_typo_tables(&stats)?.as_bytes())
}

fn cmd_rank(ctx: &Ctx, a: RankArgs) -> Result<()> {
    let store = ctx.store()?;
    let variants: Vec<String> = generate_all(&a.seed, &ctx.config()?.generation.to_config()?)?
        .into_iter()
        .map(|v| v.username)
        .collect();
    let results = search_rank_probe(&store, &a.seed, &variants, a.max_results)?;
    let text = match a.format {
        DataFormat::Csv => render_rank_table(&results)?,
        DataFormat::Json => serde_json::to_string_pretty(&results)? + "\n",
    };
    ctx.emit(text.as_bytes())
}

fn load_report(path: &Path) -> Result<ScanReport> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

fn cmd_content(ctx: &Ctx, a: ContentArgs) -> Result<()> {
    let store = ctx.store()?;
    let mut authors = a.authors;
    if let Some(p) = &a.report {
        authors.extend(load_report(p)?.suspicious_pairs.into_iter().map(|s| s.variant));
    }
    if authors.is_empty() {
        return Err(Error::Usage("give --authors or --report".into()));
    }
    authors.sort();
    authors.dedup();
    let mut tweets = Vec::new();
    for author in &authors {
        let page = store.fetch_recent_tweets(author, a.tweets)?;
        tweets.extend(page.tweets.into_iter().map(|t| TweetText { author: Some(t.mentioner), text: t.text }));
    }
    let report = analyze_tweet_content(&tweets);
    ctx.emit((serde_json::to_string_pretty(&report)? + "\n").as_bytes())
}

fn cmd_report(ctx: &Ctx, a: ReportArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse()?;
    let report = load_report(&a.input)?;
    ctx.emit(report_render(&report, format)?.as_bytes())
}
