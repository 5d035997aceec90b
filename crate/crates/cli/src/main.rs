//! `issueforge` command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use issueforge_core::augmentation::{
    self, load_primary, parse_ratios, read_augmented, write_augmented, AugmentationSpec, LabelMap, Method,
};
use issueforge_core::classifier::{self, cross_validate, EvalSettings, Hyper, NamedSpec};
use issueforge_core::extraction::{harvest_titles, load_gold, verify_patterns, PatternSet, TitleNormalizer};
use issueforge_core::ingestion::{self, fetch_remote, filter_repos, load_corpus, write_corpus, FetchConfig};
use issueforge_core::label_norm::{build_label_table, IntentLexicon, LabelNormalizer};
use issueforge_core::pipeline::{self, ExperimentConfig, ExtractedIssue, LabelRecord, PipelineConfig};
use issueforge_core::similarity;
use issueforge_core::textprep::{Preprocessor, ProcessedDocument, WordLists};
use issueforge_core::IntentClass;

#[derive(Parser)]
#[command(name = "issueforge", version, about = "Turn labeled issues into auxiliary training data for review classifiers")]
struct Cli {
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch repositories from the GitHub API, or copy a local corpus.
    Harvest(HarvestArgs),
    /// Keep repositories with enough labeled issues and contributors.
    Filter(FilterArgs),
    /// Normalize labels and assign intents to issues.
    Labels(LabelsArgs),
    /// Extract the target section of each issue body.
    Extract(ExtractArgs),
    /// Measure extraction accuracy on a gold fixture.
    VerifyPatterns(VerifyArgs),
    /// List section titles found in issue templates.
    Templates(TemplatesArgs),
    /// Turn extracted issues into token documents.
    Preprocess(PreprocessArgs),
    /// Rank repositories by profile similarity.
    Similar(SimilarArgs),
    /// Build one augmented training set.
    Augment(AugmentArgs),
    /// Build augmented sets over a range of volume ratios and evaluate each.
    Sweep(SweepArgs),
    /// Cross-validate a classifier on a dataset.
    TrainEval(TrainEvalArgs),
    /// Compare a baseline with augmented models.
    Experiment(ExperimentArgs),
    /// Run every stage from one config file.
    Pipeline(PipelineArgs),
    /// Summarize a pipeline output directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct HarvestArgs {
    /// File with one `owner/name` per line.
    #[arg(long, conflicts_with = "from", required_unless_present = "from")]
    repos: Option<PathBuf>,
    /// Existing corpus directory to copy instead of fetching.
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Environment variable holding the API token.
    #[arg(long, default_value = "GITHUB_TOKEN")]
    token_env: String,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long, default_value_t = 4)]
    parallel: usize,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = ingestion::DEFAULT_MIN_LABELED_ISSUES)]
    min_labeled: u64,
    #[arg(long, default_value_t = ingestion::DEFAULT_MIN_CONTRIBUTORS)]
    min_contributors: u64,
}

#[derive(Args)]
struct LabelsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to the bundled lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = issueforge_core::label_norm::DEFAULT_MIN_LABEL_FREQUENCY)]
    min_freq: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the normalized label table as TSV.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to the bundled patterns.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Restrict to these labeled issues and attach their intents.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    fixture: PathBuf,
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TemplatesArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Word-list directory; defaults to the bundled lists.
    #[arg(long)]
    lists: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimilarArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long, default_value_t = similarity::DEFAULT_TOP_K)]
    top: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    WithinApp,
    WithinContext,
    BetweenApp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::WithinApp => Method::WithinApp,
            MethodArg::WithinContext => Method::WithinContext,
            MethodArg::BetweenApp => Method::BetweenApp,
        }
    }
}

#[derive(Args)]
struct SourceArgs {
    /// Primary review CSV (`text,label[,app_id]`).
    #[arg(long)]
    primary: PathBuf,
    #[arg(long)]
    labelmap: PathBuf,
    /// Name used in primary doc ids; defaults to the CSV file stem.
    #[arg(long)]
    name: Option<String>,
    /// Issue documents (`docs.jsonl`).
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    app: Option<String>,
    #[arg(long, default_value_t = similarity::DEFAULT_TOP_K)]
    top: usize,
    /// Within-context: also sample the target app's own issues.
    #[arg(long)]
    same_app: bool,
    /// Corpus directory for similarity ranking (within-context only).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct AugmentArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = augmentation::DEFAULT_RATIO)]
    ratio: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long, default_value_t = classifier::DEFAULT_FOLDS)]
    k: usize,
    #[arg(long, default_value_t = Hyper::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = Hyper::default().learning_rate)]
    lr: f64,
    #[arg(long, default_value_t = Hyper::default().l2)]
    l2: f64,
    #[arg(long)]
    bigrams: bool,
}

impl HyperArgs {
    fn hyper(&self) -> Hyper {
        Hyper {
            epochs: self.epochs,
            learning_rate: self.lr,
            l2: self.l2,
            bigrams: self.bigrams,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    /// `start:end:step` or a comma-separated list.
    #[arg(long, default_value = "0:1:0.1")]
    ratios: String,
    /// Output directory for the datasets and `trend.tsv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Bug,
    Feature,
}

#[derive(Args)]
struct TrainEvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    target: TargetArg,
    #[command(flatten)]
    hyper: HyperArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    dir: PathBuf,
}

/// Exit code 2 for bad input, 3 for failures while running.
enum CliError {
    Validation(String),
    Failure(String),
}

type CliResult = Result<(), CliError>;

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

impl From<pipeline::PipelineError> for CliError {
    fn from(e: pipeline::PipelineError) -> Self {
        match e.exit_code() {
            2 => CliError::Validation(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

fn require(path: &Path) -> CliResult {
    if path.exists() {
        Ok(())
    } else {
        Err(invalid(format!("{} does not exist", path.display())))
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(fail)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn write_jsonl<T: serde::Serialize>(path: &Path, rows: &[T]) -> CliResult {
    let mut text = String::new();
    for r in rows {
        text.push_str(&serde_json::to_string(r).map_err(fail)?);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    require(path)?;
    let text = fs::read_to_string(path).map_err(fail)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

fn word_lists(dir: Option<&Path>) -> Result<WordLists, CliError> {
    match dir {
        Some(d) => WordLists::from_dir(d).map_err(invalid),
        None => Ok(WordLists::bundled()),
    }
}

fn patterns(path: Option<&Path>) -> Result<PatternSet, CliError> {
    match path {
        Some(p) => PatternSet::load(p).map_err(invalid),
        None => Ok(PatternSet::bundled()),
    }
}

fn corpus(dir: &Path) -> Result<ingestion::Corpus, CliError> {
    require(dir)?;
    load_corpus(dir).map_err(invalid)
}

fn harvest(a: HarvestArgs) -> CliResult {
    if let Some(from) = a.from {
        let c = corpus(&from)?;
        write_corpus(&c, &a.out).map_err(fail)?;
        tracing::info!(repos = c.repos.len(), issues = c.issues.len(), "corpus copied");
        return Ok(());
    }
    let list = a.repos.expect("clap enforces --repos or --from");
    require(&list)?;
    let repos: Vec<String> = fs::read_to_string(&list)
        .map_err(fail)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    let mut cfg = FetchConfig {
        token: std::env::var(&a.token_env).ok(),
        parallel: a.parallel.max(1),
        ..FetchConfig::default()
    };
    if let Some(url) = a.base_url {
        cfg.base_url = url;
    }
    let summary = fetch_remote(&repos, &cfg, &a.out).map_err(fail)?;
    tracing::info!(summary = %serde_json::to_string(&summary).unwrap_or_default(), "harvest done");
    Ok(())
}

fn filter(a: FilterArgs) -> CliResult {
    let c = corpus(&a.input)?;
    let f = filter_repos(&c, a.min_labeled, a.min_contributors);
    write_corpus(&f.corpus, &a.out).map_err(fail)?;
    println!("{}", serde_json::to_string(&f.stats).map_err(fail)?);
    Ok(())
}

fn labels(a: LabelsArgs) -> CliResult {
    let c = corpus(&a.input)?;
    let lexicon = match &a.lexicon {
        Some(p) => IntentLexicon::load(p).map_err(invalid)?,
        None => IntentLexicon::bundled(),
    };
    let normalizer = LabelNormalizer::bundled();
    let records = pipeline::label_records(&c, &lexicon, a.min_freq, &normalizer).map_err(invalid)?;
    write_jsonl(&a.out, &records)?;
    if let Some(table) = &a.table {
        let mut text = String::from("surface\tfrequency\toriginals\n");
        for l in build_label_table(&c, &normalizer) {
            let originals: Vec<&str> = l.originals.iter().map(String::as_str).collect();
            text.push_str(&format!("{}\t{}\t{}\n", l.surface, l.frequency, originals.join("|")));
        }
        fs::write(table, text).map_err(fail)?;
    }
    tracing::info!(issues = c.issues.len(), relevant = records.len(), "labels assigned");
    Ok(())
}

fn extract(a: ExtractArgs) -> CliResult {
    let c = corpus(&a.input)?;
    let patterns = patterns(a.patterns.as_deref())?;
    let prep = Preprocessor::bundled();
    let labels: Vec<LabelRecord> = match &a.labels {
        Some(p) => read_jsonl(p)?,
        None => c
            .issues
            .iter()
            .map(|i| LabelRecord {
                issue_id: i.issue_id.clone(),
                repo_id: i.repo_id.clone(),
                intents: Default::default(),
            })
            .collect(),
    };
    let (extracted, stats) = pipeline::extract_issues(&c, &labels, &patterns, &prep);
    write_jsonl(&a.out, &extracted)?;
    if let Some(r) = &a.report {
        write_json(r, &stats)?;
    }
    tracing::info!(issues = stats.issues, extracted = stats.extracted, "extraction done");
    Ok(())
}

fn verify(a: VerifyArgs) -> CliResult {
    require(&a.fixture)?;
    let fixture = load_gold(&a.fixture).map_err(invalid)?;
    let report = verify_patterns(&fixture, &patterns(a.patterns.as_deref())?, &Preprocessor::bundled());
    match &a.out {
        Some(out) => write_json(out, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).map_err(fail)?),
    }
    Ok(())
}

fn templates(a: TemplatesArgs) -> CliResult {
    let c = corpus(&a.input)?;
    let h = harvest_titles(&c.templates, &TitleNormalizer::bundled());
    for e in &h.parse_errors {
        tracing::warn!(error = %e, "template skipped");
    }
    write_jsonl(&a.out, &h.titles)?;
    tracing::info!(titles = h.titles.len(), deleted = h.deleted, errors = h.parse_errors.len(), "templates read");
    Ok(())
}

fn preprocess(a: PreprocessArgs) -> CliResult {
    let extracted: Vec<ExtractedIssue> = read_jsonl(&a.input)?;
    let prep = Preprocessor::new(word_lists(a.lists.as_deref())?);
    let docs = pipeline::build_documents(&extracted, &prep);
    write_jsonl(&a.out, &docs)?;
    tracing::info!(issues = extracted.len(), documents = docs.len(), "preprocessing done");
    Ok(())
}

fn similar(a: SimilarArgs) -> CliResult {
    let c = corpus(&a.input)?;
    let (profiles, _) = similarity::build_profiles(&c.repos, &Preprocessor::bundled(), &TitleNormalizer::bundled());
    let mut ranking = similarity::rank_similar(&a.query, &profiles).map_err(invalid)?;
    ranking.ranked.truncate(a.top);
    write_json(&a.out, &ranking)
}

struct Sources {
    primary: Vec<ProcessedDocument>,
    pool: Vec<ProcessedDocument>,
    spec: AugmentationSpec,
    ranking: Option<similarity::SimilarityRanking>,
}

fn sources(s: &SourceArgs, ratio: f64) -> Result<Sources, CliError> {
    require(&s.primary)?;
    require(&s.labelmap)?;
    let label_map = LabelMap::load(&s.labelmap).map_err(invalid)?;
    let name = s.name.clone().unwrap_or_else(|| {
        s.primary
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "primary".into())
    });
    let prep = Preprocessor::bundled();
    let primary = load_primary(&s.primary, &name, &label_map, &prep).map_err(invalid)?;
    let pool: Vec<ProcessedDocument> = read_jsonl(&s.pool)?;
    let spec = AugmentationSpec {
        method: s.method.into(),
        ratio,
        seed: s.seed,
        target_app: s.app.clone(),
        top_k_similar: s.top,
        include_same_app: s.same_app,
    };
    spec.validate().map_err(invalid)?;
    let ranking = if spec.method == Method::WithinContext {
        let dir = s
            .corpus
            .as_ref()
            .ok_or_else(|| invalid("within-context needs --corpus for similarity ranking"))?;
        let c = corpus(dir)?;
        let (profiles, _) = similarity::build_profiles(&c.repos, &prep, &TitleNormalizer::bundled());
        Some(similarity::rank_similar(spec.target_app.as_deref().unwrap_or_default(), &profiles).map_err(fail)?)
    } else {
        None
    };
    Ok(Sources {
        primary: primary.rows,
        pool,
        spec,
        ranking,
    })
}

fn augment(a: AugmentArgs) -> CliResult {
    let s = sources(&a.source, a.ratio)?;
    let sel = augmentation::select_auxiliary(&s.pool, s.primary.len(), &s.spec, s.ranking.as_ref()).map_err(fail)?;
    let ds = augmentation::augment(&s.primary, &sel, Some(&s.spec), s.spec.seed);
    write_augmented(&a.out, &ds.rows).map_err(fail)?;
    let counts: BTreeMap<String, usize> = ds
        .class_counts()
        .into_iter()
        .map(|((o, c), n)| (format!("{o:?}/{}", c.map(|c| c.as_str()).unwrap_or("none")), n))
        .collect();
    tracing::info!(rows = ds.rows.len(), shortfall = ds.shortfall, counts = ?counts, "augmented");
    Ok(())
}

fn sweep(a: SweepArgs) -> CliResult {
    let ratios = parse_ratios(&a.ratios).map_err(invalid)?;
    let s = sources(&a.source, augmentation::DEFAULT_RATIO)?;
    fs::create_dir_all(&a.out).map_err(fail)?;
    let datasets = augmentation::sweep(&s.primary, &s.pool, &ratios, &s.spec, s.ranking.as_ref()).map_err(fail)?;
    for (ds, r) in datasets.iter().zip(&ratios) {
        write_augmented(&a.out.join(format!("augmented_r{r:.2}.jsonl")), &ds.rows).map_err(fail)?;
    }
    let settings = EvalSettings {
        k: a.hyper.k,
        seed: s.spec.seed,
        hyper: a.hyper.hyper(),
    };
    let trend = classifier::sweep_trend(&s.primary, &s.pool, &ratios, &s.spec, s.ranking.as_ref(), &settings)
        .map_err(fail)?;
    fs::write(a.out.join("trend.tsv"), trend.to_tsv()).map_err(fail)?;
    Ok(())
}

fn train_eval(a: TrainEvalArgs) -> CliResult {
    require(&a.data)?;
    let rows = read_augmented(&a.data).map_err(invalid)?;
    let target = match a.target {
        TargetArg::Bug => IntentClass::BugReport,
        TargetArg::Feature => IntentClass::FeatureRequest,
    };
    let report = cross_validate(&rows, target, a.hyper.k, a.seed, &a.hyper.hyper()).map_err(fail)?;
    write_json(&a.out, &report)
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let cfg = ExperimentConfig::load(&a.config)?;
    let prep = Preprocessor::new(word_lists(cfg.word_lists.as_deref())?);
    let label_map = LabelMap::load(&cfg.primary.label_map).map_err(invalid)?;
    let primary = load_primary(&cfg.primary.path, &cfg.primary.name, &label_map, &prep).map_err(invalid)?;
    let pool: Vec<ProcessedDocument> = read_jsonl(&cfg.pool)?;
    let specs: Vec<NamedSpec> = cfg.augmentation.iter().map(|e| e.to_named(cfg.seed)).collect();
    let mut rankings = BTreeMap::new();
    if let Some(dir) = &cfg.corpus_dir {
        let c = corpus(dir)?;
        let (profiles, _) = similarity::build_profiles(&c.repos, &prep, &TitleNormalizer::new(prep.lists()));
        for s in specs.iter().filter(|s| s.spec.method == Method::WithinContext) {
            let target = s.spec.target_app.clone().unwrap_or_default();
            let r = similarity::rank_similar(&target, &profiles).map_err(fail)?;
            rankings.insert(target, r);
        }
    }
    let settings = EvalSettings {
        k: cfg.folds,
        seed: cfg.seed,
        hyper: cfg.hyper,
    };
    let report = classifier::run_experiment(&primary.rows, &pool, &specs, &rankings, &settings).map_err(fail)?;
    fs::write(&a.out, report.to_tsv()).map_err(fail)?;
    Ok(())
}

fn run_pipeline(a: PipelineArgs) -> CliResult {
    let cfg = PipelineConfig::load(&a.config)?;
    let manifest = pipeline::run_pipeline(&cfg, &a.out)?;
    println!("{}", json!({ "out": a.out, "artifacts": manifest.artifacts.len() }));
    Ok(())
}

fn report(a: ReportArgs) -> CliResult {
    print!("{}", pipeline::report(&a.dir)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .json()
        .with_writer(std::io::stderr)
        .with_max_level(if cli.quiet {
            tracing::Level::WARN
        } else {
            tracing::Level::INFO
        })
        .init();

    let result = match cli.command {
        Command::Harvest(a) => harvest(a),
        Command::Filter(a) => filter(a),
        Command::Labels(a) => labels(a),
        Command::Extract(a) => extract(a),
        Command::VerifyPatterns(a) => verify(a),
        Command::Templates(a) => templates(a),
        Command::Preprocess(a) => preprocess(a),
        Command::Similar(a) => similar(a),
        Command::Augment(a) => augment(a),
        Command::Sweep(a) => sweep(a),
        Command::TrainEval(a) => train_eval(a),
        Command::Experiment(a) => experiment(a),
        Command::Pipeline(a) => run_pipeline(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            tracing::error!(kind = "validation", "{msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            tracing::error!(kind = "failure", "{msg}");
            ExitCode::from(3)
        }
    }
}
