//! Command-line pipeline.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use eaqa_core::augment::{align_paraphrase, augment_document, inter_sentential_rate, AlignOutcome, AugmentMethod, AugmentPlan, SwapOptions};
use eaqa_core::corpus::{corpus_stats, flag_distances, ANALYSIS_WINDOW};
use eaqa_core::prompt::{PromptAssets, ASSET_FILES};
use eaqa_core::qadata::{build_qa_dataset, dataset_report, MixPolicy, QuestionSources, Split, SplitCorpus};
use eaqa_core::questiongen::{
    build_qg_training_set, emit_contextualized_qg_prompt, emit_role_prompt, template_bank, ContextualizedQuestions,
    RolePromptMode, WhLexicon, WhWord, FEW_SHOT_EXEMPLARS,
};
use eaqa_core::scoring::{self, attach_span_text, AnalysisOptions};
use eaqa_core::{AnnotatedDocument, Ontology, QuestionStrategy, SeededRng};
use rand::seq::SliceRandom;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::extract::{exemplar_pool, ExtractionRun, QuestionSource, Shots};
use crate::llm::{Client, CompletionCache, EndpointConfig, UreqTransport};
use crate::manifest::RunRecord;
use crate::scoring_io::ReportFile;
use crate::{augment_io, corpus_io, io, profile, qa_io, questions_io, scoring_io};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "eaqa", version, about = "Event-argument extraction as question answering: data pipeline and scorer")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: config output_dir, else ./out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: config jobs, else all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Emit logs as JSON lines.
    #[arg(long, global = true)]
    pub log_json: bool,
    #[arg(long, global = true, default_value = "info")]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert an upstream corpus to canonical JSONL and validate it.
    Ingest(IngestArgs),
    /// Corpus statistics and the argument distance histogram.
    Stats(StatsArgs),
    /// Template question bank; validate banks and contextualized files; export QG training data.
    Genq(GenqArgs),
    /// Emit question-generation prompts.
    QgPrompts(QgPromptsArgs),
    /// Data augmentation.
    Augment(AugmentArgs),
    /// Build the QA dataset under a mixing policy.
    BuildQa(BuildQaArgs),
    /// Prompted extraction through a completion endpoint.
    LlmExtract(LlmExtractArgs),
    /// Strict (and optionally lenient) scoring.
    Score(ScoreArgs),
    /// Breakdowns, role confusion and error taxonomy.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus file (default: config corpus.test, then corpus.train).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// canonical, rams, wikievents, or a profile JSON path.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "canonical")]
    pub profile: String,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// Also write the ontology observed in the corpus.
    #[arg(long)]
    pub derive_ontology: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
}

#[derive(Debug, Args)]
pub struct GenqArgs {
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long)]
    pub bank_zero: Option<PathBuf>,
    #[arg(long)]
    pub bank_few: Option<PathBuf>,
    /// Contextualized question JSONL to validate and turn into QG training data.
    #[arg(long)]
    pub contextualized: Vec<PathBuf>,
    /// Corpus the contextualized questions refer to.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub profile: Option<String>,
    /// SQuAD-format file to export as (context, answer, question) triples.
    #[arg(long)]
    pub squad: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PromptMode {
    Zero,
    Few,
}

#[derive(Debug, Args)]
pub struct QgPromptsArgs {
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "zero")]
    pub mode: PromptMode,
    /// Bank-format JSON (role -> question) to draw the few-shot examples from.
    #[arg(long)]
    pub exemplars: Option<PathBuf>,
    /// Also emit contextualized prompts for this corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub profile: Option<String>,
    /// Contextualized prompts for a random sample of this many documents.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Swap,
    VerboseSwap,
    CorefRandom,
    CorefMeaningful,
    ParaAlign,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Only place moved arguments in a different sentence.
    #[arg(long)]
    pub strict_inter: bool,
    /// Coreference sidecar (coref methods).
    #[arg(long)]
    pub coref: Option<PathBuf>,
    /// Paraphrase JSONL (para-align).
    #[arg(long)]
    pub paraphrases: Option<PathBuf>,
    /// Write only derived documents, without the originals.
    #[arg(long)]
    pub derived_only: bool,
}

#[derive(Debug, Args)]
pub struct BuildQaArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long)]
    pub bank_zero: Option<PathBuf>,
    #[arg(long)]
    pub bank_few: Option<PathBuf>,
    /// Contextualized question file, optionally tagged `PATH:SPLIT` (default train).
    #[arg(long)]
    pub contextualized: Vec<String>,
    /// Comma-separated training strategies.
    #[arg(long, value_delimiter = ',')]
    pub train_strategies: Option<Vec<String>>,
    #[arg(long)]
    pub test_strategy: Option<String>,
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub context_window: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShotsArg {
    Zero,
    Few,
}

#[derive(Debug, Args)]
pub struct LlmExtractArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_enum, default_value = "zero")]
    pub shots: ShotsArg,
    /// Training corpus supplying few-shot exemplars (default: config corpus.train).
    #[arg(long)]
    pub exemplars_from: Option<PathBuf>,
    /// Ask one question per request instead of all of an event's questions at once.
    #[arg(long)]
    pub one_per_call: bool,
    /// Question bank to ask from instead of template questions.
    #[arg(long)]
    pub bank: Option<PathBuf>,
    #[arg(long, default_value = "prompt_zero")]
    pub bank_strategy: String,
    /// Endpoint TOML (same keys as the config [endpoint] table).
    #[arg(long)]
    pub endpoint: Option<PathBuf>,
    #[arg(long)]
    pub url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub api_key_env: Option<String>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub system_id: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write prompts only; no requests.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub profile: Option<String>,
    /// Also score leniently (text containment).
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub coref: Option<PathBuf>,
    /// Baseline predictions for relative F1 change per distance bucket.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    #[arg(long, default_value_t = 15)]
    pub top_k: usize,
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
}

impl Ctx {
    fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.cfg.seed).unwrap_or(DEFAULT_SEED)
    }

    fn profile(&self, flag: &Option<String>) -> String {
        flag.clone()
            .or_else(|| self.cfg.corpus.profile.clone())
            .unwrap_or_else(|| profile::CANONICAL.to_string())
    }

    fn ontology_path(&self, flag: &Option<PathBuf>) -> Option<PathBuf> {
        flag.clone().or_else(|| self.cfg.corpus.ontology.clone())
    }

    fn ontology(&self, flag: &Option<PathBuf>, run: &mut RunRecord) -> Result<Option<Ontology>> {
        match self.ontology_path(flag) {
            Some(p) => {
                run.input(&p);
                corpus_io::read_ontology(&p).map(Some)
            }
            None => Ok(None),
        }
    }

    fn require_ontology(&self, flag: &Option<PathBuf>, run: &mut RunRecord) -> Result<Ontology> {
        self.ontology(flag, run)?
            .ok_or_else(|| Error::Config("an ontology is required (--ontology or corpus.ontology)".into()))
    }

    fn read_corpus(
        &self,
        path: &Path,
        profile_flag: &Option<String>,
        ontology: Option<&Ontology>,
        run: &mut RunRecord,
    ) -> Result<Vec<AnnotatedDocument>> {
        run.input(path);
        let docs = profile::read_with_profile(path, &self.profile(profile_flag), ontology)?;
        tracing::info!(stage = "corpus", path = %path.display(), documents = docs.len(), "loaded");
        Ok(docs)
    }

    fn corpus_path(&self, args: &CorpusArgs) -> Result<PathBuf> {
        args.corpus
            .clone()
            .or_else(|| self.cfg.corpus.test.clone())
            .or_else(|| self.cfg.corpus.train.clone())
            .ok_or_else(|| Error::Config("a corpus is required (--corpus or [corpus])".into()))
    }

    fn lexicon(&self, run: &mut RunRecord) -> Result<WhLexicon> {
        let Some(path) = &self.cfg.questions.lexicon else {
            return Ok(WhLexicon::default());
        };
        run.input(path);
        let map: BTreeMap<String, String> = serde_json::from_str(&io::read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut entries = Vec::new();
        for (role, wh) in map {
            let w: WhWord = wh.parse().map_err(|e| Error::Config(format!("lexicon {role}: {e}")))?;
            entries.push((role, w));
        }
        Ok(WhLexicon::default().with_overrides(entries))
    }

    fn assets(&self, run: &mut RunRecord) -> PromptAssets {
        let Some(dir) = &self.cfg.questions.assets_dir else {
            return PromptAssets::default();
        };
        for name in ASSET_FILES {
            let p = dir.join(name);
            if p.exists() {
                run.input(&p);
            }
        }
        PromptAssets::with_overrides(|name| std::fs::read_to_string(dir.join(name)).ok())
    }

    fn bank_path(&self, flag: &Option<PathBuf>, strategy: QuestionStrategy) -> Option<PathBuf> {
        flag.clone().or_else(|| self.cfg.questions.banks.get(strategy.as_str()).cloned())
    }

    fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn finish(&self, run: RunRecord, subcommand: &str, seed: Option<u64>, params: serde_json::Value) -> Result<()> {
        run.finish(&self.out, subcommand, seed, params)?;
        Ok(())
    }
}

fn strategy(name: &str) -> Result<QuestionStrategy> {
    name.parse().map_err(|e| Error::Config(format!("{e}")))
}

/// Parses arguments, runs the subcommand and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(&cli);
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            tracing::error!(category = category(&e), "{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn category(e: &Error) -> &'static str {
    match e.exit_code() {
        2 => "config",
        3 => "data",
        _ => "network",
    }
}

fn init_logging(cli: &Cli) {
    let level = cli.log_level.parse().unwrap_or(tracing::Level::INFO);
    let builder = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(level)
        .with_target(false)
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()));
    let _ = if cli.log_json {
        builder.json().try_init()
    } else {
        builder.try_init()
    };
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let jobs = cli.jobs.or(cfg.jobs).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let ctx = Ctx { cfg, out };
    let mut run = RunRecord::default();
    if let Some(p) = &cli.config {
        run.input(p);
    }
    pool.install(|| match cli.command {
        Command::Ingest(a) => ingest(&ctx, a, run),
        Command::Stats(a) => stats(&ctx, a, run),
        Command::Genq(a) => genq(&ctx, a, run),
        Command::QgPrompts(a) => qg_prompts(&ctx, a, run),
        Command::Augment(a) => augment(&ctx, a, run),
        Command::BuildQa(a) => build_qa(&ctx, a, run),
        Command::LlmExtract(a) => llm_extract(&ctx, a, run),
        Command::Score(a) => score(&ctx, a, run),
        Command::Analyze(a) => analyze(&ctx, a, run),
    })
}

fn ingest(ctx: &Ctx, a: IngestArgs, mut run: RunRecord) -> Result<()> {
    let ontology = ctx.ontology(&a.ontology, &mut run)?;
    let docs = ctx.read_corpus(&a.input, &Some(a.profile.clone()), ontology.as_ref(), &mut run)?;
    run.write(ctx.out_file("corpus.jsonl"), &corpus_io::corpus_to_string(&docs))?;
    if a.derive_ontology {
        let o = corpus_io::ontology_from_corpus(&docs)?;
        run.write(ctx.out_file("ontology.json"), &corpus_io::ontology_to_string(&o))?;
    }
    println!("ingested {} documents from {}", docs.len(), a.input.display());
    ctx.finish(run, "ingest", None, json!({ "profile": a.profile }))
}

fn stats(ctx: &Ctx, a: StatsArgs, mut run: RunRecord) -> Result<()> {
    let ontology = ctx.ontology(&a.corpus.ontology, &mut run)?;
    let path = ctx.corpus_path(&a.corpus)?;
    let docs = ctx.read_corpus(&path, &a.corpus.profile, ontology.as_ref(), &mut run)?;
    let s = corpus_stats(&docs, ontology.as_ref());
    let by_distance: BTreeMap<String, usize> = s.by_distance.iter().map(|(d, n)| (d.to_string(), *n)).collect();
    let value = json!({
        "documents": s.documents,
        "events": s.events,
        "arguments": s.arguments,
        "event_types": s.event_types,
        "role_types": s.role_types,
        "ontology_event_types": s.ontology_event_types,
        "ontology_roles": s.ontology_roles,
        "by_distance": by_distance,
        "intra_sentential": s.intra_sentential,
        "inter_sentential": s.inter_sentential,
        "outside_analysis_window": s.outside_analysis_window,
    });
    run.write(ctx.out_file("stats.json"), &io::to_pretty_json(&value))?;
    let flags = flag_distances(&docs, ANALYSIS_WINDOW);
    let flag_lines = io::to_jsonl(flags.iter().map(|f| {
        json!({"doc_id": f.doc_id, "event_index": f.event_index, "argument_index": f.argument_index, "distance": f.distance})
    }));
    run.write(ctx.out_file("distance_flags.jsonl"), &flag_lines)?;
    println!("documents {}  events {}  arguments {}", s.documents, s.events, s.arguments);
    println!("event types {}  role types {}", s.event_types, s.role_types);
    if let (Some(t), Some(r)) = (s.ontology_event_types, s.ontology_roles) {
        println!("ontology: {t} event types, {r} roles");
    }
    println!("intra-sentential {}  inter-sentential {}", s.intra_sentential, s.inter_sentential);
    for (d, n) in &s.by_distance {
        println!("  distance {d:>3}: {n}");
    }
    ctx.finish(run, "stats", None, json!({}))
}

fn genq(ctx: &Ctx, a: GenqArgs, mut run: RunRecord) -> Result<()> {
    if let Some(squad) = &a.squad {
        run.input(squad);
        let triples = questions_io::squad_triples(&io::read_to_string(squad)?)
            .map_err(|m| Error::Data(format!("{}: {m}", squad.display())))?;
        run.write(ctx.out_file("squad_triples.jsonl"), &io::to_jsonl(&triples))?;
        println!("exported {} SQuAD triples", triples.len());
    }
    let ontology = ctx.ontology(&a.ontology, &mut run)?;
    if let Some(ontology) = &ontology {
        let lexicon = ctx.lexicon(&mut run)?;
        let bank = template_bank(ontology, &lexicon);
        run.write(ctx.out_file("template_bank.json"), &questions_io::bank_to_string(&bank))?;
        println!("template bank: {} roles", bank.len());
        for (flag, strat) in [(&a.bank_zero, QuestionStrategy::PromptZero), (&a.bank_few, QuestionStrategy::PromptFew)] {
            if let Some(path) = ctx.bank_path(flag, strat) {
                run.input(&path);
                let (bank, warnings) = questions_io::read_question_bank(&path, strat, ontology)?;
                for w in &warnings {
                    tracing::warn!(stage = "genq", bank = %path.display(), "{w}");
                }
                let templates: BTreeMap<String, String> = bank
                    .roles()
                    .map(|r| (r.to_string(), bank.template(r).unwrap_or_default().to_string()))
                    .collect();
                run.write(
                    ctx.out_file(&format!("bank_{}.json", strat.as_str())),
                    &questions_io::bank_to_string(&templates),
                )?;
                println!("{strat} bank: {} roles, {} warnings", bank.len(), warnings.len());
            }
        }
    }
    if !a.contextualized.is_empty() {
        let corpus = a
            .corpus
            .clone()
            .or_else(|| ctx.cfg.corpus.train.clone())
            .ok_or_else(|| Error::Config("--contextualized needs --corpus".into()))?;
        let docs = ctx.read_corpus(&corpus, &a.profile, ontology.as_ref(), &mut run)?;
        let mut all = ContextualizedQuestions::new();
        for p in &a.contextualized {
            run.input(p);
            let q = questions_io::read_contextualized(p, &docs)?;
            all.entries.extend(q.entries);
        }
        let examples = build_qg_training_set(&docs, &all);
        run.write(ctx.out_file("contextualized.jsonl"), &questions_io::contextualized_to_string(&all))?;
        run.write(ctx.out_file("qg_train.jsonl"), &questions_io::qg_training_to_string(&examples))?;
        println!("{} contextualized questions, {} QG training examples", all.question_count(), examples.len());
    }
    ctx.finish(run, "genq", None, json!({}))
}

fn qg_prompts(ctx: &Ctx, a: QgPromptsArgs, mut run: RunRecord) -> Result<()> {
    let ontology = ctx.require_ontology(&a.ontology, &mut run)?;
    let assets = ctx.assets(&mut run);
    let seed = ctx.seed(a.seed);
    let (mode, exemplars, name) = match a.mode {
        PromptMode::Zero => (RolePromptMode::Zero, Vec::new(), "role_prompt_zero.txt"),
        PromptMode::Few => {
            let path = a
                .exemplars
                .clone()
                .ok_or_else(|| Error::Config("few mode needs --exemplars".into()))?;
            run.input(&path);
            let mut entries = questions_io::parse_bank_entries(&io::read_to_string(&path)?)
                .map_err(|m| Error::Data(format!("{}: {m}", path.display())))?;
            let mut rng = SeededRng::new(seed);
            entries.shuffle(&mut rng);
            entries.truncate(FEW_SHOT_EXEMPLARS);
            (RolePromptMode::Few, entries, "role_prompt_few.txt")
        }
    };
    let prompt = emit_role_prompt(&ontology, mode, &exemplars, &assets).map_err(Error::data)?;
    run.write(ctx.out_file(name), &prompt)?;
    if let Some(corpus) = &a.corpus {
        let docs = ctx.read_corpus(corpus, &a.profile, Some(&ontology), &mut run)?;
        let mut chosen: Vec<&AnnotatedDocument> = docs.iter().collect();
        if let Some(n) = a.sample {
            let mut rng = SeededRng::new(seed);
            chosen.shuffle(&mut rng);
            chosen.truncate(n);
            chosen.sort_by_key(|d| d.doc_id());
        }
        let mut lines = Vec::new();
        for item in chosen {
            for (e, ev) in item.events.iter().enumerate() {
                let mut roles: Vec<&str> = ev.arguments.iter().map(|x| x.role.as_str()).collect();
                roles.dedup();
                let mut seen = std::collections::BTreeSet::new();
                for role in roles.into_iter().filter(|r| seen.insert(*r)) {
                    let p = emit_contextualized_qg_prompt(&item.document, ev, role, &assets);
                    lines.push(json!({"doc_id": item.doc_id(), "event_index": e, "role": role, "prompt": p}));
                }
            }
        }
        run.write(ctx.out_file("contextualized_prompts.jsonl"), &io::to_jsonl(&lines))?;
        println!("{} contextualized prompts", lines.len());
    }
    println!("wrote {}", ctx.out_file(name).display());
    ctx.finish(run, "qg-prompts", Some(seed), json!({ "mode": format!("{:?}", a.mode) }))
}

fn augment(ctx: &Ctx, a: AugmentArgs, mut run: RunRecord) -> Result<()> {
    use rayon::prelude::*;
    let method = match (a.method, &ctx.cfg.augment.method) {
        (Some(m), _) => m,
        (None, Some(name)) => MethodArg::from_str(name, true).map_err(|e| Error::Config(format!("augment.method: {e}")))?,
        (None, None) => return Err(Error::Config("--method is required".into())),
    };
    let seed = ctx.seed(a.seed);
    let strict_inter = a.strict_inter || ctx.cfg.augment.strict_inter.unwrap_or(false);
    let ontology = ctx.ontology(&a.corpus.ontology, &mut run)?;
    let path = ctx.corpus_path(&a.corpus)?;
    let docs = ctx.read_corpus(&path, &a.corpus.profile, ontology.as_ref(), &mut run)?;

    let mut derived = Vec::new();
    let mut skipped = Vec::new();
    let mut unaligned = Vec::new();
    if method == MethodArg::ParaAlign {
        let pp = a
            .paraphrases
            .clone()
            .ok_or_else(|| Error::Config("para-align needs --paraphrases".into()))?;
        run.input(&pp);
        let index = eaqa_core::questiongen::index_corpus(&docs);
        for rec in augment_io::read_paraphrases(&pp)? {
            let item = index
                .get(rec.doc_id.as_str())
                .ok_or_else(|| Error::Data(format!("paraphrase for unknown document {}", rec.doc_id)))?;
            match align_paraphrase(item, &rec.text, rec.scope()).map_err(Error::data)? {
                AlignOutcome::Aligned(inst) => derived.push(inst),
                AlignOutcome::Unalignable { missing } => {
                    tracing::warn!(stage = "augment", doc_id = %rec.doc_id, missing = %missing, "paraphrase not alignable");
                    unaligned.push(json!({"doc_id": rec.doc_id, "sentence": rec.sentence, "missing": missing}));
                }
            }
        }
    } else {
        let chains = match &a.coref.clone().or_else(|| ctx.cfg.corpus.coref.clone()) {
            Some(p) => {
                run.input(p);
                Some(corpus_io::read_coref_chains(p, &docs)?)
            }
            None => None,
        };
        let core_method = match method {
            MethodArg::Swap => AugmentMethod::SimpleSwap,
            MethodArg::VerboseSwap => AugmentMethod::VerboseSwap,
            MethodArg::CorefRandom => AugmentMethod::CorefRandom,
            MethodArg::CorefMeaningful => AugmentMethod::CorefMeaningful,
            MethodArg::ParaAlign => unreachable!(),
        };
        if matches!(core_method, AugmentMethod::CorefRandom | AugmentMethod::CorefMeaningful) && chains.is_none() {
            return Err(Error::Config("coreference methods need --coref".into()));
        }
        let plan = AugmentPlan {
            method: core_method,
            seed,
            options: SwapOptions { strict_inter },
            chains: chains.as_ref(),
        };
        let results: Vec<_> = docs.par_iter().map(|d| augment_document(d, &plan)).collect();
        for (made, skip) in results {
            derived.extend(made);
            skipped.extend(skip);
        }
    }

    let mut output: Vec<AnnotatedDocument> = if a.derived_only { Vec::new() } else { docs.clone() };
    output.extend(derived.iter().map(|d| d.item.clone()));
    run.write(ctx.out_file("augmented.jsonl"), &corpus_io::corpus_to_string(&output))?;
    run.write(ctx.out_file("provenance.jsonl"), &augment_io::provenance_to_string(&derived))?;
    run.write(ctx.out_file("skipped.jsonl"), &augment_io::skipped_to_string(&skipped))?;
    if !unaligned.is_empty() {
        run.write(ctx.out_file("unaligned.jsonl"), &io::to_jsonl(&unaligned))?;
    }
    let before = inter_sentential_rate(&docs);
    let after = inter_sentential_rate(&output);
    println!(
        "{} derived, {} skipped; inter-sentential rate {:.4} -> {:.4}",
        derived.len(),
        skipped.len(),
        before,
        after
    );
    ctx.finish(
        run,
        "augment",
        Some(seed),
        json!({ "method": format!("{method:?}"), "strict_inter": strict_inter, "derived_only": a.derived_only }),
    )
}

fn build_qa(ctx: &Ctx, a: BuildQaArgs, mut run: RunRecord) -> Result<()> {
    let ontology = ctx.require_ontology(&a.ontology, &mut run)?;
    let c = &ctx.cfg.corpus;
    let paths = [
        (Split::Train, a.train.clone().or_else(|| c.train.clone())),
        (Split::Dev, a.dev.clone().or_else(|| c.dev.clone())),
        (Split::Test, a.test.clone().or_else(|| c.test.clone())),
    ];
    let mut corpora: Vec<(Split, Vec<AnnotatedDocument>)> = Vec::new();
    for (split, p) in paths {
        if let Some(p) = p {
            corpora.push((split, ctx.read_corpus(&p, &a.profile, Some(&ontology), &mut run)?));
        }
    }
    if corpora.is_empty() {
        return Err(Error::Config("no corpus split given (--train/--dev/--test)".into()));
    }

    let p = &ctx.cfg.policy;
    let train_names = a
        .train_strategies
        .clone()
        .or_else(|| p.train_strategies.clone())
        .unwrap_or_else(|| vec!["template".into()]);
    let policy = MixPolicy {
        train_strategies: train_names.iter().map(|s| strategy(s)).collect::<Result<_>>()?,
        test_strategy: strategy(a.test_strategy.as_deref().or(p.test_strategy.as_deref()).unwrap_or("template"))?,
        contextualized_per_role_cap: a
            .cap
            .or(p.contextualized_per_role_cap)
            .unwrap_or(eaqa_core::questiongen::CONTEXTUALIZED_QUESTIONS_PER_ROLE),
        context_window: a.context_window.or(p.context_window),
    };
    policy.validate().map_err(|e| Error::Config(e.to_string()))?;

    let mut sources = QuestionSources {
        lexicon: ctx.lexicon(&mut run)?,
        ..QuestionSources::default()
    };
    for (flag, strat) in [(&a.bank_zero, QuestionStrategy::PromptZero), (&a.bank_few, QuestionStrategy::PromptFew)] {
        if let Some(path) = ctx.bank_path(flag, strat) {
            run.input(&path);
            let (bank, warnings) = questions_io::read_question_bank(&path, strat, &ontology)?;
            for w in &warnings {
                tracing::warn!(stage = "build-qa", bank = %path.display(), "{w}");
            }
            sources.banks.insert(strat, bank);
        }
    }
    let mut ctx_sources: Vec<(PathBuf, String)> = ctx
        .cfg
        .questions
        .contextualized
        .iter()
        .map(|c| (c.path.clone(), c.split.clone()))
        .collect();
    for spec in &a.contextualized {
        let (path, split) = match spec.rsplit_once(':') {
            Some((p, s)) if s.parse::<Split>().is_ok() => (PathBuf::from(p), s.to_string()),
            _ => (PathBuf::from(spec), "train".to_string()),
        };
        ctx_sources.push((path, split));
    }
    let all_docs: Vec<AnnotatedDocument> = corpora.iter().flat_map(|(_, d)| d.iter().cloned()).collect();
    for (path, split) in ctx_sources {
        run.input(&path);
        let split: Split = split.parse().map_err(|e: eaqa_core::qadata::QaError| Error::Config(e.to_string()))?;
        sources.contextualized.push((split, questions_io::read_contextualized(&path, &all_docs)?));
    }

    let splits: Vec<SplitCorpus> = corpora
        .iter()
        .map(|(split, docs)| SplitCorpus {
            split: *split,
            documents: docs,
        })
        .collect();
    let dataset = build_qa_dataset(&splits, &ontology, &sources, &policy).map_err(Error::data)?;
    let report = dataset_report(&dataset);
    run.write(ctx.out_file("qa.jsonl"), &qa_io::dataset_to_string(&dataset))?;
    let per_split: BTreeMap<&str, usize> = report.per_split.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let per_strategy: BTreeMap<&str, usize> = report.per_strategy.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let report_json = json!({
        "total": report.total,
        "per_split": per_split,
        "per_strategy": per_strategy,
        "answerable": report.answerable,
        "no_answer": report.no_answer,
        "multi_instance": report.multi_instance,
    });
    run.write(ctx.out_file("qa_report.json"), &io::to_pretty_json(&report_json))?;
    println!(
        "{} instances ({} answerable, {} no answer)",
        report.total, report.answerable, report.no_answer
    );
    ctx.finish(
        run,
        "build-qa",
        None,
        json!({
            "train_strategies": train_names,
            "test_strategy": policy.test_strategy.as_str(),
            "cap": policy.contextualized_per_role_cap,
            "context_window": policy.context_window,
        }),
    )
}

fn endpoint_config(ctx: &Ctx, a: &LlmExtractArgs, run: &mut RunRecord) -> Result<EndpointConfig> {
    let mut cfg = match &a.endpoint {
        Some(p) => {
            run.input(p);
            toml::from_str(&io::read_to_string(p)?).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => match &ctx.cfg.endpoint {
            Some(e) => e.clone(),
            None => {
                let (Some(url), Some(model)) = (&a.url, &a.model) else {
                    return Err(Error::Config("endpoint needs --endpoint, [endpoint] or --url and --model".into()));
                };
                EndpointConfig::new(url.clone(), model.clone(), "EAQA_API_KEY")
            }
        },
    };
    if let Some(u) = &a.url {
        cfg.url = u.clone();
    }
    if let Some(m) = &a.model {
        cfg.model = m.clone();
    }
    if let Some(k) = &a.api_key_env {
        cfg.api_key_env = k.clone();
    }
    cfg.validate().map_err(|m| Error::Config(format!("endpoint: {m}")))?;
    Ok(cfg)
}

fn llm_extract(ctx: &Ctx, a: LlmExtractArgs, mut run: RunRecord) -> Result<()> {
    let ontology = ctx.require_ontology(&a.corpus.ontology, &mut run)?;
    let path = ctx.corpus_path(&a.corpus)?;
    let docs = ctx.read_corpus(&path, &a.corpus.profile, Some(&ontology), &mut run)?;
    let assets = ctx.assets(&mut run);
    let lexicon = ctx.lexicon(&mut run)?;
    let seed = ctx.seed(a.seed);
    let bank = match &a.bank {
        Some(p) => {
            run.input(p);
            Some(questions_io::read_question_bank(p, strategy(&a.bank_strategy)?, &ontology)?.0)
        }
        None => None,
    };
    let source = match &bank {
        Some(b) => QuestionSource::Bank(b),
        None => QuestionSource::Template(&lexicon),
    };
    let train_docs = match a.shots {
        ShotsArg::Zero => Vec::new(),
        ShotsArg::Few => {
            let p = a
                .exemplars_from
                .clone()
                .or_else(|| ctx.cfg.corpus.train.clone())
                .ok_or_else(|| Error::Config("few-shot extraction needs --exemplars-from".into()))?;
            ctx.read_corpus(&p, &a.corpus.profile, Some(&ontology), &mut run)?
        }
    };
    let pool = exemplar_pool(&train_docs);
    let shots = match a.shots {
        ShotsArg::Zero => Shots::Zero,
        ShotsArg::Few => Shots::Few,
    };
    let system_id = a.system_id.clone().unwrap_or_else(|| {
        format!("llm-{}{}", if shots == Shots::Zero { "zero" } else { "few" }, if a.one_per_call { "-single" } else { "" })
    });
    let job = ExtractionRun {
        ontology: &ontology,
        source,
        assets: &assets,
        shots,
        exemplar_pool: &pool,
        seed,
        one_per_call: a.one_per_call,
        system_id: &system_id,
    };
    let plan = job.plan(&docs)?;
    let prompt_lines = io::to_jsonl(plan.iter().map(|p| {
        json!({
            "doc_id": docs[p.doc_index].doc_id(),
            "event_index": p.event_index,
            "roles": p.bundle.roles(),
            "exemplar_ids": p.bundle.exemplar_ids,
            "prompt": p.bundle.prompt,
        })
    }));
    run.write(ctx.out_file("prompts.jsonl"), &prompt_lines)?;
    let params = json!({ "shots": format!("{shots:?}"), "one_per_call": a.one_per_call, "system_id": system_id });
    if a.dry_run {
        println!("{} prompts written (dry run)", plan.len());
        return ctx.finish(run, "llm-extract", Some(seed), params);
    }
    let endpoint = endpoint_config(ctx, &a, &mut run)?;
    let cache_dir = a
        .cache_dir
        .clone()
        .or_else(|| ctx.cfg.cache_dir.clone())
        .unwrap_or_else(|| ctx.out_file("cache"));
    let in_flight = endpoint.max_in_flight;
    let client = Client::new(endpoint, UreqTransport, Some(CompletionCache::new(cache_dir)));
    let limited = rayon::ThreadPoolBuilder::new()
        .num_threads(in_flight.min(rayon::current_num_threads()).max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let (preds, warnings) = limited.install(|| job.execute(&docs, &client))?;
    run.write(ctx.out_file("predictions.jsonl"), &scoring_io::predictions_to_string(&preds))?;
    println!(
        "{} predictions from {} prompts; {} network calls; {} parse warnings",
        preds.len(),
        plan.len(),
        client.network_calls(),
        warnings.len()
    );
    ctx.finish(run, "llm-extract", Some(seed), params)
}

fn load_scoring_inputs(
    ctx: &Ctx,
    pred: &Path,
    gold: &Path,
    profile: &Option<String>,
    run: &mut RunRecord,
) -> Result<(Vec<scoring::PredictionRecord>, Vec<AnnotatedDocument>)> {
    run.input(pred);
    let preds = scoring_io::read_predictions(pred)?;
    let gold = ctx.read_corpus(gold, profile, None, run)?;
    Ok((preds, gold))
}

fn score(ctx: &Ctx, a: ScoreArgs, mut run: RunRecord) -> Result<()> {
    let (mut preds, gold) = load_scoring_inputs(ctx, &a.pred, &a.gold, &a.profile, &mut run)?;
    let strict = scoring::score_strict(&preds, &gold).map_err(Error::data)?;
    let lenient = if a.lenient {
        attach_span_text(&mut preds, &gold);
        Some(scoring::score_lenient(&preds, &gold).map_err(Error::data)?)
    } else {
        None
    };
    let report = ReportFile {
        system_id: preds.first().map(|p| p.system_id.clone()),
        strict,
        lenient,
    };
    run.write(ctx.out_file("report.json"), &scoring_io::report_to_string(&report))?;
    print!("{}", scoring_io::render_table(&report));
    ctx.finish(run, "score", None, json!({ "lenient": a.lenient }))
}

fn analyze(ctx: &Ctx, a: AnalyzeArgs, mut run: RunRecord) -> Result<()> {
    let (preds, gold) = load_scoring_inputs(ctx, &a.pred, &a.gold, &a.profile, &mut run)?;
    let chains = match a.coref.clone().or_else(|| ctx.cfg.corpus.coref.clone()) {
        Some(p) => {
            run.input(&p);
            Some(corpus_io::read_coref_chains(&p, &gold)?)
        }
        None => {
            tracing::warn!(stage = "analyze", "no coreference chains; alternative-span errors cannot be detected");
            None
        }
    };
    let options = AnalysisOptions {
        top_k_events: a.top_k,
        top_k_roles: a.top_k,
    };
    let strict = scoring::analyze(&preds, &gold, chains.as_ref(), options).map_err(Error::data)?;
    if let Some(m) = &strict.confusion {
        run.write(ctx.out_file("confusion.csv"), &scoring_io::confusion_to_csv(m))?;
        run.write(ctx.out_file("confusion_top.csv"), &scoring_io::confusion_to_csv(&m.collapsed(a.top_k)))?;
    }
    if let Some(errors) = &strict.errors {
        run.write(ctx.out_file("errors.jsonl"), &scoring_io::error_review_sheet(errors, &gold))?;
    }
    if let Some(base) = &a.baseline {
        run.input(base);
        let base_preds = scoring_io::read_predictions(base)?;
        let base_report = scoring::analyze(&base_preds, &gold, None, options).map_err(Error::data)?;
        let delta = scoring::distance_delta(
            base_report.by_distance.as_ref().expect("analyze fills distance"),
            strict.by_distance.as_ref().expect("analyze fills distance"),
        );
        let value: BTreeMap<String, Option<f64>> = delta.into_iter().map(|(k, v)| (k.label(), v)).collect();
        run.write(ctx.out_file("distance_delta.json"), &io::to_pretty_json(&value))?;
        for (k, v) in &value {
            match v {
                Some(d) => println!("distance {k:>3}: {d:+.2}% F1"),
                None => println!("distance {k:>3}: n/a"),
            }
        }
    }
    let report = ReportFile {
        system_id: preds.first().map(|p| p.system_id.clone()),
        strict,
        lenient: None,
    };
    run.write(ctx.out_file("analysis.json"), &scoring_io::report_to_string(&report))?;
    print!("{}", scoring_io::render_table(&report));
    ctx.finish(run, "analyze", None, json!({ "top_k": a.top_k }))
}
