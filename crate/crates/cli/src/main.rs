mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hardcoref::docmodel::{dataset_stats, load_corpus, Document};
use hardcoref::eval::{self, Metric};
use hardcoref::infer::{self, ConstraintParams, Prediction, SystemConfig, Variant};
use hardcoref::kb::{self, BuildConfig, KnowledgeBase, PolarityLexicon, WebCache};
use hardcoref::model::{train_blmp, ModelWeights, TrainConfig};
use hardcoref::scoring::{self, DocKnowledge, KnowledgeView, DIM_NAMES};
use hardcoref::{fixtures, Category};
use serde::Serialize;

use config::{pick, ExperimentConfig, CONFIG_ENV};

#[derive(Parser, Debug)]
#[command(
    name = "hardcoref",
    version,
    about = "Hard pronoun coreference with predicate-schema knowledge"
)]
struct Cli {
    /// TOML experiment config; flags override its values
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build type1/type2/wiki stores from a JSONL corpus
    BuildKb {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        shards: Option<usize>,
        /// Copy this web count cache into the knowledge base
        #[arg(long)]
        web_cache: Option<PathBuf>,
        /// Copy this polarity lexicon into the knowledge base
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = hardcoref::extract::NEIGHBOR_WINDOW)]
        neighbor_window: usize,
        #[arg(long, default_value_t = kb::WIKI_WINDOW)]
        wiki_window: usize,
    },
    /// Train a best-link model for a system variant
    Train {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Write the per-epoch training report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Predict coreference links with a trained model
    Resolve {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tau_margin: Option<f64>,
        /// Dump every pronoun-candidate score vector as TSV
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Score predictions against gold documents
    Eval {
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long, default_value = "antepre,muc,bcub,ceafe")]
        metrics: String,
        /// Also write the report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Knowledge ablation: AntePre per schema type or per category
    Ablate {
        #[arg(long, value_enum)]
        by: AblateBy,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Document, mention and pronoun counts of JSONL datasets
    Stats {
        #[arg(required = true)]
        data: Vec<PathBuf>,
    },
    /// List the web queries a dataset needs and merge supplied counts
    CacheFill {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Cache to update (created if absent)
        #[arg(long)]
        cache: Option<PathBuf>,
        /// TSV of `query<TAB>count` to add to the cache
        #[arg(long)]
        counts: Option<PathBuf>,
        /// Where to write queries still missing, one per line
        #[arg(long)]
        missing: Option<PathBuf>,
    },
    /// Write the bundled synthetic fixtures
    MakeFixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AblateBy {
    SchemaType,
    Category,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = ExperimentConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::BuildKb {
            corpus,
            out,
            shards,
            web_cache,
            lexicon,
            neighbor_window,
            wiki_window,
        } => {
            let corpus = pick(corpus, &cfg.paths.corpus, "--corpus")?;
            let out = pick(out, &cfg.paths.kb, "--out")?;
            let shards = shards.or(cfg.shards).unwrap_or(1);
            let web_cache = web_cache.or_else(|| cfg.paths.web_cache.clone());
            let lexicon = lexicon.or_else(|| cfg.paths.lexicon.clone());
            build_kb(
                &corpus,
                &out,
                shards,
                web_cache.as_deref(),
                lexicon.as_deref(),
                neighbor_window,
                wiki_window,
            )
        }
        Command::Train {
            data,
            kb,
            variant,
            out,
            epochs,
            seed,
            learning_rate,
            report,
        } => {
            let data = pick(data, &cfg.paths.train, "--data")?;
            let out = pick(out, &cfg.paths.model, "--out")?;
            let variant = variant_of(variant, &cfg)?;
            let kb = load_kb(kb.or_else(|| cfg.paths.kb.clone()).as_deref(), variant)?;
            let defaults = TrainConfig::default();
            let tc = TrainConfig {
                with_schema: variant.schema_features(),
                epochs: epochs.or(cfg.epochs).unwrap_or(defaults.epochs),
                learning_rate: learning_rate
                    .or(cfg.learning_rate)
                    .unwrap_or(defaults.learning_rate),
                seed: seed.or(cfg.seed).unwrap_or(defaults.seed),
                view: KnowledgeView::All,
            };
            train(&data, &kb, &tc, &out, report.as_deref())
        }
        Command::Resolve {
            data,
            model,
            kb,
            variant,
            out,
            tau_margin,
            scores,
        } => {
            let data = pick(data, &cfg.paths.test, "--data")?;
            let model_path = pick(model, &cfg.paths.model, "--model")?;
            let out = pick(out, &cfg.paths.predictions, "--out")?;
            let variant = variant_of(variant, &cfg)?;
            let kb = load_kb(kb.or_else(|| cfg.paths.kb.clone()).as_deref(), variant)?;
            let sys = system_config(tau_margin.or(cfg.tau_margin), KnowledgeView::All);
            resolve(
                &data,
                &model_path,
                &kb,
                variant,
                &sys,
                &out,
                scores.as_deref(),
            )
        }
        Command::Eval {
            gold,
            pred,
            metrics,
            json,
        } => {
            let gold = pick(gold, &cfg.paths.test, "--gold")?;
            let pred = pick(pred, &cfg.paths.predictions, "--pred")?;
            let metrics = Metric::parse_list(&metrics)?;
            if metrics.is_empty() {
                bail!("--metrics selects nothing");
            }
            evaluate(&gold, &pred, &metrics, json.as_deref())
        }
        Command::Ablate {
            by,
            train,
            test,
            kb,
            variant,
            json,
        } => {
            let train = pick(train, &cfg.paths.train, "--train")?;
            let test = pick(test, &cfg.paths.test, "--test")?;
            let variant = match variant.or_else(|| cfg.variant.clone()) {
                Some(v) => v.parse()?,
                None => Variant::KnowComb,
            };
            let kb = load_kb(kb.or_else(|| cfg.paths.kb.clone()).as_deref(), variant)?;
            let defaults = TrainConfig::default();
            let tc = TrainConfig {
                with_schema: variant.schema_features(),
                epochs: cfg.epochs.unwrap_or(defaults.epochs),
                learning_rate: cfg.learning_rate.unwrap_or(defaults.learning_rate),
                seed: cfg.seed.unwrap_or(defaults.seed),
                view: KnowledgeView::All,
            };
            ablate(
                by,
                &train,
                &test,
                &kb,
                variant,
                &tc,
                cfg.tau_margin,
                json.as_deref(),
            )
        }
        Command::Stats { data } => {
            for path in data {
                let docs = load_corpus(&path)?;
                println!("# {}", path.display());
                println!("{}", dataset_stats(&docs));
            }
            Ok(())
        }
        Command::CacheFill {
            data,
            cache,
            counts,
            missing,
        } => {
            let data = pick(data, &cfg.paths.test, "--data")?;
            let cache = pick(cache, &cfg.paths.web_cache, "--cache")?;
            cache_fill(&data, &cache, counts.as_deref(), missing.as_deref())
        }
        Command::MakeFixtures { out } => {
            fixtures::write_bundle(&out)?;
            for name in fixtures::BUNDLE_FILES {
                println!("{}", out.join(name).display());
            }
            Ok(())
        }
    }
}

fn variant_of(flag: Option<String>, cfg: &ExperimentConfig) -> Result<Variant> {
    let name = pick(flag, &cfg.variant, "--variant")?;
    Ok(name.parse()?)
}

fn system_config(tau: Option<f64>, view: KnowledgeView) -> SystemConfig {
    let mut constraints = ConstraintParams::default();
    if let Some(t) = tau {
        constraints.tau_margin = t;
    }
    SystemConfig { constraints, view }
}

/// Knowledge base for a variant. Variants without schema knowledge run
/// without one.
fn load_kb(dir: Option<&Path>, variant: Variant) -> Result<KnowledgeBase> {
    let needs = variant.schema_features() || variant.schema_constraints();
    match dir {
        Some(d) if needs => Ok(KnowledgeBase::load(d)?),
        None if needs => bail!("{variant} needs --kb"),
        _ => Ok(KnowledgeBase::empty()),
    }
}

fn build_kb(
    corpus: &Path,
    out: &Path,
    shards: usize,
    web_cache: Option<&Path>,
    lexicon: Option<&Path>,
    neighbor_window: usize,
    wiki_window: usize,
) -> Result<()> {
    let docs = load_corpus(corpus)?;
    let bc = BuildConfig {
        neighbor_window,
        wiki_window,
    };
    let (stores, report) = kb::build_corpus_stores(&docs, shards, &bc);
    let mut base = KnowledgeBase::from_corpus(stores);
    if let Some(p) = web_cache {
        base.web = WebCache::load(p)?;
    }
    if let Some(p) = lexicon {
        base.polarity = PolarityLexicon::load(p)?;
    }
    base.save(out)?;
    let text = report.to_string();
    let path = out.join(kb::REPORT_FILE);
    std::fs::write(&path, format!("{text}\n"))
        .with_context(|| format!("writing {}", path.display()))?;
    println!("{text}");
    Ok(())
}

fn train(
    data: &Path,
    kb: &KnowledgeBase,
    tc: &TrainConfig,
    out: &Path,
    report_path: Option<&Path>,
) -> Result<()> {
    let docs = load_corpus(data)?;
    let (model, report) = train_blmp(&docs, kb, tc)?;
    model.save(out)?;
    for (i, (ap, up)) in report
        .epoch_antepre
        .iter()
        .zip(&report.updates_per_epoch)
        .enumerate()
    {
        println!("epoch {:>3}  antepre {:.4}  updates {}", i + 1, ap, up);
    }
    if let Some(p) = report_path {
        let json = serde_json::to_string_pretty(&report)?;
        std::fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    println!("model written to {} (seed {})", out.display(), tc.seed);
    Ok(())
}

fn resolve(
    data: &Path,
    model_path: &Path,
    kb: &KnowledgeBase,
    variant: Variant,
    sys: &SystemConfig,
    out: &Path,
    scores: Option<&Path>,
) -> Result<()> {
    let model = ModelWeights::load(model_path)?;
    let docs = load_corpus(data)?;
    let preds = infer::run_system(variant, &docs, &model, kb, sys)?;
    infer::save_predictions(&preds, out)?;
    if let Some(p) = scores {
        std::fs::write(p, score_dump(&docs, kb))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    let links = preds
        .iter()
        .flat_map(|p| &p.links)
        .filter(|l| l.v.is_some())
        .count();
    let forced = preds.iter().flat_map(|p| &p.constraints).count();
    println!(
        "{variant}: {} documents, {links} links, {forced} constraints -> {}",
        preds.len(),
        out.display()
    );
    Ok(())
}

fn score_dump(docs: &[Document], kb: &KnowledgeBase) -> String {
    let mut out = format!("doc_id\tanaphor\tcandidate\t{}\n", DIM_NAMES.join("\t"));
    for doc in docs {
        let dk = DocKnowledge::new(doc, kb);
        for u in doc.target_pronouns() {
            for v in doc.candidate_entities(u) {
                let s = scoring::score_pair(doc, &dk, kb, u, v, KnowledgeView::All);
                let cells: Vec<String> = s.as_slice().iter().map(|x| format!("{x}")).collect();
                let _ = writeln!(out, "{}\t{u}\t{v}\t{}", doc.doc_id, cells.join("\t"));
            }
        }
    }
    out
}

fn evaluate(gold: &Path, pred: &Path, metrics: &[Metric], json: Option<&Path>) -> Result<()> {
    let golds = load_corpus(gold)?;
    let preds = infer::load_predictions(pred)?;
    let report = eval::evaluate(&golds, &preds, metrics)?;
    println!("{report}");
    if let Some(p) = json {
        let text = serde_json::to_string_pretty(&report)?;
        std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AblationRow {
    setting: String,
    subset: String,
    antepre: f64,
    correct: usize,
    total: usize,
}

fn antepre_rows(
    setting: &str,
    test: &[Document],
    preds: &[Prediction],
) -> Result<Vec<AblationRow>> {
    let mut subsets: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    subsets.insert("all".into(), test.to_vec());
    for cat in Category::ALL {
        let docs: Vec<Document> = test
            .iter()
            .filter(|d| d.category == Some(cat))
            .cloned()
            .collect();
        if !docs.is_empty() {
            subsets.insert(cat.to_string(), docs);
        }
    }
    let mut rows = Vec::new();
    for (name, docs) in subsets {
        let r = eval::evaluate(&docs, preds, &[Metric::AntePre])?;
        let a = r.antepre.expect("requested");
        rows.push(AblationRow {
            setting: setting.to_string(),
            subset: name,
            antepre: a.value,
            correct: a.correct,
            total: a.total,
        });
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn ablate(
    by: AblateBy,
    train_path: &Path,
    test_path: &Path,
    kb: &KnowledgeBase,
    variant: Variant,
    tc: &TrainConfig,
    tau: Option<f64>,
    json: Option<&Path>,
) -> Result<()> {
    let train_docs = load_corpus(train_path)?;
    let test = load_corpus(test_path)?;
    let views: &[(&str, KnowledgeView)] = match by {
        AblateBy::SchemaType => &[
            ("all", KnowledgeView::All),
            ("type1", KnowledgeView::Type1Only),
            ("type2", KnowledgeView::Type2Only),
            ("none", KnowledgeView::None),
        ],
        AblateBy::Category => &[("all", KnowledgeView::All)],
    };
    let mut rows = Vec::new();
    for &(name, view) in views {
        let tc = TrainConfig { view, ..tc.clone() };
        let (model, _) = train_blmp(&train_docs, kb, &tc)?;
        let preds = infer::run_system(variant, &test, &model, kb, &system_config(tau, view))?;
        rows.extend(antepre_rows(name, &test, &preds)?);
    }
    println!(
        "{:<8} {:<6} {:>8} {:>9}",
        "schema", "subset", "AntePre", "pairs"
    );
    for r in &rows {
        println!(
            "{:<8} {:<6} {:>8.2} {:>9}",
            r.setting,
            r.subset,
            100.0 * r.antepre,
            format!("{}/{}", r.correct, r.total)
        );
    }
    if let Some(p) = json {
        std::fs::write(p, serde_json::to_string_pretty(&rows)? + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn cache_fill(
    data: &Path,
    cache_path: &Path,
    counts: Option<&Path>,
    missing: Option<&Path>,
) -> Result<()> {
    let mut cache = if cache_path.exists() {
        WebCache::load(cache_path)?
    } else {
        WebCache::new()
    };
    if let Some(p) = counts {
        let text =
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((q, n)) = line.split_once('\t') else {
                bail!("{}:{}: expected `query<TAB>count`", p.display(), i + 1);
            };
            let n: f64 = n
                .trim()
                .parse()
                .with_context(|| format!("{}:{}: bad count", p.display(), i + 1))?;
            cache.insert(q, n)?;
        }
    }
    let docs = load_corpus(data)?;
    let empty = KnowledgeBase::empty();
    for doc in &docs {
        let dk = DocKnowledge::new(doc, &empty);
        for u in doc.target_pronouns() {
            for v in doc.candidate_entities(u) {
                if let Some(q) = scoring::pair_web_queries(doc, &dk, u, v) {
                    cache.query(&q);
                }
            }
        }
    }
    cache.save(cache_path)?;
    let missed = cache.missed_queries();
    if let Some(p) = missing {
        let mut text = missed.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    println!(
        "{} cached queries, {} still missing",
        cache.len(),
        missed.len()
    );
    Ok(())
}
