//! `pmr` command line: a thin wrapper over [`pmr::pipeline`].

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pmr::labeler::OptimizerKind;
use pmr::pipeline::{self, Engine, LabelMode, PipelineConfig, PipelineError};
use pmr::profile::{parse_demographic, GeneSpec, PatientProfile};
use pmr::ranker::FormulaVariant;
use pmr::service::{self, AppState};

#[derive(Parser, Debug)]
#[command(name = "pmr", version, about = "Precision-medicine article retrieval")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    paths: PathFlags,

    #[command(flatten)]
    ranking: RankingFlags,

    #[command(flatten)]
    toggles: ToggleFlags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct PathFlags {
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Index snapshot file.
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    /// Directory holding diseases.tsv, genes.tsv, variants.tsv, drugs.tsv, journals.tsv.
    #[arg(long, global = true)]
    ontology: Option<PathBuf>,
    #[arg(long, global = true)]
    topics: Option<PathBuf>,
    #[arg(long, global = true)]
    qrels: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true)]
    run: Option<PathBuf>,
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[arg(long, global = true)]
    tag: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct RankingFlags {
    #[arg(long, global = true)]
    k: Option<f64>,
    #[arg(long, global = true)]
    ws: Option<f64>,
    #[arg(long, global = true)]
    wh: Option<f64>,
    #[arg(long, global = true)]
    wy: Option<f64>,
    #[arg(long = "h-axis", global = true)]
    h_axis: Option<f64>,
    #[arg(long = "y-axis", global = true)]
    y_axis: Option<f64>,
    #[arg(long, global = true)]
    ch: Option<f64>,
    #[arg(long, global = true)]
    cy: Option<f64>,
    /// `additive` or `as_printed`.
    #[arg(long, global = true)]
    formula: Option<FormulaVariant>,
}

#[derive(Args, Debug)]
struct ToggleFlags {
    #[arg(long = "no-labeler", global = true)]
    no_labeler: bool,
    #[arg(long = "no-rerank", global = true)]
    no_rerank: bool,
    #[arg(long = "no-variants", global = true)]
    no_variants: bool,
    /// Demote instead of removing articles labeled irrelevant.
    #[arg(long, global = true)]
    demote: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ingest the corpus and write the index snapshot.
    Index,
    /// Print the ontology expansion of every topic as JSON.
    Expand,
    /// Search a single profile.
    Search(SearchArgs),
    /// Train the relevance labeler from qrels.
    Train(TrainArgs),
    /// Search every topic and write a run file.
    Run,
    /// Score a run file against qrels.
    Evaluate,
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Topic id from the topics file.
    #[arg(long)]
    topic: Option<String>,
    #[arg(long)]
    disease: Option<String>,
    /// Gene entry such as `KRAS (G12C)`; repeatable.
    #[arg(long = "gene")]
    genes: Vec<String>,
    /// e.g. `61-year-old female`
    #[arg(long)]
    demographic: Option<String>,
    #[arg(long = "other")]
    other: Vec<String>,
    /// Print the query and per-clause score contributions.
    #[arg(long)]
    explain: bool,
    #[arg(long, default_value_t = 20)]
    limit: usize,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    optimizer: Option<OptimizerKind>,
    #[arg(long = "lr")]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of examples held out for accuracy reporting.
    #[arg(long)]
    holdout: Option<f64>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, env = "PMR_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "PMR_BIND", default_value = "127.0.0.1")]
    bind: String,
}

fn build_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::from_toml_file(p)?,
        None => PipelineConfig::default(),
    };
    let p = &cli.paths;
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    set(&mut cfg.corpus, &p.corpus);
    set(&mut cfg.index, &p.index);
    set(&mut cfg.ontology_dir, &p.ontology);
    set(&mut cfg.topics, &p.topics);
    set(&mut cfg.qrels, &p.qrels);
    set(&mut cfg.model, &p.model);
    set(&mut cfg.run, &p.run);
    set(&mut cfg.report, &p.report);
    if let Some(t) = &p.tag {
        cfg.tag.clone_from(t);
    }
    if let Some(d) = p.depth {
        cfg.depth = d;
    }
    if let Some(j) = p.jobs {
        cfg.jobs = j;
    }

    let r = &cli.ranking;
    let rp = &mut cfg.search.ranking;
    for (slot, v) in [
        (&mut rp.k, r.k),
        (&mut rp.w_s, r.ws),
        (&mut rp.w_h, r.wh),
        (&mut rp.w_y, r.wy),
        (&mut rp.h_axis, r.h_axis),
        (&mut rp.y_axis, r.y_axis),
        (&mut rp.c_h, r.ch),
        (&mut rp.c_y, r.cy),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(f) = r.formula {
        rp.formula = f;
    }

    let t = &cli.toggles;
    cfg.search.use_labeler &= !t.no_labeler;
    cfg.search.rerank &= !t.no_rerank;
    cfg.search.use_variants &= !t.no_variants;
    if t.demote {
        cfg.search.label_mode = LabelMode::Demote;
    }
    cfg.search.validate()?;
    Ok(cfg)
}

fn search_profile(cfg: &PipelineConfig, args: &SearchArgs) -> Result<PatientProfile, PipelineError> {
    if let Some(id) = &args.topic {
        let path = cfg.topics.clone().ok_or(PipelineError::MissingSetting("topics"))?;
        let topics = pipeline::load_topics(&path)?;
        return topics
            .into_iter()
            .find(|t| &t.id == id)
            .map(|t| t.profile)
            .ok_or_else(|| PipelineError::UnknownTopic(id.clone()));
    }
    let disease = args.disease.clone().ok_or(PipelineError::MissingSetting("disease"))?;
    let genes = args
        .genes
        .iter()
        .map(|g| GeneSpec::parse(g).ok_or_else(|| PipelineError::Config(format!("cannot parse gene `{g}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let (age, gender) = match args.demographic.as_deref().and_then(parse_demographic) {
        Some((a, g)) => (Some(a), Some(g)),
        None => (None, None),
    };
    let profile = PatientProfile {
        disease,
        genes,
        age,
        gender,
        other: args.other.clone(),
    };
    profile.validate().map_err(|errs| {
        PipelineError::Config(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })?;
    Ok(profile)
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    let mut cfg = build_config(&cli)?;
    match &cli.command {
        Command::Index => {
            let report = pipeline::cmd_index(&cfg)?;
            for issue in &report.issues {
                eprintln!("warning: {issue}");
            }
            println!(
                "read {} / kept {} / filtered {} / skipped {}",
                report.read,
                report.kept,
                report.filtered,
                report.skipped()
            );
        }
        Command::Expand => {
            let expanded = pipeline::cmd_expand(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&expanded).expect("serializable"));
        }
        Command::Search(args) => {
            let profile = search_profile(&cfg, args)?;
            let engine = Engine::load(&cfg)?;
            let outcome = engine.search(&profile, &engine.settings, &BTreeSet::new())?;
            print!("{}", pipeline::format_outcome(&engine, &outcome, args.limit, args.explain));
        }
        Command::Train(args) => {
            let l = &mut cfg.labeler;
            if let Some(o) = args.optimizer {
                l.optimizer = o;
            }
            if let Some(lr) = args.learning_rate {
                l.learning_rate = lr;
            }
            if let Some(e) = args.epochs {
                l.epochs = e;
            }
            if let Some(s) = args.seed {
                l.seed = s;
            }
            if let Some(h) = args.holdout {
                cfg.holdout = h;
            }
            let s = pipeline::cmd_train(&cfg)?;
            println!(
                "trained {} on {} examples ({} updates); train accuracy {:.4}",
                s.model.config.optimizer, s.train_examples, s.model.updates, s.train_accuracy
            );
            if let Some(acc) = s.holdout_accuracy {
                println!("holdout accuracy {acc:.4} on {} examples", s.holdout_examples);
            }
        }
        Command::Run => {
            let run = pipeline::cmd_run(&cfg)?;
            let lines: usize = run.topics.values().map(Vec::len).sum();
            println!("wrote {lines} lines for {} topics", run.topics.len());
        }
        Command::Evaluate => {
            let report = pipeline::cmd_evaluate(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.to_text());
        }
        Command::Serve(args) => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| PipelineError::Io { path: "runtime".into(), source: e })?;
            rt.block_on(async {
                let addr = format!("{}:{}", args.bind, args.port);
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .map_err(|e| PipelineError::Io { path: addr.clone().into(), source: e })?;
                let state = AppState::default();
                let loader = state.clone();
                let cfg = cfg.clone();
                tokio::task::spawn_blocking(move || match Engine::load(&cfg) {
                    Ok(engine) => {
                        tracing::info!("engine ready");
                        loader.install(engine);
                    }
                    Err(e) => tracing::error!("engine failed to load: {e}"),
                });
                tracing::info!("listening on {addr}");
                service::serve(listener, state)
                    .await
                    .map_err(|e| PipelineError::Io { path: addr.into(), source: e })
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn,pmr=info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
