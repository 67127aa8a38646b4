//! End-to-end orchestration: index, expand, search, train, run, evaluate.
//!
//! [`Engine::search`] is the single code path shared by the command line and
//! the HTTP service.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ingest_corpus, Index, IndexError, IngestReport};
use crate::evaluation::{self, MetricReport, Qrels, RunFile};
use crate::labeler::{self, extract_features, FeatureVector, Label, LabelerError, PerceptronModel, TrainConfig};
use crate::ontology::{Ontology, OntologyError, OntologyPaths};
use crate::profile::{default_treatment_keywords, expand_profile, parse_topics, ExpandOptions, ExpandedProfile, PatientProfile, Topic, TopicsError};
use crate::query::{demographic_compatible, execute, formulate_query, Query, QueryOptions, ScoredArticle};
use crate::ranker::{self, RankingParams};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("missing setting `{0}` (pass it on the command line or in the config file)")]
    MissingSetting(&'static str),
    #[error("cannot read `{}`: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Topics(#[from] TopicsError),
    #[error(transparent)]
    Labeler(#[from] LabelerError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("labeling is enabled but no model is loaded")]
    NoModel,
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("{failed} topic(s) failed")]
    TopicsFailed { failed: usize },
}

impl PipelineError {
    /// Process exit code: 2 for missing inputs, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::MissingFile(_) | PipelineError::MissingSetting(_) => 2,
            PipelineError::Ontology(OntologyError::Missing(_)) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn require(path: &Path) -> Result<(), PipelineError> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::MissingFile(path.to_path_buf()))
    }
}

fn read_text(path: &Path) -> Result<String, PipelineError> {
    require(path)?;
    fs::read_to_string(path).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

/// What to do with articles the labeler calls irrelevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LabelMode {
    #[default]
    Filter,
    Demote,
}

/// Retrieval behavior shared by every search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    pub ranking: RankingParams,
    pub query: QueryOptions,
    pub treatment_keywords: Vec<String>,
    pub use_labeler: bool,
    pub use_variants: bool,
    pub rerank: bool,
    pub label_mode: LabelMode,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            ranking: RankingParams::default(),
            query: QueryOptions::default(),
            treatment_keywords: default_treatment_keywords(),
            use_labeler: true,
            use_variants: true,
            rerank: true,
            label_mode: LabelMode::Filter,
        }
    }
}

impl SearchSettings {
    pub fn expand_options(&self) -> ExpandOptions {
        ExpandOptions {
            treatment_keywords: self.treatment_keywords.clone(),
            use_variants: self.use_variants,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.ranking.validate().map_err(PipelineError::Config)?;
        let q = &self.query;
        if !(q.should_boost > 0.0 && q.variant_boost > 0.0) {
            return Err(PipelineError::Config("clause boosts must be positive".into()));
        }
        Ok(())
    }
}

/// Everything a pipeline run needs. Loaded from TOML; every field optional
/// so command-line flags can fill gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub ontology_dir: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub run: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub tag: String,
    pub depth: usize,
    pub jobs: usize,
    /// Fraction of training examples held out for accuracy reporting.
    pub holdout: f64,
    pub search: SearchSettings,
    pub labeler: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            index: None,
            ontology_dir: None,
            topics: None,
            qrels: None,
            model: None,
            run: None,
            report: None,
            tag: "pmr".into(),
            depth: 1000,
            jobs: 1,
            holdout: 0.0,
            search: SearchSettings::default(),
            labeler: TrainConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_file(path: &Path) -> Result<PipelineConfig, PipelineError> {
        let text = read_text(path)?;
        toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    fn path(&self, value: &Option<PathBuf>, name: &'static str) -> Result<PathBuf, PipelineError> {
        value.clone().ok_or(PipelineError::MissingSetting(name))
    }

    fn existing(&self, value: &Option<PathBuf>, name: &'static str) -> Result<PathBuf, PipelineError> {
        let p = self.path(value, name)?;
        require(&p)?;
        Ok(p)
    }
}

/// Loaded, immutable retrieval state.
#[derive(Debug, Clone)]
pub struct Engine {
    pub index: Index,
    pub ontology: Ontology,
    pub model: Option<PerceptronModel>,
    pub settings: SearchSettings,
}

/// The intermediate products of one search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub expanded: ExpandedProfile,
    pub query: Query,
    /// Ranked results, rank 1 first.
    pub results: Vec<ScoredArticle>,
    pub retrieved: usize,
    pub demographic_rejected: usize,
    pub labeled_irrelevant: usize,
}

impl Engine {
    pub fn new(index: Index, ontology: Ontology, model: Option<PerceptronModel>, settings: SearchSettings) -> Engine {
        Engine { index, ontology, model, settings }
    }

    /// Load index snapshot, ontology tables and (when labeling is on) the
    /// model named by `cfg`.
    pub fn load(cfg: &PipelineConfig) -> Result<Engine, PipelineError> {
        cfg.search.validate()?;
        let index_path = cfg.existing(&cfg.index, "index")?;
        let ont_dir = cfg.path(&cfg.ontology_dir, "ontology_dir")?;
        let model_path = if cfg.search.use_labeler {
            Some(cfg.existing(&cfg.model, "model")?)
        } else {
            None
        };
        let index = load_index(&index_path)?;
        let (ontology, report) = load_ontology(&ont_dir)?;
        for w in &report.warnings {
            tracing::warn!("{w}");
        }
        let model = model_path.map(|p| load_model(&p)).transpose()?;
        Ok(Engine::new(index, ontology, model, cfg.search.clone()))
    }

    pub fn expand(&self, profile: &PatientProfile, settings: &SearchSettings) -> ExpandedProfile {
        expand_profile(profile, &self.ontology, &settings.expand_options())
    }

    /// Expand → formulate → execute → demographic filter → label → rank.
    pub fn search(&self, profile: &PatientProfile, settings: &SearchSettings, exclude: &BTreeSet<String>) -> Result<SearchOutcome, PipelineError> {
        let mut expanded = self.expand(profile, settings);
        if !exclude.is_empty() {
            let folded = exclude.iter().map(|t| t.trim().to_lowercase()).collect();
            expanded = expanded.without_terms(&folded);
        }
        let query = formulate_query(&expanded, &settings.query);
        let hits = execute(&query, &self.index);
        let retrieved = hits.len();
        let mut candidates: Vec<ScoredArticle> = hits
            .into_iter()
            .filter(|h| demographic_compatible(self.index.article(h.doc), expanded.gender))
            .collect();
        let demographic_rejected = retrieved - candidates.len();

        let mut labeled_irrelevant = 0;
        if settings.use_labeler {
            let model = self.model.as_ref().ok_or(PipelineError::NoModel)?;
            for c in &mut candidates {
                let fv = extract_features(self.index.article(c.doc), &expanded);
                c.label = Some(labeler::predict(model, &fv));
            }
            labeled_irrelevant = candidates.iter().filter(|c| c.label == Some(Label::Irrelevant)).count();
            if settings.label_mode == LabelMode::Filter {
                candidates.retain(|c| c.label != Some(Label::Irrelevant));
            }
        }

        let rank_fn = if settings.rerank { ranker::rank } else { ranker::rank_by_score };
        let mut results = rank_fn(candidates, &self.index, &self.ontology.journals, &settings.ranking);
        if settings.use_labeler && settings.label_mode == LabelMode::Demote {
            // stable: keeps the ranking order inside each label group
            results.sort_by_key(|c| c.label == Some(Label::Irrelevant));
            for (i, c) in results.iter_mut().enumerate() {
                c.rank = Some(i as u32 + 1);
            }
        }
        Ok(SearchOutcome {
            expanded,
            query,
            results,
            retrieved,
            demographic_rejected,
            labeled_irrelevant,
        })
    }

    /// Run every topic (concurrently up to `jobs`) and collect the top
    /// `depth` results into a run file. Failing topics are reported and
    /// skipped.
    pub fn run_topics(&self, topics: &[Topic], depth: usize, tag: &str, jobs: usize) -> (RunFile, Vec<(String, String)>) {
        let work = |t: &Topic| (t.id.clone(), self.search(&t.profile, &self.settings, &BTreeSet::new()));
        let outcomes: Vec<_> = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            Ok(pool) => pool.install(|| topics.par_iter().map(work).collect()),
            Err(_) => topics.iter().map(work).collect(),
        };
        let mut run = RunFile::default();
        let mut failures = Vec::new();
        for (id, outcome) in outcomes {
            match outcome {
                Ok(o) => {
                    if o.results.is_empty() {
                        tracing::warn!(topic = %id, "no results");
                    }
                    let top = o.results.iter().take(depth).map(|c| (c.pmid.clone(), c.base_score));
                    run.push_topic(&id, top, tag);
                }
                Err(e) => {
                    tracing::error!(topic = %id, error = %e, "topic failed");
                    failures.push((id, e.to_string()));
                }
            }
        }
        (run, failures)
    }
}

pub fn load_index(path: &Path) -> Result<Index, PipelineError> {
    require(path)?;
    let f = File::open(path).map_err(io_err(path))?;
    Ok(Index::read_snapshot(BufReader::new(f))?)
}

pub fn load_ontology(dir: &Path) -> Result<(Ontology, crate::ontology::LoadReport), PipelineError> {
    require(dir)?;
    Ok(crate::ontology::load_tables(&OntologyPaths::in_dir(dir))?)
}

pub fn load_model(path: &Path) -> Result<PerceptronModel, PipelineError> {
    Ok(PerceptronModel::from_text(&read_text(path)?)?)
}

pub fn load_topics(path: &Path) -> Result<Vec<Topic>, PipelineError> {
    let report = parse_topics(&read_text(path)?)?;
    for w in &report.warnings {
        tracing::warn!("{w}");
    }
    Ok(report.topics)
}

pub fn load_qrels(path: &Path) -> Result<Qrels, PipelineError> {
    let (q, _warnings) = evaluation::parse_qrels(&read_text(path)?);
    Ok(q)
}

/// Build the snapshot at `cfg.index` from `cfg.corpus`.
pub fn cmd_index(cfg: &PipelineConfig) -> Result<IngestReport, PipelineError> {
    let corpus = cfg.existing(&cfg.corpus, "corpus")?;
    let out = cfg.path(&cfg.index, "index")?;
    let f = File::open(&corpus).map_err(io_err(&corpus))?;
    let (index, report) = ingest_corpus(BufReader::new(f))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let w = File::create(&out).map_err(io_err(&out))?;
    index.write_snapshot(BufWriter::new(w))?;
    Ok(report)
}

/// Expanded profiles for every topic, keyed by topic id.
pub fn cmd_expand(cfg: &PipelineConfig) -> Result<BTreeMap<String, ExpandedProfile>, PipelineError> {
    let topics_path = cfg.existing(&cfg.topics, "topics")?;
    let ont_dir = cfg.path(&cfg.ontology_dir, "ontology_dir")?;
    let topics = load_topics(&topics_path)?;
    let (ont, _) = load_ontology(&ont_dir)?;
    let opts = cfg.search.expand_options();
    Ok(topics
        .iter()
        .map(|t| (t.id.clone(), expand_profile(&t.profile, &ont, &opts)))
        .collect())
}

/// Human-readable result listing, with the query and per-clause
/// contributions when `explain` is set.
pub fn format_outcome(engine: &Engine, outcome: &SearchOutcome, limit: usize, explain: bool) -> String {
    let mut out = String::new();
    if explain {
        out.push_str("query:\n");
        for line in outcome.query.to_string().lines() {
            out.push_str(&format!("  {line}\n"));
        }
        out.push_str(&format!(
            "retrieved {} / demographic-rejected {} / labeled-irrelevant {}\n",
            outcome.retrieved, outcome.demographic_rejected, outcome.labeled_irrelevant
        ));
    }
    let labels: Vec<String> = outcome.query.scoring_clauses().map(|c| c.label.clone()).collect();
    for c in outcome.results.iter().take(limit) {
        let a = engine.index.article(c.doc);
        out.push_str(&format!(
            "{:>4}  {:<10} s={:<9.4} r1={:<3} r2={:.4}  {} ({}, {})\n",
            c.rank.unwrap_or(0),
            c.pmid,
            c.base_score,
            c.r1.unwrap_or(0),
            c.r2.unwrap_or(0.0),
            a.title,
            a.journal,
            a.year
        ));
        if explain {
            out.push_str(&format!("        coord={:.4}", c.coord));
            for (label, s) in labels.iter().zip(&c.clause_scores) {
                out.push_str(&format!("  {label}={s:.4}"));
            }
            out.push_str(&format!(
                "  σ(h)={:.4} σ(y)={:.4}\n",
                c.sigma_h.unwrap_or(0.0),
                c.sigma_y.unwrap_or(0.0)
            ));
        }
    }
    out
}

/// Feature/grade pairs from qrels joined with each topic's expanded profile.
/// Judged articles absent from the index are skipped.
pub fn training_examples(index: &Index, ont: &Ontology, topics: &[Topic], qrels: &Qrels, opts: &ExpandOptions) -> Vec<(FeatureVector, u8)> {
    let mut out = Vec::new();
    for t in topics {
        let Some(judged) = qrels.topics.get(&t.id) else {
            continue;
        };
        let ep = expand_profile(&t.profile, ont, opts);
        for (pmid, &grade) in judged {
            if let Some(a) = index.get(pmid) {
                out.push((extract_features(a, &ep), grade));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub model: PerceptronModel,
    pub train_examples: usize,
    pub train_accuracy: f64,
    pub holdout_examples: usize,
    pub holdout_accuracy: Option<f64>,
}

pub fn accuracy(model: &PerceptronModel, examples: &[(FeatureVector, u8)]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let right = examples
        .iter()
        .filter(|(x, g)| (labeler::predict(model, x) == Label::Relevant) == (*g >= 1))
        .count();
    right as f64 / examples.len() as f64
}

/// Train on qrels-labeled examples and write the model to `cfg.model`.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<TrainSummary, PipelineError> {
    let index_path = cfg.existing(&cfg.index, "index")?;
    let topics_path = cfg.existing(&cfg.topics, "topics")?;
    let qrels_path = cfg.existing(&cfg.qrels, "qrels")?;
    let ont_dir = cfg.path(&cfg.ontology_dir, "ontology_dir")?;
    let model_path = cfg.path(&cfg.model, "model")?;
    if !(0.0..1.0).contains(&cfg.holdout) {
        return Err(PipelineError::Config(format!("holdout must be in [0, 1), got {}", cfg.holdout)));
    }
    let index = load_index(&index_path)?;
    let (ont, _) = load_ontology(&ont_dir)?;
    let topics = load_topics(&topics_path)?;
    let qrels = load_qrels(&qrels_path)?;
    let mut examples = training_examples(&index, &ont, &topics, &qrels, &cfg.search.expand_options());
    let mut holdout = Vec::new();
    if cfg.holdout > 0.0 {
        examples.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.labeler.seed));
        let n = (examples.len() as f64 * cfg.holdout).round() as usize;
        holdout = examples.split_off(examples.len() - n.min(examples.len()));
    }
    let model = labeler::train(&examples, &cfg.labeler)?;
    write_text(&model_path, &model.to_text())?;
    Ok(TrainSummary {
        train_accuracy: accuracy(&model, &examples),
        train_examples: examples.len(),
        holdout_examples: holdout.len(),
        holdout_accuracy: (!holdout.is_empty()).then(|| accuracy(&model, &holdout)),
        model,
    })
}

/// Search every topic and write the run file to `cfg.run`. Per-topic
/// failures do not stop other topics but make the command fail at the end.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<RunFile, PipelineError> {
    let topics_path = cfg.existing(&cfg.topics, "topics")?;
    let run_path = cfg.path(&cfg.run, "run")?;
    let engine = Engine::load(cfg)?;
    let topics = load_topics(&topics_path)?;
    let (run, failures) = engine.run_topics(&topics, cfg.depth, &cfg.tag, cfg.jobs);
    write_text(&run_path, &run.to_trec())?;
    if failures.is_empty() {
        Ok(run)
    } else {
        Err(PipelineError::TopicsFailed { failed: failures.len() })
    }
}

/// Evaluate `cfg.run` against `cfg.qrels`; the text report goes to
/// `cfg.report` and a JSON-lines copy next to it.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<MetricReport, PipelineError> {
    let qrels_path = cfg.existing(&cfg.qrels, "qrels")?;
    let run_path = cfg.existing(&cfg.run, "run")?;
    let (qrels, mut warnings) = evaluation::parse_qrels(&read_text(&qrels_path)?);
    let (run, run_warnings) = evaluation::parse_run(&read_text(&run_path)?);
    warnings.extend(run_warnings);
    let mut report = evaluation::evaluate(&run, &qrels);
    warnings.append(&mut report.warnings);
    report.warnings = warnings;
    if let Some(out) = &cfg.report {
        write_text(out, &report.to_text())?;
        write_text(&out.with_extension("jsonl"), &report.to_json_lines())?;
    }
    Ok(report)
}
