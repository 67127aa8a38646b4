//! Perceptron relevance labeling over term-frequency features.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Article, Field};
use crate::profile::ExpandedProfile;

/// 3 term classes x 3 fields x (token, phrase) frequencies, plus bias.
pub const FEATURE_COUNT: usize = 19;
pub const BIAS: usize = 18;

pub const MODEL_MAGIC: &str = "pmr-perceptron";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Relevant,
    Irrelevant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermClass {
    Disease,
    Gene,
    Drug,
}

impl TermClass {
    pub const ALL: [TermClass; 3] = [TermClass::Disease, TermClass::Gene, TermClass::Drug];
}

/// Position of a feature in the vector.
pub fn feature_slot(class: TermClass, field: Field, phrase: bool) -> usize {
    class as usize * 6 + field as usize * 2 + usize::from(phrase)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn dot(&self, w: &[f64; FEATURE_COUNT]) -> f64 {
        self.0.iter().zip(w).map(|(x, w)| x * w).sum()
    }

    pub fn get(&self, class: TermClass, field: Field, phrase: bool) -> f64 {
        self.0[feature_slot(class, field, phrase)]
    }
}

struct ClassTerms {
    tokens: BTreeSet<String>,
    phrases: BTreeSet<Vec<String>>,
}

impl ClassTerms {
    fn new(terms: &BTreeSet<String>) -> ClassTerms {
        let phrases: BTreeSet<Vec<String>> = terms.iter().map(|t| tokenize(t)).filter(|t| !t.is_empty()).collect();
        let tokens = phrases.iter().flatten().cloned().collect();
        ClassTerms { tokens, phrases }
    }
}

/// Length-normalized token and phrase frequencies of the profile's disease,
/// gene (incl. variants) and drug/treatment terms in each field.
pub fn extract_features(article: &Article, ep: &ExpandedProfile) -> FeatureVector {
    let classes = [
        ClassTerms::new(&ep.disease_terms),
        ClassTerms::new(&ep.gene_class_terms()),
        ClassTerms::new(&ep.drug_class_terms()),
    ];
    let mut x = [0.0; FEATURE_COUNT];
    x[BIAS] = 1.0;
    for field in Field::ALL {
        let toks = article.field_tokens(field);
        if toks.is_empty() {
            continue;
        }
        let len = toks.len() as f64;
        for (class, terms) in TermClass::ALL.into_iter().zip(&classes) {
            let token_hits = toks.iter().filter(|t| terms.tokens.contains(*t)).count();
            let phrase_hits: usize = terms
                .phrases
                .iter()
                .map(|p| toks.windows(p.len()).filter(|w| *w == p.as_slice()).count())
                .sum();
            x[feature_slot(class, field, false)] = token_hits as f64 / len;
            x[feature_slot(class, field, true)] = phrase_hits as f64 / len;
        }
    }
    FeatureVector(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adagrad,
    Adadelta,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Adadelta => "adadelta",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            "adadelta" => Ok(OptimizerKind::Adadelta),
            other => Err(format!("unknown optimizer `{other}`")),
        }
    }
}

/// Hyper-parameters for [`train`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub adadelta_rho: f64,
    pub adadelta_eps: f64,
    pub adagrad_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Adadelta,
            learning_rate: 0.01,
            epochs: 10,
            seed: 42,
            adadelta_rho: 0.95,
            adadelta_eps: 1e-6,
            adagrad_eps: 1e-8,
        }
    }
}

/// Per-weight update rule applied to a gradient.
pub trait Optimizer {
    fn step(&mut self, weights: &mut [f64], grad: &[f64]);
    /// Named accumulator vectors, for persistence and inspection.
    fn state(&self) -> Vec<(&'static str, &[f64])>;
}

#[derive(Debug, Clone)]
pub struct Sgd {
    pub lr: f64,
}

impl Optimizer for Sgd {
    fn step(&mut self, weights: &mut [f64], grad: &[f64]) {
        for (w, g) in weights.iter_mut().zip(grad) {
            *w -= self.lr * g;
        }
    }

    fn state(&self) -> Vec<(&'static str, &[f64])> {
        Vec::new()
    }
}

/// `G += g^2; w -= lr * g / (sqrt(G) + eps)`
#[derive(Debug, Clone)]
pub struct Adagrad {
    pub lr: f64,
    pub eps: f64,
    pub sum_sq: Vec<f64>,
}

impl Adagrad {
    pub fn new(dim: usize, lr: f64, eps: f64) -> Adagrad {
        Adagrad { lr, eps, sum_sq: vec![0.0; dim] }
    }
}

impl Optimizer for Adagrad {
    fn step(&mut self, weights: &mut [f64], grad: &[f64]) {
        for ((w, g), acc) in weights.iter_mut().zip(grad).zip(&mut self.sum_sq) {
            *acc += g * g;
            *w -= self.lr * g / (acc.sqrt() + self.eps);
        }
    }

    fn state(&self) -> Vec<(&'static str, &[f64])> {
        vec![("sum_sq", &self.sum_sq)]
    }
}

/// Zeiler's recurrence with an outer learning-rate multiplier:
///
/// ```text
/// E[g²]  = ρ E[g²] + (1-ρ) g²
/// Δ      = sqrt(E[Δ²] + ε) / sqrt(E[g²] + ε) · g
/// E[Δ²]  = ρ E[Δ²] + (1-ρ) Δ²
/// w     -= lr · Δ
/// ```
#[derive(Debug, Clone)]
pub struct Adadelta {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    pub avg_sq_grad: Vec<f64>,
    pub avg_sq_delta: Vec<f64>,
}

impl Adadelta {
    pub fn new(dim: usize, lr: f64, rho: f64, eps: f64) -> Adadelta {
        Adadelta {
            lr,
            rho,
            eps,
            avg_sq_grad: vec![0.0; dim],
            avg_sq_delta: vec![0.0; dim],
        }
    }
}

impl Optimizer for Adadelta {
    fn step(&mut self, weights: &mut [f64], grad: &[f64]) {
        for i in 0..weights.len() {
            let g = grad[i];
            self.avg_sq_grad[i] = self.rho * self.avg_sq_grad[i] + (1.0 - self.rho) * g * g;
            let delta = (self.avg_sq_delta[i] + self.eps).sqrt() / (self.avg_sq_grad[i] + self.eps).sqrt() * g;
            self.avg_sq_delta[i] = self.rho * self.avg_sq_delta[i] + (1.0 - self.rho) * delta * delta;
            weights[i] -= self.lr * delta;
        }
    }

    fn state(&self) -> Vec<(&'static str, &[f64])> {
        vec![("avg_sq_grad", &self.avg_sq_grad), ("avg_sq_delta", &self.avg_sq_delta)]
    }
}

pub fn make_optimizer(cfg: &TrainConfig, dim: usize) -> Box<dyn Optimizer> {
    match cfg.optimizer {
        OptimizerKind::Sgd => Box::new(Sgd { lr: cfg.learning_rate }),
        OptimizerKind::Adagrad => Box::new(Adagrad::new(dim, cfg.learning_rate, cfg.adagrad_eps)),
        OptimizerKind::Adadelta => Box::new(Adadelta::new(dim, cfg.learning_rate, cfg.adadelta_rho, cfg.adadelta_eps)),
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LabelerError {
    #[error("no training examples")]
    NoExamples,
    #[error("learning rate must be positive, got {0}")]
    BadLearningRate(f64),
    #[error("example {index} has a non-finite feature at position {feature}")]
    NonFinite { index: usize, feature: usize },
    #[error("grade {grade} of example {index} is not 0, 1 or 2")]
    BadGrade { index: usize, grade: u8 },
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronModel {
    pub weights: [f64; FEATURE_COUNT],
    pub config: TrainConfig,
    /// Optimizer accumulators at the end of training.
    pub optimizer_state: Vec<(String, Vec<f64>)>,
    /// Number of weight updates performed.
    pub updates: usize,
}

/// Train a perceptron. Grade >= 1 is the positive class. Each epoch visits
/// the examples in a seeded shuffle; a misclassified example
/// (`y * w·x <= 0`) hands the gradient `-y * x` to the optimizer.
pub fn train(examples: &[(FeatureVector, u8)], cfg: &TrainConfig) -> Result<PerceptronModel, LabelerError> {
    if examples.is_empty() {
        return Err(LabelerError::NoExamples);
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(LabelerError::BadLearningRate(cfg.learning_rate));
    }
    for (index, (fv, grade)) in examples.iter().enumerate() {
        if let Some(feature) = fv.0.iter().position(|v| !v.is_finite()) {
            return Err(LabelerError::NonFinite { index, feature });
        }
        if *grade > 2 {
            return Err(LabelerError::BadGrade { index, grade: *grade });
        }
    }
    let mut opt = make_optimizer(cfg, FEATURE_COUNT);
    let mut w = [0.0; FEATURE_COUNT];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut grad = [0.0; FEATURE_COUNT];
    let mut updates = 0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, grade) = &examples[i];
            let y = if *grade >= 1 { 1.0 } else { -1.0 };
            if y * x.dot(&w) <= 0.0 {
                for (g, xi) in grad.iter_mut().zip(&x.0) {
                    *g = -y * xi;
                }
                opt.step(&mut w, &grad);
                updates += 1;
            }
        }
    }
    let optimizer_state = opt.state().into_iter().map(|(n, v)| (n.to_string(), v.to_vec())).collect();
    Ok(PerceptronModel {
        weights: w,
        config: *cfg,
        optimizer_state,
        updates,
    })
}

/// Relevant iff `w·x > 0`.
pub fn predict(model: &PerceptronModel, fv: &FeatureVector) -> Label {
    if fv.dot(&model.weights) > 0.0 {
        Label::Relevant
    } else {
        Label::Irrelevant
    }
}

fn join(vals: &[f64]) -> String {
    vals.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

impl PerceptronModel {
    /// Versioned line-oriented text form. Floats use shortest round-trip
    /// formatting so a reload is bit-exact.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = format!("{MODEL_MAGIC} {MODEL_VERSION}\n");
        out += &format!("optimizer {}\n", c.optimizer);
        out += &format!("learning_rate {:?}\n", c.learning_rate);
        out += &format!("epochs {}\n", c.epochs);
        out += &format!("seed {}\n", c.seed);
        out += &format!("adadelta_rho {:?}\n", c.adadelta_rho);
        out += &format!("adadelta_eps {:?}\n", c.adadelta_eps);
        out += &format!("adagrad_eps {:?}\n", c.adagrad_eps);
        out += &format!("updates {}\n", self.updates);
        out += &format!("weights {}\n", join(&self.weights));
        for (name, v) in &self.optimizer_state {
            out += &format!("state {name} {}\n", join(v));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PerceptronModel, LabelerError> {
        let err = |line: usize, message: String| LabelerError::Parse { line, message };
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
        if header != format!("{MODEL_MAGIC} {MODEL_VERSION}") {
            return Err(err(1, format!("unexpected header `{header}`")));
        }
        let mut config = TrainConfig::default();
        let mut weights = None;
        let mut updates = 0;
        let mut optimizer_state = Vec::new();
        let mut seen_optimizer = false;
        for (no, line) in lines {
            let line_no = no + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let float = |s: &str| s.parse::<f64>().map_err(|e| err(line_no, format!("bad number `{s}`: {e}")));
            let int = |s: &str| s.parse::<u64>().map_err(|e| err(line_no, format!("bad integer `{s}`: {e}")));
            let floats = |s: &str| s.split_whitespace().map(float).collect::<Result<Vec<f64>, _>>();
            match key {
                "optimizer" => {
                    config.optimizer = rest.parse().map_err(|e| err(line_no, e))?;
                    seen_optimizer = true;
                }
                "learning_rate" => config.learning_rate = float(rest)?,
                "epochs" => config.epochs = int(rest)? as usize,
                "seed" => config.seed = int(rest)?,
                "adadelta_rho" => config.adadelta_rho = float(rest)?,
                "adadelta_eps" => config.adadelta_eps = float(rest)?,
                "adagrad_eps" => config.adagrad_eps = float(rest)?,
                "updates" => updates = int(rest)? as usize,
                "weights" => {
                    let v = floats(rest)?;
                    let arr: [f64; FEATURE_COUNT] = v
                        .try_into()
                        .map_err(|v: Vec<f64>| err(line_no, format!("expected {FEATURE_COUNT} weights, found {}", v.len())))?;
                    if arr.iter().any(|w| !w.is_finite()) {
                        return Err(err(line_no, "non-finite weight".into()));
                    }
                    weights = Some(arr);
                }
                "state" => {
                    let (name, vals) = rest.split_once(' ').unwrap_or((rest, ""));
                    optimizer_state.push((name.to_string(), floats(vals)?));
                }
                other => return Err(err(line_no, format!("unknown key `{other}`"))),
            }
        }
        if !seen_optimizer {
            return Err(err(0, "missing optimizer".into()));
        }
        Ok(PerceptronModel {
            weights: weights.ok_or_else(|| err(0, "missing weights".into()))?,
            config,
            optimizer_state,
            updates,
        })
    }
}
