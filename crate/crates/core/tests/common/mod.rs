//! Independent oracles and fixture helpers shared by the integration tests.
//! Nothing here calls into the scoring, metric or optimizer code under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pmr::corpus::Article;
use pmr::labeler::{FeatureVector, FEATURE_COUNT};
use pmr::profile::{ExpandedProfile, Gender};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

// ---------------------------------------------------------------- retrieval

pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn fields_of(a: &Article) -> [Vec<String>; 3] {
    [tokens(&a.title), tokens(&a.abstract_text), tokens(&a.keywords.join(" "))]
}

fn keep_cd(a: &Article) -> bool {
    a.mesh_codes.iter().any(|c| c.starts_with('C') || c.starts_with('D'))
}

/// Full-scan scorer over a raw article list: no postings, no caching.
pub struct Scan {
    docs: Vec<(Article, [Vec<String>; 3])>,
}

impl Scan {
    /// Applies the MeSH rule and first-pmid-wins itself.
    pub fn new(articles: &[Article]) -> Scan {
        let mut seen = BTreeSet::new();
        let docs = articles
            .iter()
            .filter(|a| keep_cd(a) && seen.insert(a.pmid.clone()))
            .map(|a| (a.clone(), fields_of(a)))
            .collect();
        Scan { docs }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    fn df(&self, field: usize, term: &str) -> usize {
        self.docs.iter().filter(|(_, f)| f[field].iter().any(|t| t == term)).count()
    }

    fn term_score(&self, doc: usize, field: usize, term: &str) -> f64 {
        let toks = &self.docs[doc].1[field];
        let tf = toks.iter().filter(|t| *t == term).count() as f64;
        if tf == 0.0 {
            return 0.0;
        }
        let n = self.docs.len() as f64;
        let idf = 1.0 + (n / (self.df(field, term) as f64 + 1.0)).ln();
        tf.sqrt() * idf * idf / (toks.len() as f64).sqrt()
    }

    /// Score of one matcher (token sequence) summed over the fields where the
    /// exact sequence occurs; `None` when it occurs nowhere.
    fn matcher_score(&self, doc: usize, seq: &[String]) -> Option<f64> {
        let mut total = None;
        for field in 0..3 {
            let toks = &self.docs[doc].1[field];
            if toks.windows(seq.len()).any(|w| w == seq) {
                let s: f64 = seq.iter().map(|t| self.term_score(doc, field, t)).sum();
                *total.get_or_insert(0.0) += s;
            }
        }
        total
    }

    /// Disjunction of distinct token sequences; `None` when nothing matched.
    fn clause_score(&self, doc: usize, terms: &BTreeSet<String>, boost: f64) -> Option<f64> {
        let seqs: BTreeSet<Vec<String>> = terms.iter().map(|t| tokens(t)).filter(|t| !t.is_empty()).collect();
        let mut total = None;
        for seq in &seqs {
            if let Some(s) = self.matcher_score(doc, seq) {
                *total.get_or_insert(0.0) += s;
            }
        }
        total.map(|s| s * boost)
    }

    /// pmid → adjusted score for every article matching all must clauses and,
    /// when `demographics` is set, compatible with the profile's gender.
    pub fn search(&self, ep: &ExpandedProfile, variant_boost: f64, should_boost: f64, demographics: bool) -> BTreeMap<String, f64> {
        let mut must: Vec<(BTreeSet<String>, f64)> = vec![(ep.disease_terms.clone(), 1.0)];
        for g in &ep.genes {
            must.push((g.gene_terms.clone(), 1.0));
        }
        for g in &ep.genes {
            if let Some(v) = &g.specified_variant {
                must.push(([v.clone()].into(), 1.0));
            }
        }
        must.push((ep.drug_terms.union(&ep.treatment_keywords).cloned().collect(), 1.0));
        let mut should: Vec<(BTreeSet<String>, f64)> = Vec::new();
        for g in &ep.genes {
            if g.specified_variant.is_none() && g.candidate_variants.iter().any(|v| !tokens(v).is_empty()) {
                should.push((g.candidate_variants.clone(), variant_boost));
            }
        }
        for o in &ep.other {
            if !tokens(o).is_empty() {
                should.push(([o.clone()].into(), should_boost));
            }
        }
        let total = (must.len() + should.len()) as f64;
        let mut out = BTreeMap::new();
        'docs: for doc in 0..self.docs.len() {
            let mut raw = 0.0;
            for (terms, boost) in &must {
                match self.clause_score(doc, terms, *boost) {
                    Some(s) => raw += s,
                    None => continue 'docs,
                }
            }
            let mut matched = must.len();
            for (terms, boost) in &should {
                if let Some(s) = self.clause_score(doc, terms, *boost) {
                    raw += s;
                    matched += 1;
                }
            }
            let article = &self.docs[doc].0;
            if demographics && !gender_ok(article, ep.gender) {
                continue;
            }
            out.insert(article.pmid.clone(), matched as f64 / total * raw);
        }
        out
    }
}

pub fn gender_ok(a: &Article, gender: Option<Gender>) -> bool {
    let male = ["male", "males", "men", "man", "boy", "boys"];
    let female = ["female", "females", "women", "woman", "girl", "girls"];
    let Some(g) = gender else { return true };
    let words: BTreeSet<String> = tokens(&a.title).into_iter().chain(tokens(&a.abstract_text)).collect();
    let has_male = male.iter().any(|w| words.contains(*w));
    let has_female = female.iter().any(|w| words.contains(*w));
    match g {
        Gender::Male => has_male || !has_female,
        Gender::Female => has_female || !has_male,
    }
}

// ------------------------------------------------------------------ metrics

/// `case → metric → value` from `fixtures/metrics/expected.tsv`.
pub fn expected_metrics() -> BTreeMap<String, BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(fixtures().join("metrics").join("expected.tsv")).expect("expected.tsv");
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split('\t').collect();
        out.entry(cols[0].into()).or_default().insert(cols[1].into(), cols[2].parse().expect("value"));
    }
    out
}

// --------------------------------------------------------------- optimizers

/// Straight-line accumulator trajectories for a gradient sequence, one
/// snapshot per step: `(weights, accumulators...)`.
pub fn sgd_trajectory(lr: f64, grads: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    let dim = grads[0].len();
    let mut w = vec![0.0; dim];
    let mut out = Vec::new();
    for g in grads {
        for i in 0..dim {
            w[i] -= lr * g[i];
        }
        out.push(vec![w.clone()]);
    }
    out
}

pub fn adagrad_trajectory(lr: f64, eps: f64, grads: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    let dim = grads[0].len();
    let (mut w, mut sum) = (vec![0.0; dim], vec![0.0; dim]);
    let mut out = Vec::new();
    for g in grads {
        for i in 0..dim {
            sum[i] += g[i] * g[i];
            w[i] -= lr * g[i] / (sum[i].sqrt() + eps);
        }
        out.push(vec![w.clone(), sum.clone()]);
    }
    out
}

pub fn adadelta_trajectory(lr: f64, rho: f64, eps: f64, grads: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    let dim = grads[0].len();
    let (mut w, mut eg, mut ed) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut out = Vec::new();
    for g in grads {
        for i in 0..dim {
            eg[i] = rho * eg[i] + (1.0 - rho) * g[i] * g[i];
            let rms_g = (eg[i] + eps).sqrt();
            let rms_d = (ed[i] + eps).sqrt();
            let d = rms_d / rms_g * g[i];
            ed[i] = rho * ed[i] + (1.0 - rho) * d * d;
            w[i] -= lr * d;
        }
        out.push(vec![w.clone(), eg.clone(), ed.clone()]);
    }
    out
}

pub fn random_grads(seed: u64, steps: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..steps)
        .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

/// Linearly separable examples: uniform non-negative features, bias 1, labels
/// from a hidden hyperplane, points within `margin` of it discarded.
pub fn separable_set(seed: u64, n: usize, dims: usize, margin: f64) -> Vec<(FeatureVector, u8)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hidden = [0.0; FEATURE_COUNT];
    for h in hidden.iter_mut().take(dims) {
        *h = rng.random_range(-1.0..1.0);
    }
    hidden[FEATURE_COUNT - 1] = rng.random_range(-0.2..0.2);
    let norm = hidden.iter().map(|h| h * h).sum::<f64>().sqrt();
    let mut out = Vec::new();
    while out.len() < n {
        let mut x = [0.0; FEATURE_COUNT];
        for xi in x.iter_mut().take(dims) {
            *xi = rng.random_range(0.0..1.0);
        }
        x[FEATURE_COUNT - 1] = 1.0;
        let m = x.iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>() / norm;
        if m.abs() >= margin {
            out.push((FeatureVector(x), if m > 0.0 { 2 } else { 0 }));
        }
    }
    out
}

/// Smallest geometric margin of `set` under the hyperplane `w`.
pub fn margin_under(set: &[(FeatureVector, u8)], w: &[f64; FEATURE_COUNT]) -> f64 {
    let norm = w.iter().map(|h| h * h).sum::<f64>().sqrt();
    set.iter()
        .map(|(x, g)| {
            let y = if *g >= 1 { 1.0 } else { -1.0 };
            y * x.0.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / norm
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn train_accuracy(w: &[f64; FEATURE_COUNT], set: &[(FeatureVector, u8)]) -> f64 {
    let right = set
        .iter()
        .filter(|(x, g)| {
            let s: f64 = x.0.iter().zip(w).map(|(a, b)| a * b).sum();
            (s > 0.0) == (*g >= 1)
        })
        .count();
    right as f64 / set.len() as f64
}
