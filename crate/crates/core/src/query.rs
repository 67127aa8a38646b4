//! Boolean query formulation and execution over the [`Index`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Article, Field, Index};
use crate::labeler::Label;
use crate::profile::{ExpandedProfile, Gender};

/// A term (one token) or an exact phrase (several adjacent tokens) matched
/// in any of `fields`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matcher {
    pub tokens: Vec<String>,
    pub fields: Vec<Field>,
}

impl Matcher {
    /// Tokenize `text`; `None` when it has no tokens.
    pub fn from_text(text: &str) -> Option<Matcher> {
        let tokens = tokenize(text);
        (!tokens.is_empty()).then(|| Matcher {
            tokens,
            fields: Field::ALL.to_vec(),
        })
    }

    pub fn is_phrase(&self) -> bool {
        self.tokens.len() > 1
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    /// Per-document score of this matcher, summed over its fields. Phrases
    /// score the sum of their token scores in fields where the exact phrase
    /// occurs.
    pub fn score_docs(&self, index: &Index) -> BTreeMap<u32, f64> {
        let mut out: BTreeMap<u32, f64> = BTreeMap::new();
        for &field in &self.fields {
            if self.is_phrase() {
                for (doc, _) in index.phrase_docs(field, &self.tokens) {
                    let s: f64 = self
                        .tokens
                        .iter()
                        .map(|t| index.term_score_doc(field, t, doc))
                        .sum();
                    *out.entry(doc).or_default() += s;
                }
            } else if let Some(term) = self.tokens.first() {
                for p in index.postings(field, term) {
                    *out.entry(p.doc).or_default() += index.term_score_doc(field, term, p.doc);
                }
            }
        }
        out
    }
}

impl fmt::Display for Matcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_phrase() {
            write!(f, "\"{}\"", self.text())
        } else {
            f.write_str(&self.text())
        }
    }
}

/// Disjunction of matchers with a boost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub label: String,
    pub matchers: Vec<Matcher>,
    pub boost: f64,
}

impl Clause {
    /// Build from surface terms; duplicate token sequences collapse.
    pub fn from_terms<'a>(label: impl Into<String>, terms: impl IntoIterator<Item = &'a String>, boost: f64) -> Clause {
        assert!(boost > 0.0, "clause boost must be positive");
        let matchers: BTreeSet<Matcher> = terms.into_iter().filter_map(|t| Matcher::from_text(t)).collect();
        Clause {
            label: label.into(),
            matchers: matchers.into_iter().collect(),
            boost,
        }
    }

    /// Boosted score per matching document.
    pub fn score_docs(&self, index: &Index) -> BTreeMap<u32, f64> {
        let mut out: BTreeMap<u32, f64> = BTreeMap::new();
        for m in &self.matchers {
            for (doc, s) in m.score_docs(index) {
                *out.entry(doc).or_default() += s;
            }
        }
        for v in out.values_mut() {
            *v *= self.boost;
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: (", self.label)?;
        for (i, m) in self.matchers.iter().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str(")")?;
        if self.boost != 1.0 {
            write!(f, "^{}", self.boost)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub must: Vec<Clause>,
    pub must_not: Vec<Clause>,
    pub should: Vec<Clause>,
}

impl Query {
    /// Scoring clauses in the order used by [`ScoredArticle::clause_scores`].
    pub fn scoring_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.must.iter().chain(&self.should)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.must {
            writeln!(f, "MUST     {c}")?;
        }
        for c in &self.must_not {
            writeln!(f, "MUST_NOT {c}")?;
        }
        for c in &self.should {
            writeln!(f, "SHOULD   {c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QueryOptions {
    pub should_boost: f64,
    pub variant_boost: f64,
    /// Add optional pediatric / elderly keyword clauses from the age.
    pub age_clauses: bool,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions {
            should_boost: 1.0,
            variant_boost: 2.0,
            age_clauses: false,
        }
    }
}

const PEDIATRIC: [&str; 7] = ["pediatric", "paediatric", "child", "children", "infant", "adolescent", "adolescents"];
const ELDERLY: [&str; 5] = ["elderly", "older", "geriatric", "aged", "senior"];

/// Compile an expanded profile into a boolean query.
///
/// Must: one disease synonym, one synonym per gene, each specified variant,
/// one drug or treatment keyword. Should: candidate variants of genes
/// without a specified variant, then each other condition as a phrase.
pub fn formulate_query(ep: &ExpandedProfile, opts: &QueryOptions) -> Query {
    let mut q = Query::default();
    q.must.push(Clause::from_terms("disease", &ep.disease_terms, 1.0));
    for g in &ep.genes {
        q.must.push(Clause::from_terms(format!("gene:{}", g.name), &g.gene_terms, 1.0));
    }
    for g in &ep.genes {
        if let Some(v) = &g.specified_variant {
            q.must.push(Clause::from_terms(format!("variant:{}", g.name), [v], 1.0));
        }
    }
    q.must.push(Clause::from_terms("drug-or-treatment", &ep.drug_class_terms(), 1.0));

    for g in &ep.genes {
        if g.specified_variant.is_none() && !g.candidate_variants.is_empty() {
            let c = Clause::from_terms(format!("candidate-variants:{}", g.name), &g.candidate_variants, opts.variant_boost);
            if !c.matchers.is_empty() {
                q.should.push(c);
            }
        }
    }
    for other in &ep.other {
        let c = Clause::from_terms(format!("other:{other}"), [other], opts.should_boost);
        if !c.matchers.is_empty() {
            q.should.push(c);
        }
    }
    if opts.age_clauses {
        let words: Option<&[&str]> = match ep.age {
            Some(a) if a < 18 => Some(&PEDIATRIC),
            Some(a) if a >= 65 => Some(&ELDERLY),
            _ => None,
        };
        if let Some(words) = words {
            let terms: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            q.should.push(Clause::from_terms("age", &terms, opts.should_boost));
        }
    }
    q
}

/// One retrieved article and its scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredArticle {
    pub pmid: String,
    #[serde(skip)]
    pub doc: u32,
    /// Adjusted relevance score `s`.
    pub base_score: f64,
    pub coord: f64,
    pub matched_should: usize,
    /// Boosted, pre-coord score of each must then should clause (0 when the
    /// clause did not match).
    pub clause_scores: Vec<f64>,
    pub label: Option<Label>,
    pub r1: Option<i64>,
    pub r2: Option<f64>,
    pub sigma_h: Option<f64>,
    pub sigma_y: Option<f64>,
    pub rank: Option<u32>,
}

/// Articles matching every must clause and no must-not clause, scored as
/// `coord * sum(boosted clause scores)` over matched must and should clauses.
pub fn execute(query: &Query, index: &Index) -> Vec<ScoredArticle> {
    if query.must.is_empty() {
        return Vec::new();
    }
    let must: Vec<BTreeMap<u32, f64>> = query.must.iter().map(|c| c.score_docs(index)).collect();
    let mut candidates: BTreeSet<u32> = must
        .iter()
        .min_by_key(|m| m.len())
        .map(|m| m.keys().copied().collect())
        .unwrap_or_default();
    candidates.retain(|d| must.iter().all(|m| m.contains_key(d)));
    for c in &query.must_not {
        let excluded = c.score_docs(index);
        candidates.retain(|d| !excluded.contains_key(d));
    }
    if candidates.is_empty() {
        return Vec::new();
    }
    let should: Vec<BTreeMap<u32, f64>> = query.should.iter().map(|c| c.score_docs(index)).collect();
    let total = (must.len() + should.len()) as f64;

    candidates
        .into_iter()
        .map(|doc| {
            let clause_scores: Vec<f64> = must
                .iter()
                .chain(&should)
                .map(|m| m.get(&doc).copied().unwrap_or(0.0))
                .collect();
            let matched_should = should.iter().filter(|m| m.contains_key(&doc)).count();
            let coord = (must.len() + matched_should) as f64 / total;
            let raw: f64 = clause_scores.iter().sum();
            ScoredArticle {
                pmid: index.article(doc).pmid.clone(),
                doc,
                base_score: coord * raw,
                coord,
                matched_should,
                clause_scores,
                label: None,
                r1: None,
                r2: None,
                sigma_h: None,
                sigma_y: None,
                rank: None,
            }
        })
        .collect()
}

/// Matcher texts of `query` that occur in document `doc`.
pub fn matched_terms(query: &Query, index: &Index, doc: u32) -> Vec<String> {
    let article = index.article(doc);
    let fields: Vec<(Field, Vec<String>)> = Field::ALL.iter().map(|&f| (f, article.field_tokens(f))).collect();
    let mut out = BTreeSet::new();
    for c in query.scoring_clauses() {
        for m in &c.matchers {
            let hit = fields
                .iter()
                .filter(|(f, _)| m.fields.contains(f))
                .any(|(_, toks)| toks.windows(m.tokens.len()).any(|w| w == m.tokens.as_slice()));
            if hit {
                out.insert(m.text());
            }
        }
    }
    out.into_iter().collect()
}

pub const MALE_WORDS: [&str; 6] = ["male", "males", "men", "man", "boy", "boys"];
pub const FEMALE_WORDS: [&str; 6] = ["female", "females", "women", "woman", "girl", "girls"];

fn gender_words(g: Gender) -> &'static [&'static str] {
    match g {
        Gender::Male => &MALE_WORDS,
        Gender::Female => &FEMALE_WORDS,
    }
}

/// False only when title and abstract mention the opposite gender and not
/// the profile's own.
pub fn demographic_compatible(article: &Article, gender: Option<Gender>) -> bool {
    let Some(gender) = gender else {
        return true;
    };
    let tokens: BTreeSet<String> = tokenize(&article.title)
        .into_iter()
        .chain(tokenize(&article.abstract_text))
        .collect();
    let mentions = |g: Gender| gender_words(g).iter().any(|w| tokens.contains(*w));
    mentions(gender) || !mentions(gender.opposite())
}
