//! Patient topics and their ontology expansion.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ontology::Ontology;

pub const DEFAULT_TREATMENT_KEYWORDS: [&str; 9] = [
    "treatment",
    "surgery",
    "therapy",
    "radiotherapy",
    "immunotherapy",
    "chemotherapy",
    "targeted therapy",
    "resection",
    "prognosis",
];

pub fn default_treatment_keywords() -> Vec<String> {
    DEFAULT_TREATMENT_KEYWORDS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

impl GeneSpec {
    /// Split `"KRAS (G12C)"` into name and variant. A bare `"BRAF"` has no
    /// variant; `"CDK4 Amplification"` takes everything after the first
    /// word as the variant.
    pub fn parse(entry: &str) -> Option<GeneSpec> {
        static PAREN: LazyLock<Regex> =
            LazyLock::new(|| Regex::new(r"^\s*([^()\s]+)\s*\(\s*([^()]*?)\s*\)\s*$").unwrap());
        if let Some(c) = PAREN.captures(entry) {
            let variant = c[2].trim();
            return Some(GeneSpec {
                name: c[1].to_string(),
                variant: (!variant.is_empty()).then(|| variant.to_string()),
            });
        }
        let entry = entry.trim();
        if entry.is_empty() || entry.contains(['(', ')']) {
            return None;
        }
        Some(match entry.split_once(char::is_whitespace) {
            Some((name, rest)) => GeneSpec {
                name: name.to_string(),
                variant: Some(rest.trim().to_string()),
            },
            None => GeneSpec {
                name: entry.to_string(),
                variant: None,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientProfile {
    pub disease: String,
    pub genes: Vec<GeneSpec>,
    #[serde(default)]
    pub age: Option<u32>,
    #[serde(default)]
    pub gender: Option<Gender>,
    #[serde(default)]
    pub other: Vec<String>,
}

/// Field-level validation failure for a profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl PatientProfile {
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errs = Vec::new();
        let mut err = |field: String, message: &str| {
            errs.push(FieldError {
                field,
                message: message.to_string(),
            })
        };
        if self.disease.trim().is_empty() {
            err("disease".into(), "must be non-empty");
        }
        if self.genes.is_empty() {
            err("genes".into(), "at least one gene is required");
        }
        for (i, g) in self.genes.iter().enumerate() {
            if g.name.trim().is_empty() {
                err(format!("genes[{i}].name"), "must be non-empty");
            }
            if g.variant.as_deref().is_some_and(|v| v.trim().is_empty()) {
                err(format!("genes[{i}].variant"), "must be non-empty when present");
            }
        }
        if self.age.is_some_and(|a| a > 130) {
            err("age".into(), "must be within [0, 130]");
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Decompose `"61-year-old female"` into age and gender.
pub fn parse_demographic(text: &str) -> Option<(u32, Gender)> {
    static DEMO: LazyLock<Regex> = LazyLock::new(|| {
        Regex::new(r"(?i)^\s*(\d{1,3})[\s-]*years?[\s-]*old[\s,]+(male|female|man|woman|boy|girl)\s*\.?\s*$")
            .unwrap()
    });
    let c = DEMO.captures(text)?;
    let age: u32 = c[1].parse().ok()?;
    if age > 130 {
        return None;
    }
    let gender = match c[2].to_lowercase().as_str() {
        "male" | "man" | "boy" => Gender::Male,
        _ => Gender::Female,
    };
    Some((age, gender))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawGene {
    Spec(GeneSpec),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawGenes {
    List(Vec<RawGene>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
struct RawTopic {
    id: serde_json::Value,
    #[serde(default)]
    disease: Option<String>,
    #[serde(default)]
    genes: Option<RawGenes>,
    #[serde(default)]
    demographic: Option<String>,
    #[serde(default)]
    other: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: String,
    pub profile: PatientProfile,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicsReport {
    pub topics: Vec<Topic>,
    pub warnings: Vec<String>,
    /// Rejected topics with the reason.
    pub rejected: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum TopicsError {
    #[error("topics file is not a JSON array of topic objects: {0}")]
    Format(#[from] serde_json::Error),
}

fn id_string(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split([',', ';']).map(str::trim).filter(|p| !p.is_empty())
}

fn convert_topic(raw: RawTopic, warnings: &mut Vec<String>) -> Result<Topic, String> {
    let id = id_string(&raw.id);
    let disease = raw.disease.unwrap_or_default().trim().to_string();
    if disease.is_empty() {
        return Err("missing disease".into());
    }
    let mut genes = Vec::new();
    let entries: Vec<RawGene> = match raw.genes {
        None => Vec::new(),
        Some(RawGenes::List(l)) => l,
        Some(RawGenes::Text(t)) => split_list(&t).map(|s| RawGene::Text(s.to_string())).collect(),
    };
    for g in entries {
        match g {
            RawGene::Spec(spec) => genes.push(spec),
            RawGene::Text(t) => match GeneSpec::parse(&t) {
                Some(spec) => genes.push(spec),
                None => return Err(format!("unparseable gene entry `{t}`")),
            },
        }
    }
    if genes.is_empty() {
        return Err("missing genes".into());
    }
    let (age, gender) = match raw.demographic.as_deref().map(str::trim) {
        None | Some("") => (None, None),
        Some(text) => match parse_demographic(text) {
            Some((a, g)) => (Some(a), Some(g)),
            None => {
                let msg = format!("topic {id}: unparseable demographic `{text}`; age and gender left unset");
                tracing::warn!("{msg}");
                warnings.push(msg);
                (None, None)
            }
        },
    };
    let other = match raw.other {
        None | Some(serde_json::Value::Null) => Vec::new(),
        Some(serde_json::Value::String(s)) => {
            split_list(&s).filter(|s| !s.eq_ignore_ascii_case("none")).map(String::from).collect()
        }
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .filter_map(|v| v.as_str())
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        Some(v) => return Err(format!("bad `other` value {v}")),
    };
    let profile = PatientProfile {
        disease,
        genes,
        age,
        gender,
        other,
    };
    profile
        .validate()
        .map_err(|errs| errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))?;
    Ok(Topic { id, profile })
}

/// Parse a topics file: a JSON array of
/// `{id, disease, genes: [{name, variant?} | "NAME (VAR)"], demographic, other: [..]}`.
pub fn parse_topics(json: &str) -> Result<TopicsReport, TopicsError> {
    let raws: Vec<serde_json::Value> = serde_json::from_str(json)?;
    let mut report = TopicsReport::default();
    for (i, value) in raws.into_iter().enumerate() {
        let raw: RawTopic = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => {
                report.rejected.push((format!("#{i}"), e.to_string()));
                continue;
            }
        };
        let id = id_string(&raw.id);
        match convert_topic(raw, &mut report.warnings) {
            Ok(t) => report.topics.push(t),
            Err(e) => {
                tracing::error!(topic = %id, error = %e, "topic rejected");
                report.rejected.push((id, e));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedGene {
    pub name: String,
    pub gene_terms: BTreeSet<String>,
    pub specified_variant: Option<String>,
    pub candidate_variants: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedProfile {
    pub disease_terms: BTreeSet<String>,
    pub genes: Vec<ExpandedGene>,
    pub drug_terms: BTreeSet<String>,
    pub treatment_keywords: BTreeSet<String>,
    pub age: Option<u32>,
    pub gender: Option<Gender>,
    pub other: Vec<String>,
}

/// Knobs for [`expand_profile`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandOptions {
    pub treatment_keywords: Vec<String>,
    /// Look up candidate variants when a gene has none specified.
    pub use_variants: bool,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions {
            treatment_keywords: default_treatment_keywords(),
            use_variants: true,
        }
    }
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Expand a profile through the ontology tables.
pub fn expand_profile(profile: &PatientProfile, ont: &Ontology, opts: &ExpandOptions) -> ExpandedProfile {
    let mut disease_terms = ont.diseases.synonyms(&profile.disease);
    disease_terms.insert(fold(&profile.disease));

    let mut drug_terms = BTreeSet::new();
    if let Some(c) = ont.diseases.concept_of(&profile.disease) {
        drug_terms.extend(ont.drugs.drugs_for(c));
    }

    let genes = profile
        .genes
        .iter()
        .map(|g| {
            let mut gene_terms = ont.genes.synonyms(&g.name);
            gene_terms.insert(fold(&g.name));
            let concept = ont.genes.concept_of(&g.name);
            if let Some(c) = concept {
                drug_terms.extend(ont.drugs.drugs_for(c));
            }
            let specified_variant = g.variant.as_deref().map(fold).filter(|v| !v.is_empty());
            let candidate_variants = match (&specified_variant, concept) {
                (None, Some(c)) if opts.use_variants => ont.variants.variants_of(c),
                _ => BTreeSet::new(),
            };
            ExpandedGene {
                name: g.name.clone(),
                gene_terms,
                specified_variant,
                candidate_variants,
            }
        })
        .collect();

    ExpandedProfile {
        disease_terms,
        genes,
        drug_terms,
        treatment_keywords: opts.treatment_keywords.iter().map(|k| fold(k)).filter(|k| !k.is_empty()).collect(),
        age: profile.age,
        gender: profile.gender,
        other: profile.other.clone(),
    }
}

impl ExpandedProfile {
    /// Drop the given (case-insensitive) terms from every expanded set. Raw
    /// profile terms can be removed too; callers use this to apply a
    /// clinician's deselections.
    pub fn without_terms(mut self, excluded: &BTreeSet<String>) -> ExpandedProfile {
        let keep = |set: &mut BTreeSet<String>| set.retain(|t| !excluded.contains(t));
        keep(&mut self.disease_terms);
        keep(&mut self.drug_terms);
        keep(&mut self.treatment_keywords);
        for g in &mut self.genes {
            keep(&mut g.gene_terms);
            keep(&mut g.candidate_variants);
        }
        self
    }

    /// All gene-class terms: gene synonyms plus specified and candidate variants.
    pub fn gene_class_terms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for g in &self.genes {
            out.extend(g.gene_terms.iter().cloned());
            out.extend(g.specified_variant.iter().cloned());
            out.extend(g.candidate_variants.iter().cloned());
        }
        out
    }

    pub fn drug_class_terms(&self) -> BTreeSet<String> {
        self.drug_terms.union(&self.treatment_keywords).cloned().collect()
    }
}
