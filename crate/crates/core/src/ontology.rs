//! Flat-file ontology tables: disease and gene synonyms, gene variants,
//! drug associations and journal impact.
//!
//! Every source is a UTF-8 tab-separated file with two columns. Lines starting
//! with `#` and blank lines are ignored. All surface strings are case-folded
//! on load.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

pub const DISEASES_FILE: &str = "diseases.tsv";
pub const GENES_FILE: &str = "genes.tsv";
pub const VARIANTS_FILE: &str = "variants.tsv";
pub const DRUGS_FILE: &str = "drugs.tsv";
pub const JOURNALS_FILE: &str = "journals.tsv";

#[derive(Debug, thiserror::Error)]
pub enum OntologyError {
    #[error("required ontology file `{}` is missing", .0.display())]
    Missing(PathBuf),
    #[error("cannot read `{}`: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A skipped line in one of the table files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineWarning {
    pub file: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file, self.line, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub warnings: Vec<LineWarning>,
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Concept id ↔ surface term mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymTable {
    concepts: BTreeMap<String, BTreeSet<String>>,
    term_to_concept: HashMap<String, String>,
}

impl SynonymTable {
    /// Add a term. Returns an error message when the term already belongs to
    /// a different concept; the table is left unchanged in that case.
    pub fn insert(&mut self, concept: &str, term: &str) -> Result<(), String> {
        let concept = concept.trim();
        let term = fold(term);
        if concept.is_empty() || term.is_empty() {
            return Err("empty concept id or term".into());
        }
        if let Some(owner) = self.term_to_concept.get(&term) {
            if owner != concept {
                return Err(format!("term `{term}` already mapped to concept {owner}"));
            }
            return Ok(());
        }
        self.term_to_concept.insert(term.clone(), concept.to_string());
        self.concepts.entry(concept.to_string()).or_default().insert(term);
        Ok(())
    }

    pub fn concept_of(&self, term: &str) -> Option<&str> {
        self.term_to_concept.get(&fold(term)).map(String::as_str)
    }

    pub fn terms_of(&self, concept: &str) -> Option<&BTreeSet<String>> {
        self.concepts.get(concept)
    }

    /// All surface terms of the concept owning `term`, or just the folded
    /// term itself when it is unknown.
    pub fn synonyms(&self, term: &str) -> BTreeSet<String> {
        match self.concept_of(term) {
            Some(c) => self.concepts[c].clone(),
            None => BTreeSet::from([fold(term)]),
        }
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Canonical TSV: sorted by concept, then term.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (concept, terms) in &self.concepts {
            for t in terms {
                out.push_str(&format!("{concept}\t{t}\n"));
            }
        }
        out
    }
}

/// Gene concept id → known variant strings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariantTable {
    variants: BTreeMap<String, BTreeSet<String>>,
}

impl VariantTable {
    pub fn insert(&mut self, gene: &str, variant: &str) -> Result<(), String> {
        let (gene, variant) = (gene.trim(), fold(variant));
        if gene.is_empty() || variant.is_empty() {
            return Err("empty gene id or variant".into());
        }
        self.variants.entry(gene.to_string()).or_default().insert(variant);
        Ok(())
    }

    pub fn variants_of(&self, gene: &str) -> BTreeSet<String> {
        self.variants.get(gene).cloned().unwrap_or_default()
    }

    pub fn gene_count(&self) -> usize {
        self.variants.len()
    }

    pub fn to_tsv(&self) -> String {
        pairs_tsv(&self.variants)
    }
}

/// Disease or gene concept id → associated drug names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DrugAssociations {
    drugs: BTreeMap<String, BTreeSet<String>>,
}

impl DrugAssociations {
    pub fn insert(&mut self, concept: &str, drug: &str) -> Result<(), String> {
        let (concept, drug) = (concept.trim(), fold(drug));
        if concept.is_empty() || drug.is_empty() {
            return Err("empty concept id or drug".into());
        }
        self.drugs.entry(concept.to_string()).or_default().insert(drug);
        Ok(())
    }

    pub fn drugs_for(&self, concept: &str) -> BTreeSet<String> {
        self.drugs.get(concept).cloned().unwrap_or_default()
    }

    pub fn to_tsv(&self) -> String {
        pairs_tsv(&self.drugs)
    }
}

fn pairs_tsv(map: &BTreeMap<String, BTreeSet<String>>) -> String {
    let mut out = String::new();
    for (k, vs) in map {
        for v in vs {
            out.push_str(&format!("{k}\t{v}\n"));
        }
    }
    out
}

/// Journal name → H5 index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JournalImpact {
    h5: BTreeMap<String, u32>,
}

impl JournalImpact {
    pub fn insert(&mut self, journal: &str, h5: u32) -> Result<(), String> {
        let journal = fold(journal);
        if journal.is_empty() {
            return Err("empty journal name".into());
        }
        if self.h5.contains_key(&journal) {
            return Err(format!("duplicate journal `{journal}`"));
        }
        self.h5.insert(journal, h5);
        Ok(())
    }

    /// H5 index of `journal`, 0 when unknown.
    pub fn impact_of(&self, journal: &str) -> u32 {
        self.h5.get(&fold(journal)).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.h5.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h5.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        self.h5.iter().map(|(j, h)| format!("{j}\t{h}\n")).collect()
    }
}

/// All five tables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    pub diseases: SynonymTable,
    pub genes: SynonymTable,
    pub variants: VariantTable,
    pub drugs: DrugAssociations,
    pub journals: JournalImpact,
}

impl Ontology {
    /// Load the five standard files from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<(Ontology, LoadReport), OntologyError> {
        load_tables(&OntologyPaths::in_dir(dir))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OntologyPaths {
    pub diseases: PathBuf,
    pub genes: PathBuf,
    pub variants: PathBuf,
    pub drugs: PathBuf,
    pub journals: PathBuf,
}

impl OntologyPaths {
    pub fn in_dir(dir: impl AsRef<Path>) -> OntologyPaths {
        let dir = dir.as_ref();
        OntologyPaths {
            diseases: dir.join(DISEASES_FILE),
            genes: dir.join(GENES_FILE),
            variants: dir.join(VARIANTS_FILE),
            drugs: dir.join(DRUGS_FILE),
            journals: dir.join(JOURNALS_FILE),
        }
    }

    fn all(&self) -> [&PathBuf; 5] {
        [&self.diseases, &self.genes, &self.variants, &self.drugs, &self.journals]
    }
}

fn read_required(path: &Path) -> Result<String, OntologyError> {
    if !path.exists() {
        return Err(OntologyError::Missing(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| OntologyError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Feed every well-formed `(a, b)` line of `text` to `sink`; malformed lines
/// and lines rejected by the sink are recorded as warnings.
fn each_pair(
    file: &str,
    text: &str,
    warnings: &mut Vec<LineWarning>,
    mut sink: impl FnMut(&str, &str) -> Result<(), String>,
) {
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let result = match line.split('\t').collect::<Vec<_>>().as_slice() {
            [a, b] => sink(a, b),
            cols => Err(format!("expected 2 tab-separated columns, found {}", cols.len())),
        };
        if let Err(message) = result {
            tracing::warn!(file, line = no + 1, %message, "skipping ontology line");
            warnings.push(LineWarning {
                file: file.to_string(),
                line: no + 1,
                message,
            });
        }
    }
}

/// Load all five tables. Every file must exist; malformed lines are skipped
/// and listed in the report.
pub fn load_tables(paths: &OntologyPaths) -> Result<(Ontology, LoadReport), OntologyError> {
    let mut texts = Vec::with_capacity(5);
    for p in paths.all() {
        texts.push(read_required(p)?);
    }
    let name = |p: &PathBuf| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string())
    };
    let mut ont = Ontology::default();
    let mut w = Vec::new();
    each_pair(&name(&paths.diseases), &texts[0], &mut w, |c, t| ont.diseases.insert(c, t));
    each_pair(&name(&paths.genes), &texts[1], &mut w, |c, t| ont.genes.insert(c, t));
    each_pair(&name(&paths.variants), &texts[2], &mut w, |g, v| ont.variants.insert(g, v));
    each_pair(&name(&paths.drugs), &texts[3], &mut w, |c, d| ont.drugs.insert(c, d));
    each_pair(&name(&paths.journals), &texts[4], &mut w, |j, h| {
        let h5 = h
            .trim()
            .parse::<u32>()
            .map_err(|e| format!("bad h5 value `{h}`: {e}"))?;
        ont.journals.insert(j, h5)
    });
    Ok((ont, LoadReport { warnings: w }))
}

/// Write the tables back in canonical form to `dir`.
pub fn dump_tables(ont: &Ontology, dir: impl AsRef<Path>) -> std::io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join(DISEASES_FILE), ont.diseases.to_tsv())?;
    fs::write(dir.join(GENES_FILE), ont.genes.to_tsv())?;
    fs::write(dir.join(VARIANTS_FILE), ont.variants.to_tsv())?;
    fs::write(dir.join(DRUGS_FILE), ont.drugs.to_tsv())?;
    fs::write(dir.join(JOURNALS_FILE), ont.journals.to_tsv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(lines: &str) -> (SynonymTable, Vec<LineWarning>) {
        let mut t = SynonymTable::default();
        let mut w = Vec::new();
        each_pair("t.tsv", lines, &mut w, |c, s| t.insert(c, s));
        (t, w)
    }

    #[test]
    fn disease_synonyms_share_concept() {
        let (t, w) = table("D001\tlung adenocarcinoma\nD001\tadenocarcinoma of lung\n");
        assert!(w.is_empty());
        assert_eq!(t.concept_of("lung adenocarcinoma"), Some("D001"));
        assert_eq!(t.concept_of("Adenocarcinoma of Lung"), Some("D001"));
    }

    #[test]
    fn gene_aliases() {
        let (t, _) = table("# genes\nG0042\tCDK4\nG0042\tPSK-J3\nG0042\tCMM3\n");
        let expected: BTreeSet<String> = ["cdk4", "psk-j3", "cmm3"].map(String::from).into();
        assert_eq!(t.synonyms("cdk4"), expected);
        assert_eq!(t.synonyms("Cdk4"), t.synonyms("CDK4"));
        assert_eq!(t.synonyms("zzz"), BTreeSet::from(["zzz".to_string()]));
    }

    #[test]
    fn conflicting_term_is_skipped() {
        let (t, w) = table("G1\tabc\nG2\tABC\nG2\tdef\nbroken line\n");
        assert_eq!(t.concept_of("abc"), Some("G1"));
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].line, 2);
        assert_eq!(w[1].line, 4);
    }

    #[test]
    fn variants_and_journals() {
        let mut v = VariantTable::default();
        v.insert("G1", "V600E").unwrap();
        v.insert("G1", "V600E").unwrap();
        v.insert("G1", "K601E").unwrap();
        assert_eq!(v.variants_of("G1").len(), 2);
        assert!(v.variants_of("G9").is_empty());

        let mut j = JournalImpact::default();
        j.insert("nature medicine", 90).unwrap();
        assert!(j.insert("Nature Medicine", 1).is_err());
        assert_eq!(j.impact_of("Nature Medicine"), 90);
        assert_eq!(j.impact_of("unknown"), 0);
    }

    #[test]
    fn missing_file_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        for f in [DISEASES_FILE, GENES_FILE, VARIANTS_FILE, DRUGS_FILE] {
            fs::write(dir.path().join(f), "").unwrap();
        }
        match Ontology::load_dir(dir.path()) {
            Err(OntologyError::Missing(p)) => assert!(p.ends_with(JOURNALS_FILE)),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(dir.path().join(JOURNALS_FILE), "nature\tNaN\n").unwrap();
        let (ont, report) = Ontology::load_dir(dir.path()).unwrap();
        assert_eq!(ont.variants.gene_count(), 0);
        assert_eq!(report.warnings.len(), 1);
    }
}
