//! Article records, MeSH filtering, tokenization and the fielded inverted index.
//!
//! The index is built once from a newline-delimited JSON stream and is
//! immutable afterwards. Scores follow the classic tf-idf family with a
//! length norm:
//!
//! ```text
//! score(t, f, d) = sqrt(tf) * idf(t, f)^2 / sqrt(|f_d|)
//! idf(t, f)      = 1 + ln(N / (df(t, f) + 1))
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize};

/// Snapshot header written on the first line of a persisted index.
pub const SNAPSHOT_MAGIC: &str = "pmr-index";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("unknown pmid `{0}`")]
    UnknownPmid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },
}

/// A single abstract record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub pmid: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default, rename = "mesh")]
    pub mesh_codes: Vec<String>,
    #[serde(default)]
    pub journal: String,
    /// Publication year, 0 when unknown.
    #[serde(default, deserialize_with = "year_or_zero")]
    pub year: i32,
}

fn year_or_zero<'de, D: Deserializer<'de>>(d: D) -> Result<i32, D::Error> {
    Ok(Option::<i32>::deserialize(d)?.unwrap_or(0))
}

impl Article {
    /// Text of one field. Keywords are joined with a space.
    pub fn field_text(&self, field: Field) -> String {
        match field {
            Field::Title => self.title.clone(),
            Field::Abstract => self.abstract_text.clone(),
            Field::Keywords => self.keywords.join(" "),
        }
    }

    pub fn field_tokens(&self, field: Field) -> Vec<String> {
        tokenize(&self.field_text(field))
    }

    fn validate(&self) -> Result<(), String> {
        if self.pmid.trim().is_empty() {
            return Err("empty pmid".into());
        }
        if self.year != 0 && !(1800..=2100).contains(&self.year) {
            return Err(format!("year {} outside [1800, 2100]", self.year));
        }
        Ok(())
    }
}

/// Searchable text fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Abstract,
    Keywords,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Title, Field::Abstract, Field::Keywords];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::Keywords => "keywords",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    fn parse(s: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Keep articles carrying at least one disease (`C`) or chemicals-and-drugs
/// (`D`) MeSH code.
pub fn mesh_filter(article: &Article) -> bool {
    article
        .mesh_codes
        .iter()
        .any(|code| code.starts_with('C') || code.starts_with('D'))
}

/// Lowercase and split on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|frag| !frag.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub positions: Vec<u32>,
}

impl Posting {
    pub fn tf(&self) -> u32 {
        self.positions.len() as u32
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct FieldIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    lengths: Vec<u32>,
}

impl FieldIndex {
    fn add(&mut self, doc: u32, tokens: &[String]) {
        let mut per_term: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        for (pos, tok) in tokens.iter().enumerate() {
            per_term.entry(tok).or_default().push(pos as u32);
        }
        for (term, positions) in per_term {
            self.postings
                .entry(term.to_string())
                .or_default()
                .push(Posting { doc, positions });
        }
        self.lengths.push(tokens.len() as u32);
    }
}

/// Problems encountered while ingesting a record stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestIssue {
    Malformed { line: usize, message: String },
    DuplicatePmid { line: usize, pmid: String },
}

impl fmt::Display for IngestIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestIssue::Malformed { line, message } => {
                write!(f, "line {line}: malformed record: {message}")
            }
            IngestIssue::DuplicatePmid { line, pmid } => {
                write!(f, "line {line}: duplicate pmid `{pmid}` rejected")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub read: usize,
    pub kept: usize,
    pub filtered: usize,
    pub issues: Vec<IngestIssue>,
}

impl IngestReport {
    pub fn skipped(&self) -> usize {
        self.issues.len()
    }
}

/// Immutable fielded inverted index over the kept articles.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    articles: Vec<Article>,
    by_pmid: HashMap<String, u32>,
    fields: [FieldIndex; 3],
}

impl Index {
    /// Build from already-parsed articles. Articles failing [`mesh_filter`]
    /// and duplicate pmids are dropped.
    pub fn from_articles<I: IntoIterator<Item = Article>>(articles: I) -> Index {
        let mut builder = IndexBuilder::default();
        for a in articles {
            if mesh_filter(&a) && !builder.by_pmid.contains_key(&a.pmid) {
                builder.push(a);
            }
        }
        builder.finish()
    }

    /// Number of indexed articles.
    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn article(&self, doc: u32) -> &Article {
        &self.articles[doc as usize]
    }

    pub fn get(&self, pmid: &str) -> Option<&Article> {
        self.doc_id(pmid).map(|d| self.article(d))
    }

    pub fn doc_id(&self, pmid: &str) -> Option<u32> {
        self.by_pmid.get(pmid).copied()
    }

    pub fn postings(&self, field: Field, term: &str) -> &[Posting] {
        self.fields[field.slot()]
            .postings
            .get(term)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn df(&self, field: Field, term: &str) -> usize {
        self.postings(field, term).len()
    }

    pub fn field_len(&self, field: Field, doc: u32) -> u32 {
        self.fields[field.slot()].lengths[doc as usize]
    }

    pub fn tf(&self, field: Field, term: &str, doc: u32) -> u32 {
        let postings = self.postings(field, term);
        postings
            .binary_search_by_key(&doc, |p| p.doc)
            .map(|i| postings[i].tf())
            .unwrap_or(0)
    }

    pub fn idf(&self, field: Field, term: &str) -> f64 {
        let n = self.len() as f64;
        let df = self.df(field, term) as f64;
        1.0 + (n / (df + 1.0)).ln()
    }

    /// Score of `term` in `field` of document `doc`; 0 when absent.
    pub fn term_score_doc(&self, field: Field, term: &str, doc: u32) -> f64 {
        let tf = self.tf(field, term, doc);
        if tf == 0 {
            return 0.0;
        }
        let idf = self.idf(field, term);
        let norm = 1.0 / f64::from(self.field_len(field, doc)).sqrt();
        f64::from(tf).sqrt() * idf * idf * norm
    }

    pub fn term_score(&self, field: Field, term: &str, pmid: &str) -> Result<f64, IndexError> {
        let doc = self
            .doc_id(pmid)
            .ok_or_else(|| IndexError::UnknownPmid(pmid.to_string()))?;
        Ok(self.term_score_doc(field, term, doc))
    }

    /// Documents in which `phrase` occurs as an exact adjacent token run in
    /// `field`, with the number of occurrences.
    pub fn phrase_docs(&self, field: Field, phrase: &[String]) -> Vec<(u32, u32)> {
        let Some((first, rest)) = phrase.split_first() else {
            return Vec::new();
        };
        let lists: Vec<&[Posting]> = rest.iter().map(|t| self.postings(field, t)).collect();
        if lists.iter().any(|l| l.is_empty()) {
            return Vec::new();
        }
        let mut out = Vec::new();
        'docs: for head in self.postings(field, first) {
            let mut follow = Vec::with_capacity(lists.len());
            for list in &lists {
                match list.binary_search_by_key(&head.doc, |p| p.doc) {
                    Ok(i) => follow.push(&list[i].positions),
                    Err(_) => continue 'docs,
                }
            }
            let count = head
                .positions
                .iter()
                .filter(|&&start| {
                    follow
                        .iter()
                        .enumerate()
                        .all(|(off, ps)| ps.binary_search(&(start + off as u32 + 1)).is_ok())
                })
                .count() as u32;
            if count > 0 {
                out.push((head.doc, count));
            }
        }
        out
    }

    /// Postings dump in a canonical, fully sorted text form.
    pub fn canonical_postings(&self) -> String {
        let mut out = String::new();
        for field in Field::ALL {
            let fi = &self.fields[field.slot()];
            for (term, postings) in &fi.postings {
                out.push_str(&format!("P\t{field}\t{term}"));
                for p in postings {
                    let pos: Vec<String> = p.positions.iter().map(u32::to_string).collect();
                    out.push_str(&format!("\t{}:{}", self.articles[p.doc as usize].pmid, pos.join(",")));
                }
                out.push('\n');
            }
            for (doc, len) in fi.lengths.iter().enumerate() {
                out.push_str(&format!("L\t{field}\t{}\t{len}\n", self.articles[doc].pmid));
            }
        }
        out
    }

    /// Persist as a textual snapshot:
    ///
    /// ```text
    /// pmr-index 1
    /// N <count>
    /// A <article json>          (one per article, in document order)
    /// P <field> <term> <pmid>:<p1,p2,..> ...
    /// L <field> <pmid> <token count>
    /// ```
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<(), IndexError> {
        writeln!(w, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
        writeln!(w, "N\t{}", self.len())?;
        for a in &self.articles {
            let json = serde_json::to_string(a).expect("article serializes");
            writeln!(w, "A\t{json}")?;
        }
        w.write_all(self.canonical_postings().as_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Load a snapshot. Postings are rebuilt from the stored articles and
    /// checked against the stored postings section.
    pub fn read_snapshot<R: BufRead>(r: R) -> Result<Index, IndexError> {
        let mut lines = r.lines().enumerate();
        let bad = |line: usize, message: String| IndexError::Snapshot { line: line + 1, message };
        let (_, header) = lines
            .next()
            .ok_or_else(|| bad(0, "empty snapshot".into()))?;
        let header = header?;
        let expected = format!("{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}");
        if header.trim() != expected {
            return Err(bad(0, format!("expected header `{expected}`, found `{header}`")));
        }
        let mut declared_n = None;
        let mut builder = IndexBuilder::default();
        let mut stored = String::new();
        for (no, line) in lines {
            let line = line?;
            let (tag, rest) = line.split_once('\t').unwrap_or((line.as_str(), ""));
            match tag {
                "N" => {
                    declared_n = Some(
                        rest.parse::<usize>()
                            .map_err(|e| bad(no, format!("bad count: {e}")))?,
                    )
                }
                "A" => {
                    let a: Article = serde_json::from_str(rest)
                        .map_err(|e| bad(no, format!("bad article: {e}")))?;
                    if builder.by_pmid.contains_key(&a.pmid) {
                        return Err(bad(no, format!("duplicate pmid `{}`", a.pmid)));
                    }
                    builder.push(a);
                }
                "P" | "L" => {
                    stored.push_str(&line);
                    stored.push('\n');
                }
                "" => {}
                other => return Err(bad(no, format!("unknown record tag `{other}`"))),
            }
        }
        let index = builder.finish();
        if declared_n != Some(index.len()) {
            return Err(bad(1, format!("declared N {declared_n:?} but found {} articles", index.len())));
        }
        if stored != index.canonical_postings() {
            return Err(bad(0, "stored postings do not match rebuilt postings".into()));
        }
        Ok(index)
    }
}

#[derive(Default)]
struct IndexBuilder {
    articles: Vec<Article>,
    by_pmid: HashMap<String, u32>,
    fields: [FieldIndex; 3],
}

impl IndexBuilder {
    fn push(&mut self, article: Article) {
        let doc = self.articles.len() as u32;
        for field in Field::ALL {
            let tokens = article.field_tokens(field);
            self.fields[field.slot()].add(doc, &tokens);
        }
        self.by_pmid.insert(article.pmid.clone(), doc);
        self.articles.push(article);
    }

    fn finish(self) -> Index {
        Index {
            articles: self.articles,
            by_pmid: self.by_pmid,
            fields: self.fields,
        }
    }
}

/// Ingest a newline-delimited JSON record stream. Malformed records and
/// duplicate pmids are reported and skipped; ingestion always continues.
pub fn ingest_corpus<R: BufRead>(source: R) -> Result<(Index, IngestReport), IndexError> {
    let mut report = IngestReport::default();
    let mut builder = IndexBuilder::default();
    for (no, line) in source.lines().enumerate() {
        let line_no = no + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.read += 1;
        let article = match serde_json::from_str::<Article>(&line)
            .map_err(|e| e.to_string())
            .and_then(|a| a.validate().map(|()| a))
        {
            Ok(a) => a,
            Err(message) => {
                tracing::warn!(line = line_no, %message, "skipping malformed record");
                report.issues.push(IngestIssue::Malformed { line: line_no, message });
                continue;
            }
        };
        if !mesh_filter(&article) {
            report.filtered += 1;
            continue;
        }
        if builder.by_pmid.contains_key(&article.pmid) {
            tracing::warn!(line = line_no, pmid = %article.pmid, "duplicate pmid rejected");
            report.issues.push(IngestIssue::DuplicatePmid { line: line_no, pmid: article.pmid });
            continue;
        }
        builder.push(article);
        report.kept += 1;
    }
    Ok((builder.finish(), report))
}

/// Parse a field name as used in snapshots and query text.
pub fn parse_field(s: &str) -> Option<Field> {
    Field::parse(s)
}
