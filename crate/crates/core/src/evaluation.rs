//! trec-style run / qrels files and the P@k, R-prec and NDCG metrics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

/// topic → pmid → grade (0, 1 or 2).
pub type TopicQrels = BTreeMap<String, u8>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    pub topics: BTreeMap<String, TopicQrels>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEntry {
    pub pmid: String,
    pub rank: u32,
    pub score: f64,
    pub tag: String,
}

/// topic → entries ordered by rank.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFile {
    pub topics: BTreeMap<String, Vec<RunEntry>>,
}

impl RunFile {
    /// Build a topic list from pmids in rank order.
    pub fn push_topic<I, S>(&mut self, topic: &str, ranked: I, tag: &str)
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let entries = ranked
            .into_iter()
            .enumerate()
            .map(|(i, (pmid, score))| RunEntry {
                pmid: pmid.into(),
                rank: i as u32 + 1,
                score,
                tag: tag.to_string(),
            })
            .collect();
        self.topics.insert(topic.to_string(), entries);
    }

    pub fn ranked_pmids(&self, topic: &str) -> Vec<&str> {
        self.topics
            .get(topic)
            .map(|v| v.iter().map(|e| e.pmid.as_str()).collect())
            .unwrap_or_default()
    }

    /// `topic Q0 pmid rank score tag` lines, topics in canonical order.
    pub fn to_trec(&self) -> String {
        let mut out = String::new();
        for (topic, entries) in &self.topics {
            for e in entries {
                let _ = writeln!(out, "{topic} Q0 {} {} {:.6} {}", e.pmid, e.rank, e.score, e.tag);
            }
        }
        out
    }
}

fn warn(warnings: &mut Vec<String>, msg: String) {
    tracing::warn!("{msg}");
    warnings.push(msg);
}

/// Parse `topic 0 pmid grade` lines. Malformed lines, grades outside 0..=2
/// and repeated (topic, pmid) pairs are skipped with a warning.
pub fn parse_qrels(text: &str) -> (Qrels, Vec<String>) {
    let mut q = Qrels::default();
    let mut warnings = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        let [topic, _, pmid, grade] = cols.as_slice() else {
            warn(&mut warnings, format!("qrels line {}: expected 4 columns", no + 1));
            continue;
        };
        let grade = match grade.parse::<u8>() {
            Ok(g) if g <= 2 => g,
            _ => {
                warn(&mut warnings, format!("qrels line {}: grade `{grade}` not in 0..=2", no + 1));
                continue;
            }
        };
        let entry = q.topics.entry(topic.to_string()).or_default();
        if entry.contains_key(*pmid) {
            warn(&mut warnings, format!("qrels line {}: duplicate judgment for {topic}/{pmid}", no + 1));
            continue;
        }
        entry.insert(pmid.to_string(), grade);
    }
    (q, warnings)
}

pub fn qrels_to_trec(q: &Qrels) -> String {
    let mut out = String::new();
    for (topic, judged) in &q.topics {
        for (pmid, g) in judged {
            let _ = writeln!(out, "{topic} 0 {pmid} {g}");
        }
    }
    out
}

/// Parse `topic Q0 pmid rank score tag` lines. Entries are ordered by rank
/// (file order breaks ties) and renumbered 1..n; duplicate pmids within a
/// topic are dropped.
pub fn parse_run(text: &str) -> (RunFile, Vec<String>) {
    let mut raw: BTreeMap<String, Vec<(u32, usize, RunEntry)>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        let [topic, _, pmid, rank, score, tag] = cols.as_slice() else {
            warn(&mut warnings, format!("run line {}: expected 6 columns", no + 1));
            continue;
        };
        let (Ok(rank), Ok(score)) = (rank.parse::<u32>(), score.parse::<f64>()) else {
            warn(&mut warnings, format!("run line {}: bad rank or score", no + 1));
            continue;
        };
        raw.entry(topic.to_string()).or_default().push((
            rank,
            no,
            RunEntry {
                pmid: pmid.to_string(),
                rank,
                score,
                tag: tag.to_string(),
            },
        ));
    }
    let mut run = RunFile::default();
    for (topic, mut entries) in raw {
        entries.sort_by_key(|(rank, no, _)| (*rank, *no));
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(entries.len());
        for (_, _, e) in entries {
            if !seen.insert(e.pmid.clone()) {
                warn(&mut warnings, format!("run topic {topic}: duplicate pmid {}", e.pmid));
                continue;
            }
            out.push(e);
        }
        let mut renumbered = false;
        for (i, e) in out.iter_mut().enumerate() {
            let want = i as u32 + 1;
            renumbered |= e.rank != want;
            e.rank = want;
        }
        if renumbered {
            warn(&mut warnings, format!("run topic {topic}: ranks were not contiguous; renumbered"));
        }
        run.topics.insert(topic, out);
    }
    (run, warnings)
}

fn grade(q: &TopicQrels, pmid: &str) -> u8 {
    q.get(pmid).copied().unwrap_or(0)
}

/// Fraction of the top `cutoff` that is judged grade >= 1. Missing slots
/// count as non-relevant.
pub fn precision_at(run: &[&str], q: &TopicQrels, cutoff: usize) -> f64 {
    assert!(cutoff >= 1, "cutoff must be at least 1");
    let hits = run.iter().take(cutoff).filter(|p| grade(q, p) >= 1).count();
    hits as f64 / cutoff as f64
}

/// Precision at R, R being the number of grade >= 1 judgments; 0 when R = 0.
pub fn r_precision(run: &[&str], q: &TopicQrels) -> f64 {
    let r = q.values().filter(|&&g| g >= 1).count();
    if r == 0 {
        0.0
    } else {
        precision_at(run, q, r)
    }
}

/// NDCG with linear gain and `log2(rank + 1)` discount; full depth when
/// `cutoff` is `None`. 0 when the ideal DCG is 0.
pub fn ndcg(run: &[&str], q: &TopicQrels, cutoff: Option<usize>) -> f64 {
    let depth = cutoff.unwrap_or(usize::MAX);
    let dcg: f64 = run
        .iter()
        .take(depth)
        .enumerate()
        .map(|(i, p)| f64::from(grade(q, p)) / (i as f64 + 2.0).log2())
        .fold(0.0, |a, b| a + b);
    let mut ideal: Vec<u8> = q.values().copied().filter(|&g| g > 0).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(depth)
        .enumerate()
        .map(|(i, &g)| f64::from(g) / (i as f64 + 2.0).log2())
        .fold(0.0, |a, b| a + b);
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub p5: f64,
    pub p10: f64,
    pub r_prec: f64,
    pub ndcg: f64,
    pub ndcg10: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 5] = ["P_5", "P_10", "Rprec", "ndcg", "ndcg_cut_10"];

    pub fn compute(run: &[&str], q: &TopicQrels) -> Metrics {
        Metrics {
            p5: precision_at(run, q, 5),
            p10: precision_at(run, q, 10),
            r_prec: r_precision(run, q),
            ndcg: ndcg(run, q, None),
            ndcg10: ndcg(run, q, Some(10)),
        }
    }

    pub fn values(&self) -> [f64; 5] {
        [self.p5, self.p10, self.r_prec, self.ndcg, self.ndcg10]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricReport {
    pub per_topic: BTreeMap<String, Metrics>,
    pub mean: Metrics,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct MetricRecord<'a> {
    metric: &'a str,
    topic: &'a str,
    value: Option<f64>,
}

impl MetricReport {
    /// trec_eval-style aligned text: `metric  topic  value`, per topic then
    /// `all`. infNDCG is reported as `n/a`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut rows = |topic: &str, m: &Metrics| {
            for (name, v) in Metrics::NAMES.iter().zip(m.values()) {
                let _ = writeln!(out, "{name:<16}{topic:<8}{v:.4}");
            }
        };
        for (topic, m) in &self.per_topic {
            rows(topic, m);
        }
        rows("all", &self.mean);
        let _ = writeln!(out, "{:<16}{:<8}n/a", "infNDCG", "all");
        out
    }

    /// One JSON object per line: `{"metric", "topic", "value"}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let mut push = |topic: &str, m: &Metrics| {
            for (name, v) in Metrics::NAMES.iter().zip(m.values()) {
                let rec = MetricRecord { metric: name, topic, value: Some(v) };
                out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
                out.push('\n');
            }
        };
        for (topic, m) in &self.per_topic {
            push(topic, m);
        }
        push("all", &self.mean);
        let na = MetricRecord { metric: "infNDCG", topic: "all", value: None };
        out.push_str(&serde_json::to_string(&na).expect("record serializes"));
        out.push('\n');
        out
    }
}

/// Per-topic metrics for every qrels topic (topics without run entries
/// score 0) and their arithmetic means. Run topics absent from the qrels are
/// skipped with a warning.
pub fn evaluate(run: &RunFile, qrels: &Qrels) -> MetricReport {
    let mut report = MetricReport::default();
    for topic in run.topics.keys() {
        if !qrels.topics.contains_key(topic) {
            warn(&mut report.warnings, format!("topic {topic} has no judgments; skipped"));
        }
    }
    for (topic, q) in &qrels.topics {
        let ranked = run.ranked_pmids(topic);
        report.per_topic.insert(topic.clone(), Metrics::compute(&ranked, q));
    }
    let n = report.per_topic.len();
    if n > 0 {
        let mut sums = [0.0; 5];
        for m in report.per_topic.values() {
            for (s, v) in sums.iter_mut().zip(m.values()) {
                *s += v;
            }
        }
        let nf = n as f64;
        report.mean = Metrics {
            p5: sums[0] / nf,
            p10: sums[1] / nf,
            r_prec: sums[2] / nf,
            ndcg: sums[3] / nf,
            ndcg10: sums[4] / nf,
        };
    }
    report
}
