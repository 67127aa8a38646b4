//! Ingest a JSON-lines corpus, report the MeSH filter, query the index and
//! round-trip the snapshot.
//!
//! `cargo run --example build_index [corpus.jsonl]`

use std::io::BufReader;

use pmr::corpus::{ingest_corpus, Field, Index};
use pmr::synthetic::{corpus_jsonl, synthetic_corpus};

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).expect("corpus readable"),
        None => corpus_jsonl(&synthetic_corpus(200, 2017)),
    };
    let (index, report) = ingest_corpus(BufReader::new(text.as_bytes())).expect("corpus ingests");
    println!("read {} / kept {} / filtered {} / skipped {}", report.read, report.kept, report.filtered, report.skipped());

    for term in ["melanoma", "braf", "v600e", "trametinib"] {
        let df = index.df(Field::Abstract, term);
        let idf = index.idf(Field::Abstract, term);
        println!("abstract:{term:<12} df={df:<4} idf={idf:.4}");
    }
    if let Some(p) = index.postings(Field::Abstract, "melanoma").first() {
        let pmid = &index.article(p.doc).pmid;
        let s = index.term_score(Field::Abstract, "melanoma", pmid).unwrap();
        println!("score(abstract, melanoma, {pmid}) = {s:.6}");
    }

    let mut snapshot = Vec::new();
    index.write_snapshot(&mut snapshot).unwrap();
    let back = Index::read_snapshot(BufReader::new(snapshot.as_slice())).expect("snapshot verifies");
    println!("snapshot {} bytes, {} articles after reload", snapshot.len(), back.len());
}
