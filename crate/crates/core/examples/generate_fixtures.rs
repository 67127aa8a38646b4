//! Write the synthetic fixture set used by the integration tests.
//!
//! `cargo run --example generate_fixtures -- crates/core/tests/fixtures`

use std::fs;
use std::path::PathBuf;

use pmr::evaluation::qrels_to_trec;
use pmr::synthetic::{corpus_jsonl, planted_fixture, synthetic_corpus, synthetic_topics, topics_json, write_fixture_ontology};

/// Seed of the committed 200-article corpus.
const CORPUS_SEED: u64 = 2017;

fn main() -> std::io::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()).into();
    write_fixture_ontology(out.join("ontology"))?;
    fs::write(out.join("topics.json"), topics_json(&synthetic_topics()))?;
    fs::write(out.join("corpus.jsonl"), corpus_jsonl(&synthetic_corpus(200, CORPUS_SEED)))?;

    let planted = planted_fixture();
    let dir = out.join("planted");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("corpus.jsonl"), corpus_jsonl(&planted.articles))?;
    fs::write(dir.join("topics.json"), topics_json(&planted.topics))?;
    fs::write(dir.join("qrels.txt"), qrels_to_trec(&planted.qrels))?;
    println!("fixtures written to {}", out.display());
    Ok(())
}
