//! Index, train, run and evaluate on the planted fixture through the same
//! entry points as the command line, in a temporary directory.
//!
//! `cargo run --example end_to_end`

use pmr::pipeline::{cmd_evaluate, cmd_index, cmd_run, cmd_train, PipelineConfig};
use pmr::synthetic::{corpus_jsonl, planted_fixture, topics_json, write_fixture_ontology};

fn main() {
    let dir = std::env::temp_dir().join(format!("pmr-end-to-end-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let fx = planted_fixture();
    std::fs::write(dir.join("corpus.jsonl"), corpus_jsonl(&fx.articles)).unwrap();
    std::fs::write(dir.join("topics.json"), topics_json(&fx.topics)).unwrap();
    std::fs::write(dir.join("qrels.txt"), pmr::evaluation::qrels_to_trec(&fx.qrels)).unwrap();
    write_fixture_ontology(dir.join("ontology")).unwrap();

    let cfg = PipelineConfig {
        corpus: Some(dir.join("corpus.jsonl")),
        index: Some(dir.join("index.snapshot")),
        ontology_dir: Some(dir.join("ontology")),
        topics: Some(dir.join("topics.json")),
        qrels: Some(dir.join("qrels.txt")),
        model: Some(dir.join("model.txt")),
        run: Some(dir.join("run.txt")),
        report: Some(dir.join("report.txt")),
        tag: "e2e".into(),
        ..PipelineConfig::default()
    };
    let ingest = cmd_index(&cfg).expect("index");
    println!("indexed {} of {}", ingest.kept, ingest.read);
    let trained = cmd_train(&cfg).expect("train");
    println!("trained on {} examples, accuracy {:.3}", trained.train_examples, trained.train_accuracy);
    let run = cmd_run(&cfg).expect("run");
    for t in &fx.topics {
        println!("{}: {:?}", t.id, run.ranked_pmids(&t.id).iter().take(3).collect::<Vec<_>>());
    }
    print!("{}", cmd_evaluate(&cfg).expect("evaluate").to_text());
    std::fs::remove_dir_all(&dir).ok();
}
