//! Run the planted-relevance fixture under the full pipeline and each
//! ablation toggle, printing the top results and planted recall.
//!
//! `cargo run --example planted_ablation`

use std::collections::BTreeSet;

use pmr::corpus::ingest_corpus;
use pmr::labeler::{train, TrainConfig};
use pmr::pipeline::{training_examples, Engine, SearchSettings};
use pmr::synthetic::{corpus_jsonl, fixture_ontology, planted_fixture};

fn main() {
    let fx = planted_fixture();
    let (index, report) = ingest_corpus(corpus_jsonl(&fx.articles).as_bytes()).expect("fixture ingests");
    println!("indexed {} of {} articles", report.kept, report.read);
    let ontology = fixture_ontology();
    let base = SearchSettings::default();
    let examples = training_examples(&index, &ontology, &fx.topics, &fx.qrels, &base.expand_options());
    let model = train(&examples, &TrainConfig::default()).expect("training succeeds");
    println!("model weights {:?}", model.weights);
    let engine = Engine::new(index, ontology, Some(model), base.clone());

    let variants: [(&str, SearchSettings); 4] = [
        ("full", base.clone()),
        ("no-labeler", SearchSettings { use_labeler: false, ..base.clone() }),
        ("no-variants", SearchSettings { use_variants: false, ..base.clone() }),
        ("no-rerank", SearchSettings { rerank: false, ..base.clone() }),
    ];
    for topic in &fx.topics {
        let planted = &fx.planted[&topic.id];
        println!("\n== topic {} (planted {:?})", topic.id, planted);
        for (name, settings) in &variants {
            let out = engine.search(&topic.profile, settings, &BTreeSet::new()).expect("search succeeds");
            let top: Vec<&str> = out.results.iter().take(planted.len()).map(|c| c.pmid.as_str()).collect();
            let hits = top.iter().filter(|p| planted.iter().any(|q| q == *p)).count();
            println!("  {name:<12} recall {}/{}", hits, planted.len());
            for c in out.results.iter().take(8) {
                println!(
                    "    {:>2} {:<12} s={:.4} r1={:?} r2={:.4} label={:?}",
                    c.rank.unwrap_or(0),
                    c.pmid,
                    c.base_score,
                    c.r1,
                    c.r2.unwrap_or(0.0),
                    c.label
                );
            }
        }
    }
}
