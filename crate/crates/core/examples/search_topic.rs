//! Build the boolean query for a topic and print the explained ranking.
//!
//! `cargo run --example search_topic [topic-id]`

use std::collections::BTreeSet;

use pmr::corpus::Index;
use pmr::pipeline::{format_outcome, Engine, SearchSettings};
use pmr::synthetic::{fixture_ontology, synthetic_corpus, synthetic_topics};

fn main() {
    let wanted = std::env::args().nth(1);
    let topics = synthetic_topics();
    let index = Index::from_articles(synthetic_corpus(200, 2017).into_iter().filter(pmr::corpus::mesh_filter));
    let settings = SearchSettings { use_labeler: false, ..SearchSettings::default() };
    let engine = Engine::new(index, fixture_ontology(), None, settings.clone());
    for topic in topics.iter().filter(|t| wanted.as_deref().is_none_or(|w| w == t.id)) {
        let out = engine.search(&topic.profile, &settings, &BTreeSet::new()).expect("search");
        println!("== topic {}", topic.id);
        print!("{}", format_outcome(&engine, &out, 5, true));
        println!();
    }
}
