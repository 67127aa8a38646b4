//! Train the relevance perceptron with each optimizer and compare accuracy.
//!
//! `cargo run --example train_labeler`

use pmr::corpus::Index;
use pmr::labeler::{train, OptimizerKind, PerceptronModel, TrainConfig};
use pmr::pipeline::{accuracy, training_examples, SearchSettings};
use pmr::synthetic::{fixture_ontology, planted_fixture};

fn main() {
    let fx = planted_fixture();
    let index = Index::from_articles(fx.articles.iter().filter(|a| pmr::corpus::mesh_filter(a)).cloned());
    let ont = fixture_ontology();
    let examples = training_examples(&index, &ont, &fx.topics, &fx.qrels, &SearchSettings::default().expand_options());
    println!("{} labeled examples", examples.len());
    for (optimizer, lr) in [(OptimizerKind::Sgd, 0.1), (OptimizerKind::Adagrad, 0.1), (OptimizerKind::Adadelta, 1.0)] {
        let cfg = TrainConfig { optimizer, learning_rate: lr, epochs: 30, ..TrainConfig::default() };
        let model = train(&examples, &cfg).expect("non-empty training set");
        println!("{optimizer:<9} lr={lr:<4} updates={:<4} accuracy={:.3}", model.updates, accuracy(&model, &examples));
        let restored = PerceptronModel::from_text(&model.to_text()).unwrap();
        assert_eq!(restored.weights, model.weights);
    }
}
