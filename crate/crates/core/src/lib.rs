//! Precision-medicine article retrieval.
//!
//! A patient profile (disease, genes and variants, demographics, other
//! conditions) is expanded through flat-file ontologies, compiled into a
//! boolean query over a fielded inverted index of abstracts, filtered by a
//! perceptron relevance labeler, and ranked by bucketed relevance blended
//! with journal impact and publication recency. Runs are scored with the
//! usual trec metrics.
//!
//! | module | role |
//! |---|---|
//! | [`corpus`] | article records, MeSH filter, tokenizer, inverted index, tf-idf |
//! | [`ontology`] | synonym, variant, drug and journal-impact tables |
//! | [`profile`] | topic parsing and profile expansion |
//! | [`query`] | boolean query formulation, execution, demographic rule |
//! | [`labeler`] | frequency features, perceptron, SGD/Adagrad/Adadelta |
//! | [`ranker`] | two-tier ranking |
//! | [`evaluation`] | run/qrels files, P@k, R-prec, NDCG |
//! | [`pipeline`] | configuration, [`pipeline::Engine`], command implementations |
//! | [`service`] | HTTP/JSON API |
//! | [`synthetic`] | deterministic fixture data |
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod corpus;
pub mod evaluation;
pub mod labeler;
pub mod ontology;
pub mod pipeline;
pub mod profile;
pub mod query;
pub mod ranker;
pub mod service;
pub mod synthetic;

pub use corpus::{Article, Field, Index};
pub use ontology::Ontology;
pub use pipeline::{Engine, PipelineConfig, SearchSettings};
pub use profile::{ExpandedProfile, PatientProfile};
pub use query::{Query, ScoredArticle};
pub use ranker::RankingParams;
