//! Start the HTTP service on a synthetic corpus, query it once over TCP and
//! shut down. Pass `--stay` to keep serving.
//!
//! `cargo run --example serve [-- --stay]`

use std::io::{Read, Write};

use pmr::corpus::{mesh_filter, Index};
use pmr::pipeline::{Engine, SearchSettings};
use pmr::service::{serve, AppState};
use pmr::synthetic::{fixture_ontology, synthetic_corpus};

#[tokio::main]
async fn main() {
    let stay = std::env::args().any(|a| a == "--stay");
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let state = AppState::default();
    tokio::spawn(serve(listener, state.clone()));
    println!("listening on http://{addr}");

    let index = Index::from_articles(synthetic_corpus(200, 2017).into_iter().filter(mesh_filter));
    let settings = SearchSettings { use_labeler: false, ..SearchSettings::default() };
    state.install(Engine::new(index, fixture_ontology(), None, settings));

    let body = r#"{"profile":{"disease":"Melanoma","genes":["BRAF"],"demographic":"45-year-old male"},"page_size":3}"#;
    let reply = tokio::task::spawn_blocking(move || {
        let mut s = std::net::TcpStream::connect(addr).unwrap();
        write!(
            s,
            "POST /search HTTP/1.1\r\nhost: {addr}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).unwrap();
        out
    })
    .await
    .unwrap();
    let json = reply.split("\r\n\r\n").nth(1).unwrap_or("");
    let v: serde_json::Value = serde_json::from_str(json).expect("json reply");
    println!("total {}", v["total"]);
    for item in v["items"].as_array().unwrap() {
        println!("  {} {} {}", item["rank"], item["pmid"], item["title"]);
    }
    if stay {
        std::future::pending::<()>().await;
    }
}
