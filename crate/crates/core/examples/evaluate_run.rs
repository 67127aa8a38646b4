//! Score a run file against qrels.
//!
//! `cargo run --example evaluate_run [run.txt qrels.txt]`

use pmr::evaluation::{evaluate, parse_qrels, parse_run, RunFile};

const QRELS: &str = "1 0 a 2\n1 0 b 1\n1 0 c 0\n1 0 d 2\n2 0 x 1\n3 0 y 2\n";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (run, qrels) = if let [run, qrels] = args.as_slice() {
        let (run, w1) = parse_run(&std::fs::read_to_string(run).expect("run readable"));
        let (qrels, w2) = parse_qrels(&std::fs::read_to_string(qrels).expect("qrels readable"));
        for w in w1.iter().chain(&w2) {
            eprintln!("warning: {w}");
        }
        (run, qrels)
    } else {
        let mut run = RunFile::default();
        run.push_topic("1", [("a", 9.0), ("c", 8.0), ("b", 7.0), ("e", 6.0)], "demo");
        run.push_topic("2", [("q", 3.0), ("x", 2.0)], "demo");
        (run, parse_qrels(QRELS).0)
    };
    let report = evaluate(&run, &qrels);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", report.to_text());
}
