//! Acceptance suite. Runs without the libtest harness and prints one
//! `PASS` / `FAIL` / `SKIP` line per criterion; exits non-zero on any failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use pmr::corpus::{ingest_corpus, Article, Index};
use pmr::evaluation::{evaluate, parse_qrels, parse_run, Metrics};
use pmr::labeler::{train, OptimizerKind, Optimizer, TrainConfig, Adadelta, Adagrad, Sgd};
use pmr::ontology::{JournalImpact, Ontology};
use pmr::pipeline::{self, PipelineConfig};
use pmr::profile::{expand_profile, parse_topics, ExpandOptions};
use pmr::query::{demographic_compatible, execute, formulate_query, QueryOptions, ScoredArticle};
use pmr::ranker::{rank, sigmoid_norm, FormulaVariant, RankingParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Skip(String),
}

type Check = fn() -> Result<Outcome, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

// ------------------------------------------------------------------ metrics

fn metric_oracle() -> Result<Outcome, String> {
    let started = Instant::now();
    let expected = expected_metrics();
    ensure(expected.len() >= 10, || format!("only {} fixtures", expected.len()))?;
    let dir = fixtures().join("metrics");
    let mut compared = 0;
    for (case, want) in &expected {
        let run_text = fs::read_to_string(dir.join(format!("{case}.run"))).map_err(|e| e.to_string())?;
        let qrels_text = fs::read_to_string(dir.join(format!("{case}.qrels"))).map_err(|e| e.to_string())?;
        let (run, _) = parse_run(&run_text);
        let (qrels, _) = parse_qrels(&qrels_text);
        let report = evaluate(&run, &qrels);
        for (name, got) in Metrics::NAMES.iter().zip(report.mean.values()) {
            let w = want.get(*name).ok_or_else(|| format!("{case}: no expected {name}"))?;
            ensure((got - w).abs() <= 1e-6, || format!("{case} {name}: got {got}, expected {w}"))?;
            compared += 1;
        }
    }
    let took = within(Duration::from_secs(1), started)?;
    let reference = match std::env::var_os("PMR_TREC_EVAL") {
        Some(bin) => format!("; {}", compare_with_reference(PathBuf::from(bin), &expected)?),
        None => "; reference evaluator not configured (PMR_TREC_EVAL)".into(),
    };
    Ok(Outcome::Pass(format!("{} fixtures, {compared} values within 1e-6 in {took:.2?}{reference}", expected.len())))
}

/// Agreement with an external trec evaluator binary within 1e-4.
fn compare_with_reference(bin: PathBuf, expected: &BTreeMap<String, BTreeMap<String, f64>>) -> Result<String, String> {
    let dir = fixtures().join("metrics");
    let names = [("P_5", "P_5"), ("P_10", "P_10"), ("Rprec", "Rprec"), ("ndcg", "ndcg"), ("ndcg_cut_10", "ndcg_cut_10")];
    for (case, want) in expected {
        let out = std::process::Command::new(&bin)
            .args(["-c", "-m", "P.5,10", "-m", "Rprec", "-m", "ndcg", "-m", "ndcg_cut.10"])
            .arg(dir.join(format!("{case}.qrels")))
            .arg(dir.join(format!("{case}.run")))
            .output()
            .map_err(|e| format!("cannot run {}: {e}", bin.display()))?;
        let text = String::from_utf8_lossy(&out.stdout);
        for line in text.lines() {
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 3 || cols[1] != "all" {
                continue;
            }
            if let Some((_, ours)) = names.iter().find(|(theirs, _)| *theirs == cols[0]) {
                let v: f64 = cols[2].parse().map_err(|_| format!("bad value in `{line}`"))?;
                let w = want[*ours];
                ensure((v - w).abs() <= 1e-4, || format!("{case} {ours}: reference {v}, ours {w}"))?;
            }
        }
    }
    Ok("reference evaluator agrees within 1e-4".into())
}

// ------------------------------------------------------------------ ranking

struct Cand {
    pmid: String,
    s: f64,
    h: u32,
    y: i32,
}

fn random_params(rng: &mut ChaCha8Rng) -> RankingParams {
    RankingParams {
        k: rng.random_range(5.0..40.0),
        w_s: rng.random_range(0.0..2.0),
        w_h: rng.random_range(0.0..2.0),
        w_y: rng.random_range(0.0..2.0),
        h_axis: rng.random_range(50.0..300.0),
        y_axis: rng.random_range(1990.0..2015.0),
        c_h: rng.random_range(0.01..0.2),
        c_y: rng.random_range(0.2..2.0),
        formula: FormulaVariant::Additive,
    }
}

fn random_set(rng: &mut ChaCha8Rng, k: f64) -> Vec<Cand> {
    let n = rng.random_range(1..40);
    (0..n)
        .map(|i| {
            let s = match rng.random_range(0..4) {
                0 => k * rng.random_range(0..5) as f64,
                1 => k * rng.random_range(1..5) as f64 - 1e-9,
                _ => rng.random_range(0.0..120.0),
            };
            Cand {
                pmid: format!("{:05}", rng.random_range(0..100_000) * 100 + i),
                s,
                h: rng.random_range(0..400),
                y: if rng.random_bool(0.1) { 0 } else { rng.random_range(1950..2025) },
            }
        })
        .collect()
}

/// Index and impact table carrying each candidate's journal (`j<i>`) and year.
fn world(cands: &[Cand]) -> (Index, JournalImpact) {
    let mut impacts = JournalImpact::default();
    let articles: Vec<Article> = cands
        .iter()
        .enumerate()
        .map(|(i, c)| {
            impacts.insert(&format!("j{i}"), c.h).expect("distinct journal");
            Article {
                pmid: c.pmid.clone(),
                title: "t".into(),
                abstract_text: String::new(),
                keywords: vec![],
                mesh_codes: vec!["C01".into()],
                journal: format!("j{i}"),
                year: c.y,
            }
        })
        .collect();
    (Index::from_articles(articles), impacts)
}

fn scored(cands: &[Cand]) -> Vec<ScoredArticle> {
    cands
        .iter()
        .map(|c| ScoredArticle {
            pmid: c.pmid.clone(),
            doc: 0,
            base_score: c.s,
            coord: 1.0,
            matched_should: 0,
            clause_scores: vec![],
            label: None,
            r1: None,
            r2: None,
            sigma_h: None,
            sigma_y: None,
            rank: None,
        })
        .collect()
}

fn ranked_pmids(cands: &[Cand], p: &RankingParams) -> Vec<String> {
    let (index, impacts) = world(cands);
    rank(scored(cands), &index, &impacts, p).into_iter().map(|c| c.pmid).collect()
}

fn ranking_properties() -> Result<Outcome, String> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_170_101);
    let mut pairs = 0usize;
    for set_no in 0..1000 {
        let mut p = random_params(&mut rng);
        if set_no % 10 == 9 {
            p.formula = FormulaVariant::AsPrinted;
        }
        let mut cands = random_set(&mut rng, p.k);
        // distinct pmids
        let mut seen = BTreeSet::new();
        cands.retain(|c| seen.insert(c.pmid.clone()));
        let (index, impacts) = world(&cands);
        let ranked = rank(scored(&cands), &index, &impacts, &p);
        let by_pmid: BTreeMap<&str, &Cand> = cands.iter().map(|c| (c.pmid.as_str(), c)).collect();

        // ranks 1..n
        for (i, r) in ranked.iter().enumerate() {
            ensure(r.rank == Some(i as u32 + 1), || format!("set {set_no}: rank field {:?} at {i}", r.rank))?;
        }
        // bucket dominance, with buckets computed here
        let bucket = |pmid: &str| (by_pmid[pmid].s / p.k).floor();
        for i in 0..ranked.len() {
            for j in i + 1..ranked.len() {
                pairs += 1;
                ensure(bucket(&ranked[i].pmid) >= bucket(&ranked[j].pmid), || {
                    format!("set {set_no}: {} (s={}) ranked above {} (s={})", ranked[i].pmid, by_pmid[ranked[i].pmid.as_str()].s, ranked[j].pmid, by_pmid[ranked[j].pmid.as_str()].s)
                })?;
            }
        }
        // permutation invariance
        let mut shuffled: Vec<Cand> = cands.iter().map(|c| Cand { pmid: c.pmid.clone(), s: c.s, h: c.h, y: c.y }).collect();
        shuffled.shuffle(&mut rng);
        let base: Vec<String> = ranked.iter().map(|c| c.pmid.clone()).collect();
        ensure(ranked_pmids(&shuffled, &p) == base, || format!("set {set_no}: order depends on input order"))?;

        // within-bucket monotonicity in h and y
        if p.formula == FormulaVariant::Additive {
            let target = rng.random_range(0..cands.len());
            let pos = |list: &[String]| list.iter().position(|x| *x == cands[target].pmid).expect("present");
            let before = pos(&base);
            let mut more_h: Vec<Cand> = cands.iter().map(|c| Cand { pmid: c.pmid.clone(), s: c.s, h: c.h, y: c.y }).collect();
            more_h[target].h += rng.random_range(1..200);
            ensure(pos(&ranked_pmids(&more_h, &p)) <= before, || format!("set {set_no}: higher h moved later"))?;
            let mut more_y: Vec<Cand> = cands.iter().map(|c| Cand { pmid: c.pmid.clone(), s: c.s, h: c.h, y: c.y }).collect();
            more_y[target].y += rng.random_range(1..20);
            ensure(pos(&ranked_pmids(&more_y, &p)) <= before, || format!("set {set_no}: later year moved later"))?;
        }

        // σ: exact half at the axis, strictly inside (0, 1) while c·|x - axis| <= 30
        let axis = rng.random_range(-1e4..1e4);
        let c = rng.random_range(1e-3..10.0);
        ensure(sigmoid_norm(axis, axis, c) == 0.5, || format!("σ(axis) != 0.5 for axis {axis}, c {c}"))?;
        for _ in 0..20 {
            let x = axis + rng.random_range(-30.0..30.0) / c;
            let v = sigmoid_norm(x, axis, c);
            ensure(v > 0.0 && v < 1.0, || format!("σ({x}, {axis}, {c}) = {v}"))?;
            let mirror = sigmoid_norm(2.0 * axis - x, axis, c);
            ensure((v + mirror - 1.0).abs() < 1e-12, || format!("σ not symmetric about {axis}"))?;
        }
    }
    let took = within(Duration::from_secs(10), started)?;
    Ok(Outcome::Pass(format!("1000 sets, {pairs} ordered pairs in {took:.2?}")))
}

// ---------------------------------------------------------------- retrieval

fn boolean_oracle() -> Result<Outcome, String> {
    let started = Instant::now();
    let corpus = fs::read_to_string(fixtures().join("corpus.jsonl")).map_err(|e| e.to_string())?;
    let raw: Vec<Article> = corpus.lines().map(|l| serde_json::from_str(l).expect("fixture record")).collect();
    ensure(raw.len() == 200, || format!("corpus has {} articles", raw.len()))?;
    let (index, _) = ingest_corpus(corpus.as_bytes()).map_err(|e| e.to_string())?;
    let scan = Scan::new(&raw);
    ensure(index.len() == scan.len(), || format!("index N={} but {} C/D fixtures", index.len(), scan.len()))?;
    let (ont, _) = Ontology::load_dir(fixtures().join("ontology")).map_err(|e| e.to_string())?;
    let topics = parse_topics(&fs::read_to_string(fixtures().join("topics.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?
        .topics;
    ensure(topics.len() == 10, || format!("{} topics", topics.len()))?;

    let mut retrieved = 0;
    let mut nonempty = 0;
    let mut compared = 0;
    let (mut partial, mut rejected) = (0, 0);
    for use_variants in [true, false] {
        let opts = ExpandOptions { use_variants, ..ExpandOptions::default() };
        for t in &topics {
            let ep = expand_profile(&t.profile, &ont, &opts);
            let q = formulate_query(&ep, &QueryOptions::default());
            let hits = execute(&q, &index);
            let got: BTreeMap<String, f64> = hits.iter().map(|h| (h.pmid.clone(), h.base_score)).collect();
            let want = scan.search(&ep, 2.0, 1.0, false);
            let got_set: BTreeSet<&String> = got.keys().collect();
            let want_set: BTreeSet<&String> = want.keys().collect();
            ensure(got_set == want_set, || {
                format!("topic {}: extra {:?}, missing {:?}", t.id, got_set.difference(&want_set).collect::<Vec<_>>(), want_set.difference(&got_set).collect::<Vec<_>>())
            })?;
            for (pmid, w) in &want {
                let g = got[pmid];
                ensure((g - w).abs() <= 1e-9, || format!("topic {} pmid {pmid}: score {g} vs oracle {w}", t.id))?;
                compared += 1;
            }
            let kept: BTreeSet<String> = hits
                .iter()
                .filter(|h| demographic_compatible(index.article(h.doc), ep.gender))
                .map(|h| h.pmid.clone())
                .collect();
            let want_demo: BTreeSet<String> = scan.search(&ep, 2.0, 1.0, true).into_keys().collect();
            ensure(kept == want_demo, || format!("topic {}: demographic filter disagrees", t.id))?;
            retrieved += got.len();
            partial += hits.iter().filter(|h| h.coord < 1.0).count();
            rejected += got.len() - kept.len();
            nonempty += usize::from(!got.is_empty());
        }
    }
    ensure(nonempty >= 10, || format!("only {nonempty} non-empty result lists"))?;
    let took = within(Duration::from_secs(30), started)?;
    Ok(Outcome::Pass(format!(
        "N={}, 10 topics x 2 expansions, {retrieved} hits ({nonempty}/20 lists non-empty, {partial} with unmatched optional clauses, {rejected} gender-rejected), {compared} scores within 1e-9 in {took:.2?}",
        index.len()
    )))
}

// --------------------------------------------------------------- perceptron

fn perceptron_suite() -> Result<Outcome, String> {
    let started = Instant::now();
    let kinds = [OptimizerKind::Sgd, OptimizerKind::Adagrad, OptimizerKind::Adadelta];
    let mut sets = 0;
    for seed in 0..30 {
        for dims in [2, 6, 18] {
            let set = separable_set(seed, 50, dims, 0.1);
            sets += 1;
            for kind in kinds {
                let cfg = TrainConfig { optimizer: kind, epochs: 50, seed, ..TrainConfig::default() };
                let model = train(&set, &cfg).map_err(|e| e.to_string())?;
                let acc = train_accuracy(&model.weights, &set);
                ensure(acc == 1.0, || format!("{kind} on set (seed {seed}, {dims} dims): accuracy {acc}"))?;
                let again = train(&set, &cfg).map_err(|e| e.to_string())?;
                ensure(model.weights.map(f64::to_bits) == again.weights.map(f64::to_bits) && model == again, || {
                    format!("{kind} seed {seed}: retraining differs")
                })?;
            }
        }
    }
    let grads = random_grads(77, 200, 19);
    let mut steps = 0;
    let mut replay = |opt: &mut dyn Optimizer, oracle: Vec<Vec<Vec<f64>>>, name: &str| -> Result<(), String> {
        let mut w = vec![0.0; 19];
        for (t, (g, want)) in grads.iter().zip(oracle).enumerate() {
            opt.step(&mut w, g);
            let mut got = vec![w.clone()];
            got.extend(opt.state().into_iter().map(|(_, v)| v.to_vec()));
            ensure(got.len() == want.len(), || format!("{name}: state shape"))?;
            for (a, b) in got.iter().flatten().zip(want.iter().flatten()) {
                ensure((a - b).abs() <= 1e-12, || format!("{name} step {t}: {a} vs {b}"))?;
            }
            steps += 1;
        }
        Ok(())
    };
    replay(&mut Sgd { lr: 0.05 }, sgd_trajectory(0.05, &grads), "sgd")?;
    replay(&mut Adagrad::new(19, 0.05, 1e-8), adagrad_trajectory(0.05, 1e-8, &grads), "adagrad")?;
    replay(&mut Adadelta::new(19, 0.01, 0.95, 1e-6), adadelta_trajectory(0.01, 0.95, 1e-6, &grads), "adadelta")?;
    let took = started.elapsed();
    Ok(Outcome::Pass(format!(
        "{sets} separable sets x 3 optimizers at 100% within 50 epochs, bitwise deterministic; {steps} optimizer steps within 1e-12 ({took:.2?})"
    )))
}

// --------------------------------------------------------------- end to end

fn recall(run: &pmr::evaluation::RunFile, topic: &str, planted: &BTreeSet<String>) -> usize {
    run.ranked_pmids(topic).into_iter().take(planted.len()).filter(|p| planted.contains(*p)).count()
}

fn planted_relevance() -> Result<Outcome, String> {
    let started = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let src = fixtures().join("planted");
    let qrels_text = fs::read_to_string(src.join("qrels.txt")).map_err(|e| e.to_string())?;
    let (qrels, _) = parse_qrels(&qrels_text);
    let planted: BTreeMap<String, BTreeSet<String>> = qrels
        .topics
        .iter()
        .map(|(t, q)| (t.clone(), q.iter().filter(|(_, g)| **g == 2).map(|(p, _)| p.clone()).collect()))
        .collect();

    let base = PipelineConfig {
        corpus: Some(src.join("corpus.jsonl")),
        index: Some(tmp.path().join("index.snapshot")),
        ontology_dir: Some(fixtures().join("ontology")),
        topics: Some(src.join("topics.json")),
        qrels: Some(src.join("qrels.txt")),
        model: Some(tmp.path().join("model.txt")),
        run: Some(tmp.path().join("run.txt")),
        ..PipelineConfig::default()
    };
    pipeline::cmd_index(&base).map_err(|e| e.to_string())?;
    pipeline::cmd_train(&base).map_err(|e| e.to_string())?;

    let run_with = |f: &dyn Fn(&mut PipelineConfig)| -> Result<pmr::evaluation::RunFile, String> {
        let mut cfg = base.clone();
        f(&mut cfg);
        pipeline::cmd_run(&cfg).map_err(|e| e.to_string())
    };
    let full = run_with(&|_| {})?;
    for (topic, set) in &planted {
        let top: BTreeSet<String> = full.ranked_pmids(topic).into_iter().take(set.len()).map(String::from).collect();
        ensure(&top == set, || format!("topic {topic}: top {} are {top:?}, planted {set:?}", set.len()))?;
    }

    type Toggle = (&'static str, fn(&mut PipelineConfig));
    let toggles: [Toggle; 3] = [
        ("no-labeler", |c| c.search.use_labeler = false),
        ("no-variants", |c| c.search.use_variants = false),
        ("no-rerank", |c| c.search.rerank = false),
    ];
    let mut lines = Vec::new();
    for (name, toggle) in toggles {
        let ablated = run_with(&|c| toggle(c))?;
        for (topic, set) in &planted {
            let (a, f) = (recall(&ablated, topic, set), recall(&full, topic, set));
            ensure(a <= f, || format!("{name} raised recall on {topic}: {a} > {f}"))?;
        }
    }

    // Each toggle against the configuration in which its feature alone
    // separates the planted articles from their competitors.
    type Tweak = fn(&mut PipelineConfig);
    let isolated: [(&str, &str, Tweak, Tweak); 3] = [
        ("no-labeler", "pl", |_| {}, |c| c.search.use_labeler = false),
        ("no-variants", "pv", |c| c.search.use_labeler = false, |c| {
            c.search.use_labeler = false;
            c.search.use_variants = false;
        }),
        ("no-rerank", "pr", |c| c.search.use_labeler = false, |c| {
            c.search.use_labeler = false;
            c.search.rerank = false;
        }),
    ];
    for (name, topic, with, without) in isolated {
        let set = &planted[topic];
        let on = recall(&run_with(&|c| with(c))?, topic, set);
        let off = recall(&run_with(&|c| without(c))?, topic, set);
        ensure(off < on, || format!("{name} on {topic}: recall {off}/{} without vs {on} with", set.len()))?;
        for other in planted.keys() {
            let s = &planted[other];
            let a = recall(&run_with(&|c| without(c))?, other, s);
            let f = recall(&run_with(&|c| with(c))?, other, s);
            ensure(a <= f, || format!("{name} raised recall on {other}"))?;
        }
        lines.push(format!("{name} {topic} {on}/{} -> {off}/{}", set.len(), set.len()));
    }
    let took = started.elapsed();
    Ok(Outcome::Pass(format!("planted pmids on top for {} topics; {} ({took:.2?})", planted.len(), lines.join(", "))))
}

// ----------------------------------------------------------------- external

fn external_data() -> Result<Outcome, String> {
    let var = |k: &str| std::env::var_os(k).map(PathBuf::from);
    let (Some(corpus), Some(topics), Some(qrels)) = (var("PMR_EXTERNAL_CORPUS"), var("PMR_EXTERNAL_TOPICS"), var("PMR_EXTERNAL_QRELS")) else {
        return Ok(Outcome::Skip("set PMR_EXTERNAL_CORPUS, PMR_EXTERNAL_TOPICS and PMR_EXTERNAL_QRELS (optionally PMR_EXTERNAL_ONTOLOGY) to run".into()));
    };
    let started = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ontology_dir = match var("PMR_EXTERNAL_ONTOLOGY") {
        Some(d) => d,
        None => {
            let d = tmp.path().join("ontology");
            pmr::ontology::dump_tables(&Ontology::default(), &d).map_err(|e| e.to_string())?;
            d
        }
    };
    let cfg = PipelineConfig {
        corpus: Some(corpus),
        index: Some(tmp.path().join("index.snapshot")),
        ontology_dir: Some(ontology_dir),
        topics: Some(topics),
        qrels: Some(qrels),
        model: Some(tmp.path().join("model.txt")),
        run: Some(tmp.path().join("run.txt")),
        report: Some(tmp.path().join("report.txt")),
        jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        ..PipelineConfig::default()
    };
    pipeline::cmd_index(&cfg).map_err(|e| e.to_string())?;
    pipeline::cmd_train(&cfg).map_err(|e| e.to_string())?;
    pipeline::cmd_run(&cfg).map_err(|e| e.to_string())?;
    let report = pipeline::cmd_evaluate(&cfg).map_err(|e| e.to_string())?;
    let text = report.to_text();
    for name in Metrics::NAMES {
        ensure(text.lines().any(|l| l.starts_with(name) && l.contains("all")), || format!("report lacks {name}"))?;
    }
    let means: Vec<String> = Metrics::NAMES.iter().zip(report.mean.values()).map(|(n, v)| format!("{n}={v:.4}")).collect();
    Ok(Outcome::Pass(format!("{} topics: {} ({:.2?})", report.per_topic.len(), means.join(" "), started.elapsed())))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 6] = [
        ("metric oracle suite", metric_oracle),
        ("ranking property suite", ranking_properties),
        ("boolean retrieval oracle", boolean_oracle),
        ("perceptron suite", perceptron_suite),
        ("end-to-end planted relevance", planted_relevance),
        ("external-data check", external_data),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(Outcome::Pass(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Outcome::Skip(detail)) => println!("SKIP  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
