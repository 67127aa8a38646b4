//! Deterministic synthetic data: a small ontology, a randomized abstract
//! corpus with topics, and a hand-built corpus with planted relevant
//! articles. Used by the tests, the examples and the demo service.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Article;
use crate::evaluation::Qrels;
use crate::ontology::Ontology;
use crate::profile::{Gender, GeneSpec, PatientProfile, Topic};

/// (concept id, surface terms)
pub const DISEASES: [(&str, &[&str]); 10] = [
    ("D001", &["lung adenocarcinoma", "adenocarcinoma of the lung", "pulmonary adenocarcinoma"]),
    ("D002", &["melanoma", "malignant melanoma", "cutaneous melanoma"]),
    ("D003", &["colorectal cancer", "colorectal carcinoma", "crc"]),
    ("D004", &["breast cancer", "breast carcinoma", "mammary carcinoma"]),
    ("D005", &["pancreatic cancer", "pancreatic ductal adenocarcinoma", "pdac"]),
    ("D006", &["glioblastoma", "glioblastoma multiforme", "gbm"]),
    ("D007", &["liposarcoma", "dedifferentiated liposarcoma"]),
    ("D008", &["cholangiocarcinoma", "bile duct cancer"]),
    ("D009", &["thyroid cancer", "papillary thyroid carcinoma"]),
    ("D010", &["gastric cancer", "stomach cancer", "gastric adenocarcinoma"]),
];

pub const GENES: [(&str, &[&str]); 10] = [
    ("G001", &["KRAS", "K-RAS", "KRAS2"]),
    ("G002", &["BRAF", "B-RAF", "BRAF1"]),
    ("G003", &["EGFR", "ERBB1", "HER1"]),
    ("G004", &["CDK4", "PSK-J3", "CMM3", "cyclin dependent kinase 4", "cell division protein kinase 4"]),
    ("G005", &["ERBB2", "HER2", "NEU"]),
    ("G006", &["PIK3CA", "p110alpha"]),
    ("G007", &["IDH1", "isocitrate dehydrogenase 1"]),
    ("G008", &["ALK", "CD246"]),
    ("G009", &["NTRK1", "TRKA"]),
    ("G010", &["MET", "c-MET", "HGFR"]),
];

pub const VARIANTS: [(&str, &[&str]); 10] = [
    ("G001", &["G12C", "G12D", "G12V", "G13D"]),
    ("G002", &["V600E", "V600K", "K601E"]),
    ("G003", &["L858R", "T790M", "exon 19 deletion"]),
    ("G004", &["amplification"]),
    ("G005", &["amplification", "S310F"]),
    ("G006", &["H1047R", "E545K"]),
    ("G007", &["R132H"]),
    ("G008", &["fusion", "EML4-ALK"]),
    ("G009", &["fusion"]),
    ("G010", &["amplification", "exon 14 skipping"]),
];

pub const DRUGS: [(&str, &[&str]); 16] = [
    ("D001", &["pemetrexed", "cisplatin"]),
    ("D002", &["ipilimumab"]),
    ("D003", &["fluorouracil"]),
    ("D004", &["tamoxifen"]),
    ("D005", &["gemcitabine"]),
    ("D006", &["temozolomide"]),
    ("D007", &["doxorubicin"]),
    ("G001", &["sotorasib", "adagrasib"]),
    ("G002", &["vemurafenib", "dabrafenib"]),
    ("G003", &["gefitinib", "erlotinib", "osimertinib"]),
    ("G004", &["palbociclib"]),
    ("G005", &["trastuzumab"]),
    ("G006", &["alpelisib"]),
    ("G007", &["ivosidenib"]),
    ("G008", &["crizotinib"]),
    ("G009", &["larotrectinib"]),
];

pub const JOURNALS: [(&str, u32); 10] = [
    ("New England Journal of Medicine", 365),
    ("The Lancet", 301),
    ("Journal of Clinical Oncology", 211),
    ("PLoS ONE", 176),
    ("Cancer Research", 151),
    ("Clinical Cancer Research", 146),
    ("Nature Medicine", 90),
    ("Oncotarget", 86),
    ("BMC Cancer", 61),
    ("Case Reports in Oncology", 18),
];

/// The fixture ontology built from the constant tables above.
pub fn fixture_ontology() -> Ontology {
    let mut o = Ontology::default();
    for (c, terms) in DISEASES {
        for t in terms {
            o.diseases.insert(c, t).expect("fixture disease");
        }
    }
    for (c, terms) in GENES {
        for t in terms {
            o.genes.insert(c, t).expect("fixture gene");
        }
    }
    for (g, vs) in VARIANTS {
        for v in vs {
            o.variants.insert(g, v).expect("fixture variant");
        }
    }
    for (c, ds) in DRUGS {
        for d in ds {
            o.drugs.insert(c, d).expect("fixture drug");
        }
    }
    for (j, h) in JOURNALS {
        o.journals.insert(j, h).expect("fixture journal");
    }
    o
}

fn gene(name: &str, variant: Option<&str>) -> GeneSpec {
    GeneSpec {
        name: name.into(),
        variant: variant.map(String::from),
    }
}

fn topic(id: &str, disease: &str, genes: Vec<GeneSpec>, age: Option<u32>, gender: Option<Gender>, other: &[&str]) -> Topic {
    Topic {
        id: id.into(),
        profile: PatientProfile {
            disease: disease.into(),
            genes,
            age,
            gender,
            other: other.iter().map(|s| s.to_string()).collect(),
        },
    }
}

/// Ten topics over the fixture ontology, mixing specified and unspecified
/// variants, both genders, missing demographics, other conditions and a
/// two-gene profile.
pub fn synthetic_topics() -> Vec<Topic> {
    use Gender::*;
    vec![
        topic("1", "Lung adenocarcinoma", vec![gene("KRAS", Some("G12C"))], Some(61), Some(Female), &["Hypertension", "Hypercholesterolemia"]),
        topic("2", "Melanoma", vec![gene("BRAF", None)], Some(45), Some(Male), &[]),
        topic("3", "Colorectal cancer", vec![gene("KRAS", Some("G12D"))], Some(52), Some(Male), &["Diabetes"]),
        topic("4", "Breast cancer", vec![gene("ERBB2", Some("amplification"))], Some(48), Some(Female), &[]),
        topic("5", "Liposarcoma", vec![gene("CDK4", None)], Some(38), Some(Male), &[]),
        topic("6", "Lung adenocarcinoma", vec![gene("EGFR", None)], Some(70), Some(Female), &["Obesity"]),
        topic("7", "Glioblastoma", vec![gene("IDH1", Some("R132H"))], None, None, &[]),
        topic("8", "Pancreatic cancer", vec![gene("KRAS", None), gene("PIK3CA", None)], Some(66), Some(Female), &[]),
        topic("9", "Cholangiocarcinoma", vec![gene("NTRK1", None)], Some(57), Some(Male), &["Hypertension"]),
        topic("10", "Thyroid cancer", vec![gene("BRAF", Some("V600E"))], Some(33), Some(Female), &[]),
    ]
}

const FILLER: [&str; 24] = [
    "patients", "outcomes", "study", "cohort", "analysis", "response", "survival", "clinical",
    "retrospective", "observed", "results", "trial", "median", "progression", "tumor", "associated",
    "expression", "cells", "evaluated", "significant", "phase", "data", "years", "follow-up",
];
const TREATMENT_WORDS: [&str; 7] = ["treatment", "therapy", "surgery", "chemotherapy", "radiotherapy", "immunotherapy", "resection"];
const OTHER_CONDITIONS: [&str; 4] = ["hypertension", "diabetes", "hypercholesterolemia", "obesity"];
const MALE: [&str; 4] = ["male patients", "men", "a man", "boys"];
const FEMALE: [&str; 4] = ["female patients", "women", "a woman", "girls"];
const CD_CODES: [&str; 6] = ["C04.557", "C08.381", "C17.800", "D27.505", "D12.644", "C06.301"];
const OTHER_CODES: [&str; 5] = ["A01.236", "B01.050", "E05.200", "G02.111", "N06.850"];

fn concept_terms<'a>(table: &'a [(&'a str, &'a [&'a str])], id: &str) -> &'a [&'a str] {
    table.iter().find(|(c, _)| *c == id).map(|(_, t)| *t).unwrap_or(&[])
}

fn concept_id_for(table: &[(&'static str, &[&str])], term: &str) -> &'static str {
    table
        .iter()
        .find(|(_, ts)| ts.iter().any(|t| t.eq_ignore_ascii_case(term)))
        .map(|(c, _)| *c)
        .expect("topic term in fixture table")
}

fn filler(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| FILLER.choose(rng).unwrap().to_string()).collect()
}

/// `n` random articles. Roughly 60% are built around one of the
/// [`synthetic_topics`] and the rest around random concepts; each mention
/// class is included independently so many articles miss one must clause.
/// About a fifth carry no C/D MeSH code.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<Article> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = synthetic_topics();
    (0..n)
        .map(|i| {
            let focus = rng.random_bool(0.6).then(|| topics.choose(&mut rng).unwrap());
            let (disease_id, gene) = match focus {
                Some(t) => {
                    let g = t.profile.genes.choose(&mut rng).unwrap();
                    (concept_id_for(&DISEASES, &t.profile.disease), Some(g))
                }
                None => (DISEASES.choose(&mut rng).unwrap().0, None),
            };
            let gene_id = match gene {
                Some(g) => concept_id_for(&GENES, &g.name),
                None => GENES.choose(&mut rng).unwrap().0,
            };
            let mut mentions: Vec<String> = Vec::new();
            if rng.random_bool(0.85) {
                mentions.push(concept_terms(&DISEASES, disease_id).choose(&mut rng).unwrap().to_string());
            }
            if rng.random_bool(0.8) {
                mentions.push(concept_terms(&GENES, gene_id).choose(&mut rng).unwrap().to_string());
            }
            let specified = gene.and_then(|g| g.variant.clone());
            if rng.random_bool(0.6) {
                match specified {
                    Some(v) if rng.random_bool(0.8) => mentions.push(v),
                    _ => {
                        if let Some(v) = concept_terms(&VARIANTS, gene_id).choose(&mut rng) {
                            mentions.push(v.to_string());
                        }
                    }
                }
            }
            if rng.random_bool(0.5) {
                let pool = if rng.random_bool(0.5) { gene_id } else { disease_id };
                if let Some(d) = concept_terms(&DRUGS, pool).choose(&mut rng) {
                    mentions.push(d.to_string());
                }
            }
            if rng.random_bool(0.55) {
                mentions.push(TREATMENT_WORDS.choose(&mut rng).unwrap().to_string());
            }
            if rng.random_bool(0.3) {
                let own = focus.and_then(|t| t.profile.other.choose(&mut rng)).map(|o| o.to_lowercase());
                mentions.push(own.unwrap_or_else(|| OTHER_CONDITIONS.choose(&mut rng).unwrap().to_string()));
            }
            match rng.random_range(0..10) {
                0..=2 => mentions.push(MALE.choose(&mut rng).unwrap().to_string()),
                3..=5 => mentions.push(FEMALE.choose(&mut rng).unwrap().to_string()),
                6 => {
                    mentions.push(MALE.choose(&mut rng).unwrap().to_string());
                    mentions.push(FEMALE.choose(&mut rng).unwrap().to_string());
                }
                _ => {}
            }

            let mut title = filler(&mut rng, 2);
            let abstract_len = rng.random_range(10..30);
            let mut abstract_words = filler(&mut rng, abstract_len);
            let mut keywords = Vec::new();
            for m in &mentions {
                match rng.random_range(0..4) {
                    0 => title.insert(rng.random_range(0..=title.len()), m.clone()),
                    1 => keywords.push(m.clone()),
                    _ => {}
                }
                for _ in 0..rng.random_range(1..=3) {
                    let at = rng.random_range(0..=abstract_words.len());
                    abstract_words.insert(at, m.clone());
                }
            }
            let mut mesh = Vec::new();
            if rng.random_bool(0.8) {
                mesh.push(CD_CODES.choose(&mut rng).unwrap().to_string());
            }
            if rng.random_bool(0.5) || mesh.is_empty() {
                mesh.push(OTHER_CODES.choose(&mut rng).unwrap().to_string());
            }
            let journal = if rng.random_bool(0.85) {
                JOURNALS.choose(&mut rng).unwrap().0.to_string()
            } else {
                "Journal of Unindexed Studies".to_string()
            };
            let year = if rng.random_bool(0.05) { 0 } else { rng.random_range(1985..=2018) };
            Article {
                pmid: format!("{}", 100_000 + i),
                title: title.join(" "),
                abstract_text: format!("{}.", abstract_words.join(" ")),
                keywords,
                mesh_codes: mesh,
                journal,
                year,
            }
        })
        .collect()
}

/// Corpus whose expected ordering is known by construction.
#[derive(Debug, Clone)]
pub struct PlantedFixture {
    pub articles: Vec<Article>,
    pub topics: Vec<Topic>,
    pub qrels: Qrels,
    /// topic id → planted relevant pmids.
    pub planted: BTreeMap<String, Vec<String>>,
}

/// Topic ids of [`planted_fixture`] by the feature that separates planted
/// articles from their competitors.
pub const PLANTED_VARIANT_TOPIC: &str = "pv";
pub const PLANTED_RERANK_TOPIC: &str = "pr";
pub const PLANTED_LABELER_TOPIC: &str = "pl";

fn article(pmid: &str, title: &str, abs: &str, keywords: &[&str], journal: &str, year: i32) -> Article {
    Article {
        pmid: pmid.into(),
        title: title.into(),
        abstract_text: abs.into(),
        keywords: keywords.iter().map(|s| s.to_string()).collect(),
        mesh_codes: vec!["C04.557".into()],
        journal: journal.into(),
        year,
    }
}

/// Three topics, each with three planted relevant articles (grade 2) and
/// three competitors (grade 0) that satisfy every must clause:
///
/// * `pv`: competitors outscore the planted articles unless candidate
///   variants are matched as optional clauses; journal and year are equal.
/// * `pr`: competitors score slightly higher in the same bucket but are old
///   and from low-impact journals.
/// * `pl`: competitors score higher but mention the profile only in the
///   abstract and keywords, which the labeler learns to reject.
///
/// Every topic also has a gender-contradicting article and unrelated noise.
pub fn planted_fixture() -> PlantedFixture {
    use Gender::*;
    let topics = vec![
        topic(PLANTED_VARIANT_TOPIC, "Melanoma", vec![gene("BRAF", None)], Some(58), Some(Male), &[]),
        topic(PLANTED_RERANK_TOPIC, "Lung adenocarcinoma", vec![gene("EGFR", Some("L858R"))], Some(64), Some(Female), &[]),
        topic(PLANTED_LABELER_TOPIC, "Colorectal cancer", vec![gene("KRAS", Some("G12D"))], Some(52), Some(Male), &[]),
    ];
    let jco = "Journal of Clinical Oncology";
    let weak = "Case Reports in Oncology";
    let mut articles = Vec::new();
    let mut planted: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut qrels = Qrels::default();
    let mut judge = |topic: &str, pmid: &str, grade: u8| {
        qrels.topics.entry(topic.to_string()).or_default().insert(pmid.to_string(), grade);
    };

    let variants = ["V600E", "V600K", "K601E"];
    for (i, v) in variants.iter().enumerate() {
        let pmid = format!("pv-rel-{i}");
        articles.push(article(
            &pmid,
            &format!("Dabrafenib response in BRAF {v} mutant melanoma across a multicenter cohort"),
            &format!(
                "Patients with BRAF {v} melanoma received dabrafenib therapy. Outcomes of the {v} subgroup were recorded over five years of follow-up in a large multicenter registry."
            ),
            &["targeted therapy"],
            jco,
            2015,
        ));
        judge(PLANTED_VARIANT_TOPIC, &pmid, 2);
        planted.entry(PLANTED_VARIANT_TOPIC.into()).or_default().push(pmid);

        let pmid = format!("pv-comp-{i}");
        let extra = ["vemurafenib", "dabrafenib", "therapy"][i];
        articles.push(article(
            &pmid,
            &format!("Melanoma BRAF therapy {extra}"),
            &format!("Melanoma BRAF melanoma BRAF therapy {extra}."),
            &["melanoma", "BRAF"],
            jco,
            2015,
        ));
        judge(PLANTED_VARIANT_TOPIC, &pmid, 0);
    }

    for i in 0..3 {
        let pmid = format!("pr-rel-{i}");
        let journal = ["New England Journal of Medicine", "The Lancet", jco][i];
        articles.push(article(
            &pmid,
            &format!("Osimertinib for EGFR L858R lung adenocarcinoma: cohort {i}"),
            "Women with EGFR L858R lung adenocarcinoma were treated with osimertinib therapy and followed for progression.",
            &["lung adenocarcinoma", "EGFR"],
            journal,
            2017,
        ));
        judge(PLANTED_RERANK_TOPIC, &pmid, 2);
        planted.entry(PLANTED_RERANK_TOPIC.into()).or_default().push(pmid);

        let pmid = format!("pr-comp-{i}");
        articles.push(article(
            &pmid,
            &format!("Osimertinib for EGFR L858R lung adenocarcinoma: cohort {i}"),
            "Women with EGFR L858R lung adenocarcinoma were treated with osimertinib therapy and erlotinib and followed for progression.",
            &["lung adenocarcinoma", "EGFR"],
            weak,
            1991,
        ));
        judge(PLANTED_RERANK_TOPIC, &pmid, 0);
    }

    for i in 0..3 {
        let pmid = format!("pl-rel-{i}");
        articles.push(article(
            &pmid,
            &format!("Fluorouracil treatment of KRAS G12D colorectal cancer, series {i}"),
            "We report fluorouracil treatment in KRAS G12D colorectal cancer with durable responses in a prospective multicenter cohort of adult patients enrolled between two thousand and ten and two thousand and fifteen.",
            &[],
            "Cancer Research",
            2014,
        ));
        judge(PLANTED_LABELER_TOPIC, &pmid, 2);
        planted.entry(PLANTED_LABELER_TOPIC.into()).or_default().push(pmid);

        let pmid = format!("pl-comp-{i}");
        articles.push(article(
            &pmid,
            &format!("Regional registry report number {i}"),
            "Colorectal cancer KRAS G12D colorectal cancer KRAS G12D treatment fluorouracil colorectal cancer KRAS G12D.",
            &["colorectal cancer", "KRAS", "G12D", "treatment"],
            "Cancer Research",
            2014,
        ));
        judge(PLANTED_LABELER_TOPIC, &pmid, 0);
    }

    articles.push(article(
        "pv-gender",
        "Dabrafenib in BRAF V600E melanoma among women",
        "A cohort of women with BRAF V600E melanoma received dabrafenib therapy.",
        &[],
        jco,
        2018,
    ));
    judge(PLANTED_VARIANT_TOPIC, "pv-gender", 0);
    articles.push(article(
        "pr-gender",
        "Osimertinib for EGFR L858R lung adenocarcinoma in men",
        "Male patients with EGFR L858R lung adenocarcinoma received osimertinib therapy.",
        &[],
        jco,
        2018,
    ));
    judge(PLANTED_RERANK_TOPIC, "pr-gender", 0);
    articles.push(article(
        "pl-gender",
        "Fluorouracil treatment of KRAS G12D colorectal cancer in women",
        "Female patients with KRAS G12D colorectal cancer received fluorouracil treatment.",
        &[],
        "Cancer Research",
        2014,
    ));
    judge(PLANTED_LABELER_TOPIC, "pl-gender", 0);

    let noise = [
        ("noise-0", "Bone fracture healing in rodents", "Fracture healing was observed."),
        ("noise-1", "Melanoma incidence trends", "Melanoma incidence rose over three decades."),
        ("noise-2", "EGFR signaling in keratinocytes", "EGFR signaling regulates keratinocyte growth."),
        ("noise-3", "Colorectal cancer screening uptake", "Screening uptake for colorectal cancer improved."),
    ];
    for (pmid, title, abs) in noise {
        articles.push(article(pmid, title, abs, &[], weak, 2000));
    }
    let mut filtered = article("pv-nomesh", "Dabrafenib in BRAF V600E melanoma", "BRAF V600E melanoma therapy.", &[], jco, 2018);
    filtered.mesh_codes = vec!["A01.236".into()];
    articles.push(filtered);

    PlantedFixture {
        articles,
        topics,
        qrels,
        planted,
    }
}

/// Write the fixture ontology as the five TSV files into `dir`.
pub fn write_fixture_ontology(dir: impl AsRef<std::path::Path>) -> std::io::Result<()> {
    crate::ontology::dump_tables(&fixture_ontology(), dir)
}

/// Topics serialized in the topics-file format.
pub fn topics_json(topics: &[Topic]) -> String {
    let arr: Vec<serde_json::Value> = topics
        .iter()
        .map(|t| {
            let p = &t.profile;
            let demographic = match (p.age, p.gender) {
                (Some(a), Some(Gender::Male)) => format!("{a}-year-old male"),
                (Some(a), Some(Gender::Female)) => format!("{a}-year-old female"),
                _ => "adult".to_string(),
            };
            serde_json::json!({
                "id": t.id,
                "disease": p.disease,
                "genes": p.genes,
                "demographic": demographic,
                "other": p.other,
            })
        })
        .collect();
    serde_json::to_string_pretty(&arr).expect("topics serialize")
}

/// Articles as newline-delimited JSON records.
pub fn corpus_jsonl(articles: &[Article]) -> String {
    articles
        .iter()
        .map(|a| serde_json::to_string(a).expect("article serializes") + "\n")
        .collect()
}
