//! Expand a patient profile through the ontology tables.
//!
//! `cargo run --example expand_profile`

use pmr::profile::{expand_profile, ExpandOptions, GeneSpec, PatientProfile};
use pmr::synthetic::fixture_ontology;

fn main() {
    let ont = fixture_ontology();
    let profiles = [
        ("Liposarcoma", "CDK4"),
        ("Lung adenocarcinoma", "KRAS (G12C)"),
        ("Zebra fever", "ZZZ1"),
    ];
    for (disease, gene) in profiles {
        let profile = PatientProfile {
            disease: disease.into(),
            genes: vec![GeneSpec::parse(gene).unwrap()],
            age: Some(38),
            gender: None,
            other: vec!["GERD".into()],
        };
        let ep = expand_profile(&profile, &ont, &ExpandOptions::default());
        println!("{disease} / {gene}");
        println!("{}\n", serde_json::to_string_pretty(&ep).unwrap());
    }
    let off = ExpandOptions { use_variants: false, ..ExpandOptions::default() };
    let profile = PatientProfile {
        disease: "Melanoma".into(),
        genes: vec![GeneSpec { name: "BRAF".into(), variant: None }],
        age: None,
        gender: None,
        other: vec![],
    };
    let ep = expand_profile(&profile, &ont, &off);
    println!("variants disabled, BRAF candidates: {:?}", ep.genes[0].candidate_variants);
}
