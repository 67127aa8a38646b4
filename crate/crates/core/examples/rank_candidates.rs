//! Show how bucketing, journal impact and recency reorder close scores.
//!
//! `cargo run --example rank_candidates`

use pmr::ranker::{primary_score, secondary_parts, FormulaVariant, RankingParams};

fn main() {
    let rows = [
        ("old-low-impact", 59.0, 10.0, 1990.0),
        ("new-high-impact", 41.0, 400.0, 2018.0),
        ("next-bucket", 61.0, 0.0, 1950.0),
        ("axis", 45.0, 200.0, 2008.0),
    ];
    for formula in [FormulaVariant::Additive, FormulaVariant::AsPrinted] {
        let p = RankingParams { formula, ..RankingParams::default() };
        println!("{formula:?}");
        let mut scored: Vec<_> = rows
            .iter()
            .map(|&(name, s, h, y)| {
                let (r2, sh, sy) = secondary_parts(s, h, y, &p);
                (name, s, primary_score(s, p.k), r2, sh, sy)
            })
            .collect();
        scored.sort_by(|a, b| b.2.cmp(&a.2).then(b.3.total_cmp(&a.3)));
        for (i, (name, s, r1, r2, sh, sy)) in scored.iter().enumerate() {
            println!("  {:>2} {name:<16} s={s:<5} r1={r1} r2={r2:.4} σh={sh:.4} σy={sy:.4}", i + 1);
        }
    }
}
