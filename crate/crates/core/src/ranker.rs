//! Two-tier ranking: floor-bucketed relevance first, then a blend of
//! within-bucket relevance, journal impact and recency.

use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Index;
use crate::ontology::JournalImpact;
use crate::query::ScoredArticle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    /// `w_s (s mod k)/k + w_h σ(h) + w_y σ(y)`
    Additive,
    /// `w_s (s mod k) / (k + w_h σ(h)) + w_y σ(y)`
    AsPrinted,
}

impl FromStr for FormulaVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "additive" => Ok(FormulaVariant::Additive),
            "as_printed" | "as-printed" => Ok(FormulaVariant::AsPrinted),
            other => Err(format!("unknown formula variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankingParams {
    pub k: f64,
    pub w_s: f64,
    pub w_h: f64,
    pub w_y: f64,
    pub h_axis: f64,
    pub y_axis: f64,
    pub c_h: f64,
    pub c_y: f64,
    pub formula: FormulaVariant,
}

impl Default for RankingParams {
    fn default() -> Self {
        RankingParams {
            k: 20.0,
            w_s: 1.0,
            w_h: 1.0,
            w_y: 1.0,
            h_axis: 200.0,
            y_axis: 2008.0,
            c_h: 0.05,
            c_y: 1.0,
            formula: FormulaVariant::Additive,
        }
    }
}

impl RankingParams {
    pub fn validate(&self) -> Result<(), String> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        let non_neg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be non-negative, got {v}"))
            }
        };
        pos("k", self.k)?;
        pos("c_h", self.c_h)?;
        pos("c_y", self.c_y)?;
        non_neg("w_s", self.w_s)?;
        non_neg("w_h", self.w_h)?;
        non_neg("w_y", self.w_y)?;
        if !self.h_axis.is_finite() || !self.y_axis.is_finite() {
            return Err("symmetry axes must be finite".into());
        }
        Ok(())
    }
}

/// Shifted logistic `1 / (1 + e^{-c (x - axis)})`.
pub fn sigmoid_norm(x: f64, axis: f64, c: f64) -> f64 {
    1.0 / (1.0 + (-c * (x - axis)).exp())
}

/// `⌊s / k⌋`.
pub fn primary_score(s: f64, k: f64) -> i64 {
    (s / k).floor() as i64
}

/// `s - k ⌊s / k⌋`.
pub fn real_mod(s: f64, k: f64) -> f64 {
    s - k * (s / k).floor()
}

/// Secondary score plus the two normalized factors `(r2, σ(h), σ(y))`.
pub fn secondary_parts(s: f64, h: f64, y: f64, p: &RankingParams) -> (f64, f64, f64) {
    let sh = sigmoid_norm(h, p.h_axis, p.c_h);
    let sy = sigmoid_norm(y, p.y_axis, p.c_y);
    let rem = real_mod(s, p.k);
    let r2 = match p.formula {
        FormulaVariant::Additive => p.w_s * (rem / p.k) + p.w_h * sh + p.w_y * sy,
        FormulaVariant::AsPrinted => p.w_s * rem / (p.k + p.w_h * sh) + p.w_y * sy,
    };
    (r2, sh, sy)
}

pub fn secondary_score(s: f64, h: f64, y: f64, p: &RankingParams) -> f64 {
    secondary_parts(s, h, y, p).0
}

/// Total order used for ranking: r1 desc, r2 desc, s desc, pmid asc.
pub fn rank_order(a: &ScoredArticle, b: &ScoredArticle) -> Ordering {
    b.r1.cmp(&a.r1)
        .then_with(|| b.r2.unwrap_or(0.0).total_cmp(&a.r2.unwrap_or(0.0)))
        .then_with(|| b.base_score.total_cmp(&a.base_score))
        .then_with(|| a.pmid.cmp(&b.pmid))
}

/// Fill r1, r2 and the σ factors for one candidate.
pub fn score_candidate(c: &mut ScoredArticle, h: u32, year: i32, p: &RankingParams) {
    let (r2, sh, sy) = secondary_parts(c.base_score, f64::from(h), f64::from(year), p);
    c.r1 = Some(primary_score(c.base_score, p.k));
    c.r2 = Some(r2);
    c.sigma_h = Some(sh);
    c.sigma_y = Some(sy);
}

/// Rank candidates in place and assign ranks 1..n. Journal and year come
/// from the index; unknown journals get h = 0 and missing years are 0.
pub fn rank(mut candidates: Vec<ScoredArticle>, index: &Index, impacts: &JournalImpact, p: &RankingParams) -> Vec<ScoredArticle> {
    for c in &mut candidates {
        let (h, y) = match index.get(&c.pmid) {
            Some(a) => (impacts.impact_of(&a.journal), a.year),
            None => (0, 0),
        };
        score_candidate(c, h, y, p);
    }
    candidates.sort_by(rank_order);
    assign_ranks(&mut candidates);
    candidates
}

/// Order by `s` only (descending, pmid ascending on ties); r1/r2 are still
/// filled for display.
pub fn rank_by_score(mut candidates: Vec<ScoredArticle>, index: &Index, impacts: &JournalImpact, p: &RankingParams) -> Vec<ScoredArticle> {
    candidates = rank(candidates, index, impacts, p);
    candidates.sort_by(|a, b| b.base_score.total_cmp(&a.base_score).then_with(|| a.pmid.cmp(&b.pmid)));
    assign_ranks(&mut candidates);
    candidates
}

fn assign_ranks(candidates: &mut [ScoredArticle]) {
    for (i, c) in candidates.iter_mut().enumerate() {
        c.rank = Some(i as u32 + 1);
    }
}
