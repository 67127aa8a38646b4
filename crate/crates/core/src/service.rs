//! HTTP/JSON interface over a loaded [`Engine`].
//!
//! Endpoints: `POST /search`, `POST /expand`, `GET /article/{pmid}`,
//! `GET /health`, `GET /config`. The engine is read-only; until it has been
//! installed in the [`AppState`] every engine-backed endpoint answers 503.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Article, Field};
use crate::labeler::Label;
use crate::pipeline::{Engine, SearchSettings};
use crate::profile::{parse_demographic, ExpandedProfile, FieldError, Gender, GeneSpec, PatientProfile};
use crate::query::matched_terms;
use crate::ranker::{FormulaVariant, RankingParams};

pub const MAX_PAGE_SIZE: usize = 200;
pub const DEFAULT_PAGE_SIZE: usize = 10;

#[derive(Clone, Default)]
pub struct AppState {
    engine: Arc<OnceLock<Engine>>,
}

impl AppState {
    pub fn ready(engine: Engine) -> AppState {
        let state = AppState::default();
        state.install(engine);
        state
    }

    /// Install the engine once loading has finished. Later calls are ignored.
    pub fn install(&self, engine: Engine) {
        let _ = self.engine.set(engine);
    }

    fn engine(&self) -> Result<&Engine, ApiError> {
        self.engine.get().ok_or_else(|| ApiError {
            status: StatusCode::SERVICE_UNAVAILABLE,
            error: "engine not ready".into(),
            fields: Vec::new(),
        })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/config", get(config))
        .route("/search", post(search))
        .route("/expand", post(expand))
        .route("/article/{pmid}", get(article))
        .with_state(state)
}

/// Error body: `{"error": ..., "fields": [{"field", "message"}]}`.
#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

impl ApiError {
    fn bad_request(error: impl Into<String>, fields: Vec<FieldError>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            error: error.into(),
            fields,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

/// Gene as sent by clients: `{"name", "variant"?}` or `"KRAS (G12C)"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GenePayload {
    Spec { name: String, variant: Option<String> },
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct ProfilePayload {
    #[serde(default)]
    pub disease: String,
    #[serde(default)]
    pub genes: Vec<GenePayload>,
    pub age: Option<u32>,
    pub gender: Option<Gender>,
    /// Alternative to `age`/`gender`, e.g. `"61-year-old female"`.
    pub demographic: Option<String>,
    #[serde(default)]
    pub other: Vec<String>,
}

impl ProfilePayload {
    pub fn into_profile(self) -> Result<PatientProfile, Vec<FieldError>> {
        let mut errors = Vec::new();
        let mut genes = Vec::new();
        for (i, g) in self.genes.into_iter().enumerate() {
            match g {
                GenePayload::Spec { name, variant } => genes.push(GeneSpec { name, variant }),
                GenePayload::Text(t) => match GeneSpec::parse(&t) {
                    Some(spec) => genes.push(spec),
                    None => errors.push(FieldError {
                        field: format!("genes[{i}]"),
                        message: format!("cannot parse gene entry `{t}`"),
                    }),
                },
            }
        }
        let (mut age, mut gender) = (self.age, self.gender);
        if let Some(text) = self.demographic.as_deref().filter(|t| !t.trim().is_empty()) {
            if let Some((a, g)) = parse_demographic(text) {
                age = age.or(Some(a));
                gender = gender.or(Some(g));
            }
        }
        let profile = PatientProfile {
            disease: self.disease,
            genes,
            age,
            gender,
            other: self.other,
        };
        if let Err(mut e) = profile.validate() {
            errors.append(&mut e);
        }
        if errors.is_empty() {
            Ok(profile)
        } else {
            Err(errors)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize)]
pub struct RankingOverrides {
    pub k: Option<f64>,
    pub w_s: Option<f64>,
    pub w_h: Option<f64>,
    pub w_y: Option<f64>,
    pub h_axis: Option<f64>,
    pub y_axis: Option<f64>,
    pub c_h: Option<f64>,
    pub c_y: Option<f64>,
    pub formula: Option<FormulaVariant>,
}

impl RankingOverrides {
    pub fn apply(&self, base: RankingParams) -> RankingParams {
        RankingParams {
            k: self.k.unwrap_or(base.k),
            w_s: self.w_s.unwrap_or(base.w_s),
            w_h: self.w_h.unwrap_or(base.w_h),
            w_y: self.w_y.unwrap_or(base.w_y),
            h_axis: self.h_axis.unwrap_or(base.h_axis),
            y_axis: self.y_axis.unwrap_or(base.y_axis),
            c_h: self.c_h.unwrap_or(base.c_h),
            c_y: self.c_y.unwrap_or(base.c_y),
            formula: self.formula.unwrap_or(base.formula),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SearchRequest {
    pub profile: ProfilePayload,
    #[serde(default)]
    pub ranking: Option<RankingOverrides>,
    pub page_size: Option<usize>,
    #[serde(default)]
    pub offset: usize,
    /// Expanded terms the clinician deselected.
    #[serde(default)]
    pub exclude_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchItem {
    pub rank: u32,
    pub pmid: String,
    pub title: String,
    pub journal: String,
    pub year: i32,
    pub s: f64,
    pub r1: i64,
    pub r2: f64,
    pub label: Option<Label>,
    pub sigma_h: f64,
    pub sigma_y: f64,
    pub highlights: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub items: Vec<SearchItem>,
    pub total: usize,
    pub offset: usize,
    pub page_size: usize,
    pub expansion: ExpandedProfile,
    pub timing_ms: f64,
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}"), Vec::new()))
}

fn profile_from(payload: ProfilePayload) -> Result<PatientProfile, ApiError> {
    payload
        .into_profile()
        .map_err(|fields| ApiError::bad_request("invalid profile", fields))
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "ready": state.engine.get().is_some() }))
}

async fn config(State(state): State<AppState>) -> Result<Json<SearchSettings>, ApiError> {
    Ok(Json(state.engine()?.settings.clone()))
}

/// Run one search and page through the ranked list; this is the handler
/// body of `POST /search`, usable without HTTP.
pub fn run_search(engine: &Engine, req: SearchRequest) -> Result<SearchResponse, ApiError> {
    let started = Instant::now();
    let page_size = req.page_size.unwrap_or(DEFAULT_PAGE_SIZE);
    if !(1..=MAX_PAGE_SIZE).contains(&page_size) {
        return Err(ApiError::bad_request(
            "invalid paging",
            vec![FieldError {
                field: "page_size".into(),
                message: format!("must be within [1, {MAX_PAGE_SIZE}]"),
            }],
        ));
    }
    let profile = profile_from(req.profile)?;
    let mut settings = engine.settings.clone();
    if let Some(o) = &req.ranking {
        settings.ranking = o.apply(settings.ranking);
    }
    settings.ranking.validate().map_err(|e| {
        ApiError::bad_request("invalid ranking parameters", vec![FieldError { field: "ranking".into(), message: e }])
    })?;
    let exclude: BTreeSet<String> = req.exclude_terms.into_iter().collect();
    let outcome = engine.search(&profile, &settings, &exclude).map_err(|e| ApiError {
        status: StatusCode::SERVICE_UNAVAILABLE,
        error: e.to_string(),
        fields: Vec::new(),
    })?;
    let total = outcome.results.len();
    let items = outcome
        .results
        .iter()
        .skip(req.offset)
        .take(page_size)
        .map(|c| {
            let a = engine.index.article(c.doc);
            SearchItem {
                rank: c.rank.unwrap_or(0),
                pmid: c.pmid.clone(),
                title: a.title.clone(),
                journal: a.journal.clone(),
                year: a.year,
                s: c.base_score,
                r1: c.r1.unwrap_or(0),
                r2: c.r2.unwrap_or(0.0),
                label: c.label,
                sigma_h: c.sigma_h.unwrap_or(0.0),
                sigma_y: c.sigma_y.unwrap_or(0.0),
                highlights: matched_terms(&outcome.query, &engine.index, c.doc),
            }
        })
        .collect();
    Ok(SearchResponse {
        items,
        total,
        offset: req.offset,
        page_size,
        expansion: outcome.expanded,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

async fn search(State(state): State<AppState>, body: Bytes) -> Result<Json<SearchResponse>, ApiError> {
    let engine = state.engine()?;
    let req: SearchRequest = parse_body(&body)?;
    Ok(Json(run_search(engine, req)?))
}

async fn expand(State(state): State<AppState>, body: Bytes) -> Result<Json<ExpandedProfile>, ApiError> {
    let engine = state.engine()?;
    let payload: ProfilePayload = parse_body(&body)?;
    let profile = profile_from(payload)?;
    Ok(Json(engine.expand(&profile, &engine.settings)))
}

#[derive(Debug, Deserialize)]
struct ArticleParams {
    /// Comma-separated terms to locate in the article.
    highlight: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ArticleResponse {
    pub article: Article,
    pub highlights: Vec<String>,
}

async fn article(
    State(state): State<AppState>,
    Path(pmid): Path<String>,
    Query(params): Query<ArticleParams>,
) -> Result<Json<ArticleResponse>, ApiError> {
    let engine = state.engine()?;
    let a = engine.index.get(&pmid).ok_or_else(|| ApiError {
        status: StatusCode::NOT_FOUND,
        error: format!("unknown pmid `{pmid}`"),
        fields: Vec::new(),
    })?;
    let fields: Vec<Vec<String>> = Field::ALL.iter().map(|&f| a.field_tokens(f)).collect();
    let highlights = params
        .highlight
        .as_deref()
        .unwrap_or("")
        .split(',')
        .filter(|t| {
            let toks = tokenize(t);
            !toks.is_empty() && fields.iter().any(|f| f.windows(toks.len()).any(|w| w == toks.as_slice()))
        })
        .map(|t| t.trim().to_string())
        .collect();
    Ok(Json(ArticleResponse {
        article: a.clone(),
        highlights,
    }))
}

/// Serve until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
