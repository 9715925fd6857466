//! HTTP API over a loaded index: doodle recognition, search and screen
//! metadata.
//!
//! The server keeps no session state. A client resubmits its whole query
//! (every confirmed icon and text chip) on each change, so any request can be
//! answered by any replica from the same immutable indexes.
//!
//! Each endpoint is backed by a plain function taking `&AppState`, which is
//! what the tests and the CLI call directly; the axum handlers only move
//! JSON in and out and push CPU-bound work onto the blocking pool.

use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

use screenseek_core::corpus::{extract_contents, ContentKind};
use screenseek_core::ranker::Contribution;
use screenseek_core::textindex::POSITIONAL_KEYWORDS;
use screenseek_core::{
    Classifier, Corpus, DoodleClass, DoodlePlacement, Error, NormRect, PixelRect, Prediction,
    Quadrant, SearchEngine, Sketch, DEFAULT_LIMIT,
};

/// Shared, read-only state behind every request.
pub struct AppState {
    engine: SearchEngine,
    corpus: Corpus,
    classifier: Option<Arc<dyn Classifier>>,
    default_limit: usize,
}

impl AppState {
    /// Fails when `corpus` is not the corpus the index was built from.
    pub fn new(engine: SearchEngine, corpus: Corpus) -> screenseek_core::Result<Self> {
        let ids = engine.bundle().screens().ids();
        if ids.len() != corpus.len() || corpus.screens().iter().zip(ids).any(|(s, id)| s.id != *id)
        {
            return Err(Error::IndexMismatch);
        }
        Ok(AppState {
            engine,
            corpus,
            classifier: None,
            default_limit: DEFAULT_LIMIT,
        })
    }

    pub fn with_classifier(mut self, classifier: Arc<dyn Classifier>) -> Self {
        self.classifier = Some(classifier);
        self
    }

    pub fn with_default_limit(mut self, limit: usize) -> screenseek_core::Result<Self> {
        if limit == 0 {
            return Err(Error::InvalidArgument(
                "default limit must be at least 1".into(),
            ));
        }
        self.default_limit = limit;
        Ok(self)
    }

    pub fn engine(&self) -> &SearchEngine {
        &self.engine
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn default_limit(&self) -> usize {
        self.default_limit
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownScreen(_) => StatusCode::NOT_FOUND,
            Error::Io { .. } | Error::IndexMismatch | Error::Format { .. } => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(r.status(), r.body_text())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(ErrorBody {
                error: &self.message,
            }),
        )
            .into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Accepts the bare sketch interchange form (`[[[x, y], ...], ...]`) or the
/// same list under a `strokes` key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RecognizeBody")]
pub struct RecognizeRequest {
    pub strokes: Sketch,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RecognizeBody {
    Wrapped { strokes: Sketch },
    Bare(Sketch),
}

impl From<RecognizeBody> for RecognizeRequest {
    fn from(b: RecognizeBody) -> Self {
        match b {
            RecognizeBody::Wrapped { strokes } | RecognizeBody::Bare(strokes) => {
                RecognizeRequest { strokes }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizeResponse {
    pub predictions: Vec<Prediction>,
    pub timing_ms: f64,
}

pub fn recognize(state: &AppState, req: &RecognizeRequest) -> ApiResult<RecognizeResponse> {
    let classifier = state.classifier.as_deref().ok_or_else(|| {
        ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "no recognizer model loaded",
        )
    })?;
    let start = Instant::now();
    req.strokes.check_canvas()?;
    let predictions = screenseek_core::classify(&req.strokes, classifier)?;
    Ok(RecognizeResponse {
        predictions,
        timing_ms: ms_since(start),
    })
}

/// Icon as sent by clients; the class stays a string so an unknown name can
/// be reported together with the supported list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IconSpec {
    pub class: String,
    /// `[left, top, right, bottom]` in normalized screen coordinates.
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchRequest {
    #[serde(default)]
    pub icons: Vec<IconSpec>,
    #[serde(default)]
    pub texts: Vec<String>,
    #[serde(default)]
    pub limit: Option<usize>,
    /// Attach per-component contributions to each result.
    #[serde(default)]
    pub explain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub screen_id: String,
    pub score: f64,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contributions: Option<Vec<Contribution>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTiming {
    pub parse_ms: f64,
    pub rank_ms: f64,
    pub explain_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<SearchHit>,
    pub timing: SearchTiming,
}

pub fn search(state: &AppState, req: &SearchRequest) -> ApiResult<SearchResponse> {
    let start = Instant::now();
    let limit = req.limit.unwrap_or(state.default_limit);
    if limit == 0 {
        return Err(ApiError::bad_request("limit must be at least 1"));
    }
    let icons = req
        .icons
        .iter()
        .map(|i| {
            let class: DoodleClass = i.class.parse()?;
            let [l, t, r, b] = i.bbox;
            DoodlePlacement::new(class, NormRect::new(l, t, r, b))
        })
        .collect::<screenseek_core::Result<Vec<_>>>()?;
    let query = state.engine.query(&icons, &req.texts)?;
    if query.is_empty() {
        return Err(Error::EmptyQuery.into());
    }
    let parse_ms = ms_since(start);

    let t = Instant::now();
    let ranked = state.engine.rank(&query, limit)?;
    let rank_ms = ms_since(t);

    let t = Instant::now();
    let mut results = Vec::with_capacity(ranked.len());
    for e in ranked.entries {
        let contributions = if req.explain {
            Some(state.engine.explain(&query, &e.screen_id)?.contributions)
        } else {
            None
        };
        results.push(SearchHit {
            screen_id: e.screen_id,
            score: e.score,
            rank: e.rank,
            contributions,
        });
    }
    let explain_ms = ms_since(t);

    Ok(SearchResponse {
        results,
        timing: SearchTiming {
            parse_ms,
            rank_ms,
            explain_ms,
            total_ms: ms_since(start),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextItem {
    pub text: String,
    pub kind: ContentKind,
    pub quadrant: Quadrant,
    pub bounds: PixelRect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IconItem {
    pub class: DoodleClass,
    pub bbox: NormRect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenMeta {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub texts: Vec<TextItem>,
    /// Elements indexed as doodle classes.
    pub icons: Vec<IconItem>,
    pub thumbnail: Option<String>,
}

pub fn screen_meta(state: &AppState, id: &str) -> ApiResult<ScreenMeta> {
    let screen = state
        .corpus
        .get(id)
        .ok_or_else(|| Error::UnknownScreen(id.to_string()))?;
    let texts = extract_contents(screen)
        .into_iter()
        .map(|c| TextItem {
            text: c.raw_text,
            kind: c.kind,
            quadrant: c.quadrant,
            bounds: c.bbox,
        })
        .collect();
    let sketch = state.engine.bundle().sketch();
    let icons = DoodleClass::ALL
        .into_iter()
        .flat_map(|class| {
            sketch.instances(class, id).iter().map(move |r| IconItem {
                class,
                bbox: r.bbox,
            })
        })
        .collect();
    Ok(ScreenMeta {
        id: screen.id.clone(),
        width: screen.width,
        height: screen.height,
        texts,
        icons,
        thumbnail: state.corpus.thumbnail(id).map(|p| p.display().to_string()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassesResponse {
    pub classes: Vec<String>,
    pub positional_prefixes: Vec<String>,
}

pub fn classes() -> ClassesResponse {
    ClassesResponse {
        classes: DoodleClass::ALL
            .iter()
            .map(|c| c.name().to_string())
            .collect(),
        positional_prefixes: POSITIONAL_KEYWORDS
            .iter()
            .map(|k| format!("{k}:"))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub screens: usize,
    pub recognizer: bool,
    pub default_limit: usize,
}

pub fn health(state: &AppState) -> Health {
    Health {
        status: "ok".into(),
        screens: state.corpus.len(),
        recognizer: state.classifier.is_some(),
        default_limit: state.default_limit,
    }
}

type Shared = Arc<AppState>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("worker failed: {e}"),
        )
    })?
}

async fn recognize_handler(
    State(state): State<Shared>,
    body: Result<Json<RecognizeRequest>, JsonRejection>,
) -> ApiResult<Json<RecognizeResponse>> {
    let Json(req) = body?;
    blocking(move || recognize(&state, &req)).await.map(Json)
}

async fn search_handler(
    State(state): State<Shared>,
    body: Result<Json<SearchRequest>, JsonRejection>,
) -> ApiResult<Json<SearchResponse>> {
    let Json(req) = body?;
    blocking(move || search(&state, &req)).await.map(Json)
}

async fn screen_handler(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> ApiResult<Json<ScreenMeta>> {
    screen_meta(&state, &id).map(Json)
}

async fn classes_handler() -> Json<ClassesResponse> {
    Json(classes())
}

async fn health_handler(State(state): State<Shared>) -> Json<Health> {
    Json(health(&state))
}

/// CORS for `origin`, or for any origin when `None`.
pub fn cors_layer(origin: Option<&str>) -> screenseek_core::Result<CorsLayer> {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    Ok(match origin {
        None => layer.allow_origin(Any),
        Some(o) => {
            let value = HeaderValue::from_str(o)
                .map_err(|e| Error::InvalidArgument(format!("bad CORS origin {o:?}: {e}")))?;
            layer.allow_origin(value)
        }
    })
}

pub fn router(state: Arc<AppState>, cors: CorsLayer) -> Router {
    Router::new()
        .route("/api/recognize", post(recognize_handler))
        .route("/api/search", post(search_handler))
        .route("/api/screens/{id}", get(screen_handler))
        .route("/api/classes", get(classes_handler))
        .route("/api/health", get(health_handler))
        .layer(cors)
        .with_state(state)
}

/// Serve until Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "listening");
    }
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await
}
