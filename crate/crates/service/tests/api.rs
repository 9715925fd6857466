use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use screenseek_core::synth::{
    generate_corpus, generate_doodle, generate_doodles, CorpusSpec, DoodleNoise,
};
use screenseek_core::{
    load_corpus, train_reference_classifier, ClassMap, Corpus, DoodleClass, IndexBundle,
    RankingConfig, SearchEngine, SynonymTable, TextPipeline, TileGrid,
};
use screenseek_service::{
    cors_layer, recognize, router, screen_meta, search, AppState, IconSpec, RecognizeRequest,
    SearchRequest,
};

fn build_state(corpus: Corpus) -> AppState {
    let bundle = IndexBundle::build(
        &corpus,
        TextPipeline::default(),
        &SynonymTable::default(),
        &ClassMap::default(),
        TileGrid::default(),
    )
    .unwrap();
    let engine = SearchEngine::new(bundle, RankingConfig::default()).unwrap();
    let doodles = generate_doodles(&DoodleClass::ALL, 8, 3, &DoodleNoise::default()).unwrap();
    let model = train_reference_classifier(&doodles, &DoodleClass::ALL).unwrap();
    AppState::new(engine, corpus)
        .unwrap()
        .with_classifier(Arc::new(model))
}

fn state() -> Arc<AppState> {
    static STATE: OnceLock<Arc<AppState>> = OnceLock::new();
    STATE
        .get_or_init(|| {
            let screens = generate_corpus(&CorpusSpec::new(300, 11), &ClassMap::default()).unwrap();
            Arc::new(build_state(Corpus::from_screens(screens).unwrap()))
        })
        .clone()
}

fn app() -> Router {
    router(state(), cors_layer(None).unwrap())
}

async fn call(app: Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

/// A query built from the contents of one indexed screen.
fn query_from(id: &str) -> SearchRequest {
    let meta = screen_meta(&state(), id).unwrap();
    let word = meta.texts[0]
        .text
        .split_whitespace()
        .next()
        .unwrap()
        .to_string();
    let icons = meta
        .icons
        .iter()
        .take(2)
        .map(|i| IconSpec {
            class: i.class.name().into(),
            bbox: i.bbox.into(),
        })
        .collect();
    SearchRequest {
        icons,
        texts: vec![word],
        limit: Some(50),
        explain: false,
    }
}

fn strip_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[tokio::test]
async fn search_matches_direct_ranking() {
    let st = state();
    for id in [
        "synth-000000",
        "synth-000042",
        "synth-000123",
        "synth-000299",
    ] {
        let req = query_from(id);
        let (status, body) = call(
            app(),
            "POST",
            "/api/search",
            Some(serde_json::to_value(&req).unwrap()),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{body}");

        let icons: Vec<_> = req
            .icons
            .iter()
            .map(|i| {
                let [l, t, r, b] = i.bbox;
                screenseek_core::DoodlePlacement::new(
                    i.class.parse().unwrap(),
                    screenseek_core::NormRect::new(l, t, r, b),
                )
                .unwrap()
            })
            .collect();
        let q = st.engine().query(&icons, &req.texts).unwrap();
        let direct = st.engine().rank(&q, 50).unwrap();

        let results = body["results"].as_array().unwrap();
        assert_eq!(results.len(), direct.len());
        for (got, want) in results.iter().zip(&direct.entries) {
            assert_eq!(got["screen_id"], want.screen_id);
            assert_eq!(got["rank"], want.rank);
            assert_eq!(got["score"].as_f64().unwrap(), want.score);
        }
        assert!(
            direct.position(id).is_some(),
            "{id} should match its own contents"
        );
    }
}

#[tokio::test]
async fn limit_caps_results() {
    let mut req = query_from("synth-000007");
    req.limit = Some(5);
    let (status, body) = call(
        app(),
        "POST",
        "/api/search",
        Some(serde_json::to_value(&req).unwrap()),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let results = body["results"].as_array().unwrap();
    assert!(results.len() <= 5);
    for (i, r) in results.iter().enumerate() {
        assert_eq!(r["rank"], i + 1);
    }
    for key in ["parse_ms", "rank_ms", "total_ms"] {
        assert!(body["timing"][key].as_f64().unwrap() >= 0.0);
    }
}

#[tokio::test]
async fn unknown_class_lists_supported() {
    let body = json!({"icons": [{"class": "wheel", "bbox": [0, 0, 0.2, 0.2]}], "texts": []});
    let (status, body) = call(app(), "POST", "/api/search", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let msg = body["error"].as_str().unwrap();
    assert!(msg.contains("wheel"), "{msg}");
    assert!(msg.contains("Camera") && msg.contains("Switch"), "{msg}");
}

#[tokio::test]
async fn empty_and_malformed_searches_are_rejected() {
    let (status, body) = call(app(), "POST", "/api/search", Some(json!({}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("empty query"));

    let (status, _) = call(
        app(),
        "POST",
        "/api/search",
        Some(json!({"texts": ["shop"], "limit": 0})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, body) = call(app(), "POST", "/api/search", Some(json!({"icons": "menu"}))).await;
    assert!(status.is_client_error());
    assert!(body["error"].is_string());

    let body = json!({"icons": [{"class": "Menu", "bbox": [0.2, 0.2, 0.2, 0.4]}]});
    let (status, _) = call(app(), "POST", "/api/search", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn explain_attaches_contributions() {
    let mut req = query_from("synth-000010");
    req.explain = true;
    req.limit = Some(3);
    let resp = search(&state(), &req).unwrap();
    for hit in &resp.results {
        let parts = hit.contributions.as_ref().unwrap();
        let total: f64 = parts.iter().map(|c| c.value).sum();
        assert!((total - hit.score).abs() < 1e-9);
    }
}

#[tokio::test]
async fn recognize_returns_top_three() {
    let mut rng =
        <rand_chacha::ChaCha8Rng as rand_chacha::rand_core::SeedableRng>::seed_from_u64(99);
    let doodle = generate_doodle(DoodleClass::Square, &DoodleNoise::default(), &mut rng);
    let payload = json!({ "strokes": doodle });
    let (status, body) = call(app(), "POST", "/api/recognize", Some(payload)).await;
    let (_, bare) = call(app(), "POST", "/api/recognize", Some(json!(doodle))).await;
    assert_eq!(bare["predictions"], body["predictions"]);
    assert_eq!(status, StatusCode::OK, "{body}");
    let preds = body["predictions"].as_array().unwrap();
    assert_eq!(preds.len(), 3);
    assert!(preds.iter().any(|p| p["class"] == "Square"), "{body}");

    let direct = recognize(&state(), &RecognizeRequest { strokes: doodle }).unwrap();
    let got: Vec<&str> = preds.iter().map(|p| p["class"].as_str().unwrap()).collect();
    let want: Vec<&str> = direct.predictions.iter().map(|p| p.class.name()).collect();
    assert_eq!(got, want);
}

#[tokio::test]
async fn recognize_rejects_empty_sketches() {
    let (status, body) = call(
        app(),
        "POST",
        "/api/recognize",
        Some(json!({"strokes": []})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("empty sketch"));

    let (status, _) = call(
        app(),
        "POST",
        "/api/recognize",
        Some(json!({"strokes": [[]]})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call(
        app(),
        "POST",
        "/api/recognize",
        Some(json!({"strokes": "x"})),
    )
    .await;
    assert!(status.is_client_error());

    let outside = json!([[[0.1, 0.1], [1.4, 0.2]]]);
    let (status, _) = call(app(), "POST", "/api/recognize", Some(outside)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn recognize_without_model_is_unavailable() {
    let screens = generate_corpus(&CorpusSpec::new(5, 1), &ClassMap::default()).unwrap();
    let corpus = Corpus::from_screens(screens).unwrap();
    let bundle = IndexBundle::build(
        &corpus,
        TextPipeline::default(),
        &SynonymTable::default(),
        &ClassMap::default(),
        TileGrid::default(),
    )
    .unwrap();
    let engine = SearchEngine::new(bundle, RankingConfig::default()).unwrap();
    let st = Arc::new(AppState::new(engine, corpus).unwrap());
    let app = router(st, cors_layer(None).unwrap());
    let body = json!({"strokes": [[[0.1, 0.1], [0.9, 0.9]]]});
    let (status, _) = call(app.clone(), "POST", "/api/recognize", Some(body)).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (_, health) = call(app, "GET", "/api/health", None).await;
    assert_eq!(health["recognizer"], false);
    assert_eq!(health["screens"], 5);
}

#[tokio::test]
async fn screen_metadata_lookup() {
    let (status, body) = call(app(), "GET", "/api/screens/synth-000003", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["id"], "synth-000003");
    assert_eq!(body["width"], 1440);
    assert_eq!(body["height"], 2560);
    assert!(!body["texts"].as_array().unwrap().is_empty());
    assert_eq!(body["thumbnail"], Value::Null);

    let (status, body) = call(app(), "GET", "/api/screens/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].as_str().unwrap().contains("nope"));
}

#[tokio::test]
async fn thumbnail_path_is_reported_when_present() {
    let dir = tempfile::tempdir().unwrap();
    let screens = generate_corpus(&CorpusSpec::new(3, 5), &ClassMap::default()).unwrap();
    screenseek_core::synth::write_corpus(dir.path(), &screens).unwrap();
    std::fs::write(dir.path().join("synth-000001.png"), b"\x89PNG").unwrap();
    let st = Arc::new(build_state(load_corpus(dir.path()).unwrap()));

    let with = screen_meta(&st, "synth-000001").unwrap();
    assert!(with.thumbnail.unwrap().ends_with("synth-000001.png"));
    assert_eq!(screen_meta(&st, "synth-000002").unwrap().thumbnail, None);
}

#[tokio::test]
async fn classes_and_health() {
    let (status, body) = call(app(), "GET", "/api/classes", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["classes"].as_array().unwrap().len(), 23);
    assert_eq!(body["positional_prefixes"].as_array().unwrap().len(), 12);

    let (status, body) = call(app(), "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["screens"], 300);
    assert_eq!(body["recognizer"], true);
}

#[tokio::test]
async fn cors_headers_for_configured_origin() {
    let app = router(state(), cors_layer(Some("http://ui.example")).unwrap());
    let req = Request::builder()
        .uri("/api/health")
        .header("origin", "http://ui.example")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(
        resp.headers().get("access-control-allow-origin").unwrap(),
        "http://ui.example"
    );
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn interleaved_requests_match_isolated_ones() {
    let ids: Vec<String> = (0..24).map(|i| format!("synth-{:06}", i * 11)).collect();
    let mut isolated = Vec::new();
    for id in &ids {
        let req = serde_json::to_value(query_from(id)).unwrap();
        isolated.push(strip_timing(
            call(app(), "POST", "/api/search", Some(req)).await.1,
        ));
    }

    let app = app();
    let mut tasks = Vec::new();
    // Reverse order and fire everything at once.
    for (i, id) in ids.iter().enumerate().rev() {
        let req = serde_json::to_value(query_from(id)).unwrap();
        let app = app.clone();
        tasks.push((
            i,
            tokio::spawn(async move { call(app, "POST", "/api/search", Some(req)).await }),
        ));
    }
    for (i, task) in tasks {
        let (status, body) = task.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        assert_eq!(strip_timing(body), isolated[i], "request {i}");
    }
}

#[test]
fn mismatched_corpus_is_refused() {
    let a = generate_corpus(&CorpusSpec::new(4, 1), &ClassMap::default()).unwrap();
    let corpus = Corpus::from_screens(a.clone()).unwrap();
    let bundle = IndexBundle::build(
        &corpus,
        TextPipeline::default(),
        &SynonymTable::default(),
        &ClassMap::default(),
        TileGrid::default(),
    )
    .unwrap();
    let engine = SearchEngine::new(bundle, RankingConfig::default()).unwrap();
    let other = Corpus::from_screens(a[..3].to_vec()).unwrap();
    assert!(AppState::new(engine, other).is_err());
}
