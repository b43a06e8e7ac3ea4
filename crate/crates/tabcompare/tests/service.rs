mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use common::{get, golden, json, post_json, send, three_versions, upload};
use serde_json::json;
use tabcompare::server::{router, MAX_UPLOAD_BYTES};
use tabcompare::store::Store;

fn app() -> axum::Router {
    router(Arc::new(Store::in_memory()), None)
}

async fn upload_all(app: &axum::Router) -> Vec<String> {
    let mut ids = Vec::new();
    for path in three_versions() {
        let (status, body) = send(app, upload(&path)).await;
        assert_eq!(status, StatusCode::OK);
        ids.push(json(&body)["id"].as_str().unwrap().to_owned());
    }
    ids
}

fn run_options(ids: &[String]) -> serde_json::Value {
    json!({
        "versions": ids.iter().map(|id| json!({"source": id, "track": 0})).collect::<Vec<_>>(),
        "reference": 0
    })
}

#[tokio::test]
async fn upload_reports_tracks() {
    let app = app();
    let (status, body) = send(
        &app,
        upload(&common::fixture("corpus/09_two_tracks.tabtxt")),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["id"].as_str().unwrap().len(), 64);
    assert_eq!(
        v["tracks"],
        json!([
            {"index": 0, "name": "Guitar 1", "strings": 6, "bars": 2},
            {"index": 1, "name": "Guitar 2", "strings": 6, "bars": 2}
        ])
    );
}

#[tokio::test]
async fn stored_score_is_canonical() {
    let app = app();
    let path = common::fixture("corpus/08_ties_across_bars.tabtxt");
    let (_, body) = send(&app, upload(&path)).await;
    let id = json(&body)["id"].as_str().unwrap().to_owned();
    let (status, body) = send(&app, get(&format!("/api/scores/{id}"))).await;
    assert_eq!(status, StatusCode::OK);
    let expected = tabcompare_core::parse_tabtext(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(
        body,
        tabcompare_core::write_canonical(&expected).into_bytes()
    );
}

#[tokio::test]
async fn comparison_round_trip_and_listing() {
    let app = app();
    let ids = upload_all(&app).await;
    let (status, body) = send(&app, post_json("/api/comparisons", &run_options(&ids))).await;
    assert_eq!(
        status,
        StatusCode::CREATED,
        "{}",
        String::from_utf8_lossy(&body)
    );
    let id = json(&body)["id"].as_str().unwrap().to_owned();
    assert_eq!(id, tabcompare::content_id(&golden()));

    let (status, doc) = send(&app, get(&format!("/api/comparisons/{id}"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc, golden());

    let (_, list) = send(&app, get("/api/comparisons")).await;
    let list = json(&list);
    assert_eq!(list.as_array().unwrap().len(), 1);
    assert_eq!(list[0]["id"], id.as_str());
    assert_eq!(
        list[0]["versionNames"],
        json!(["v0.tabtxt", "v1.tabtxt", "v2.tabtxt"])
    );
    assert!(list[0]["createdAt"].as_str().unwrap().ends_with('Z'));
}

#[tokio::test]
async fn client_errors() {
    let app = app();
    let ids = upload_all(&app).await;

    let bad = Request::post("/api/scores")
        .body(Body::from("\\track \"G\"\n1.9.4 |"))
        .unwrap();
    let (status, body) = send(&app, bad).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(json(&body)["error"]
        .as_str()
        .unwrap()
        .contains("line 2, column 3"));

    let cases = [
        json!({"versions": [{"source": ids[0], "track": 0}]}),
        json!({"versions": [{"source": ids[0], "track": 0}, {"source": "f".repeat(64), "track": 0}]}),
        json!({"versions": [{"source": ids[0], "track": 0}, {"source": ids[1], "track": 4}]}),
        json!({"versions": [{"source": ids[0], "track": 0}, {"source": ids[1], "track": 0}], "gapCost": -1}),
        json!({"versions": [], "surprise": true}),
    ];
    for case in cases {
        let (status, body) = send(&app, post_json("/api/comparisons", &case)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{case}");
        assert!(json(&body)["error"].is_string());
    }
    let raw = Request::post("/api/comparisons")
        .body(Body::from("{not json"))
        .unwrap();
    assert_eq!(send(&app, raw).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_ids_and_paths_are_404() {
    let app = app();
    for uri in ["/api/scores/abc", "/api/comparisons/abc", "/api/nothing"] {
        let (status, body) = send(&app, get(uri)).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert!(json(&body)["error"].is_string());
    }
}

#[tokio::test]
async fn oversized_upload_is_413() {
    let app = app();
    let big = vec![b' '; MAX_UPLOAD_BYTES + 1];
    let (status, body) = send(
        &app,
        Request::post("/api/scores").body(Body::from(big)).unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert!(json(&body)["error"].is_string());
}

#[tokio::test]
async fn placeholder_and_ui_dir() {
    let (status, body) = send(&app(), get("/")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body)
        .unwrap()
        .contains("/api/comparisons"));

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>ui build</p>").unwrap();
    let app = router(Arc::new(Store::in_memory()), Some(dir.path().to_owned()));
    let (status, body) = send(&app, get("/")).await;
    assert_eq!(
        (status, body.as_slice()),
        (StatusCode::OK, &b"<p>ui build</p>"[..])
    );
    assert_eq!(send(&app, get("/api/comparisons")).await.0, StatusCode::OK);
}

#[tokio::test]
async fn data_dir_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let app = router(Arc::new(Store::open(dir.path()).unwrap()), None);
        let ids = upload_all(&app).await;
        let (_, body) = send(&app, post_json("/api/comparisons", &run_options(&ids))).await;
        json(&body)["id"].as_str().unwrap().to_owned()
    };
    let app = router(Arc::new(Store::open(dir.path()).unwrap()), None);
    let (status, doc) = send(&app, get(&format!("/api/comparisons/{id}"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc, golden());
    let (_, list) = send(&app, get("/api/comparisons")).await;
    assert_eq!(json(&list).as_array().unwrap().len(), 1);
}
