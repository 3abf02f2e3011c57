use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use uranus_console::{router, Store, UiAssets, PAGE_ROWS};
use uranus_core::pipeline::TrackEstimate;
use uranus_core::synth::{generate_truth, PatternId};
use uranus_core::{DroneLogRecord, SensorName};

fn estimate(r: &DroneLogRecord) -> TrackEstimate {
    let mut fractions = [0.05; 4];
    fractions[r.drone_type.index()] = 0.85;
    TrackEstimate {
        t: r.t,
        sensors: vec![SensorName::Arcus, SensorName::Diana],
        latitude: r.position.lat_deg,
        longitude: r.position.lon_deg,
        speed: r.speed_mps,
        altitude: r.position.alt_m.unwrap_or(0.0),
        drone_type: r.drone_type,
        confidence: 0.85,
        fractions,
    }
}

fn pattern_rows(p: PatternId) -> Vec<TrackEstimate> {
    generate_truth(&p.pattern(), 1000, 42)
        .unwrap()
        .iter()
        .flat_map(|d| d.records.iter().map(estimate))
        .collect()
}

/// Seven scenarios, as in a full synthetic test split plus extras.
fn fixture() -> Store {
    let ids = [
        PatternId::S1_1,
        PatternId::S1_2,
        PatternId::S1_3,
        PatternId::S1_4,
        PatternId::S2_1,
        PatternId::S2_2,
        PatternId::S3,
    ];
    let map: BTreeMap<String, Vec<TrackEstimate>> =
        ids.iter().map(|p| (p.scenario_dir(), pattern_rows(*p))).collect();
    Store::new(map, None)
}

async fn get(store: impl Into<Arc<Store>>, uri: &str) -> (StatusCode, Value) {
    let (status, bytes) = get_raw(store, uri).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn get_raw(store: impl Into<Arc<Store>>, uri: &str) -> (StatusCode, Vec<u8>) {
    let resp = router(store, UiAssets::default())
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn enc(id: &str) -> String {
    id.replace(' ', "%20")
}

#[tokio::test]
async fn lists_seven_scenarios_in_id_order() {
    let store = fixture();
    let (status, body) = get(store.clone(), "/scenarios").await;
    assert_eq!(status, StatusCode::OK);
    let list = body.as_array().unwrap();
    assert_eq!(list.len(), 7);
    let ids: Vec<&str> = list.iter().map(|s| s["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    let rows = pattern_rows(PatternId::S1_1);
    let s11 = &list[0];
    assert_eq!(s11["rows"], rows.len());
    assert_eq!(s11["from"], rows.iter().map(|r| r.t.0).min().unwrap());
    assert_eq!(s11["to"], rows.iter().map(|r| r.t.0).max().unwrap());
}

#[tokio::test]
async fn empty_store_lists_nothing() {
    let (status, body) = get(Store::default(), "/scenarios").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, serde_json::json!([]));
}

#[tokio::test]
async fn full_window_returns_every_row_and_one_polyline() {
    let id = enc("Scenario 1.1");
    let (status, body) = get(fixture(), &format!("/scenarios/{id}/detections")).await;
    assert_eq!(status, StatusCode::OK);
    let n = pattern_rows(PatternId::S1_1).len();
    assert_eq!(body["rows"].as_array().unwrap().len(), n);
    assert_eq!(body["total"], n);
    assert_eq!(body["next_cursor"], Value::Null);
    assert_eq!(body["summary"]["modal_type"], "DJI Mavic Pro");
    let (_, track) = get(fixture(), &format!("/scenarios/{id}/track")).await;
    let lines = track["polylines"].as_array().unwrap();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].as_array().unwrap().len(), n);
}

#[tokio::test]
async fn half_window_matches_an_offline_filter() {
    let rows = pattern_rows(PatternId::S1_1);
    let (lo, hi) = (rows[0].t.0, rows[rows.len() - 1].t.0);
    let mid = lo + (hi - lo) / 2;
    let expected = rows.iter().filter(|r| r.t.0 >= lo && r.t.0 <= mid).count();
    let uri = format!("/scenarios/{}/detections?from={lo}&to={mid}", enc("Scenario 1.1"));
    let (_, body) = get(fixture(), &uri).await;
    let got = body["rows"].as_array().unwrap();
    assert_eq!(got.len(), expected);
    assert!(got.iter().all(|r| (lo..=mid).contains(&r["t"].as_u64().unwrap())));
}

#[tokio::test]
async fn two_drone_scenario_gives_two_polylines() {
    let (_, body) = get(fixture(), &format!("/scenarios/{}/track", enc("Scenario 2.1"))).await;
    let lines = body["polylines"].as_array().unwrap();
    assert_eq!(lines.len(), 2);
    for l in lines {
        let ts: Vec<u64> = l.as_array().unwrap().iter().map(|p| p["t"].as_u64().unwrap()).collect();
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }
}

#[tokio::test]
async fn window_outside_data_is_empty() {
    let id = enc("Scenario 1.3");
    let (status, body) = get(fixture(), &format!("/scenarios/{id}/detections?from=1&to=2")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["rows"], serde_json::json!([]));
    assert_eq!(body["summary"], Value::Null);
    let (_, track) = get(fixture(), &format!("/scenarios/{id}/track?from=1&to=2")).await;
    assert_eq!(track["polylines"], serde_json::json!([]));
}

#[tokio::test]
async fn errors_carry_code_and_message() {
    let (status, body) = get(fixture(), "/scenarios/nope/detections").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "not_found");
    assert!(body["error"].as_str().unwrap().contains("nope"));

    let id = enc("Scenario 1.1");
    let (status, body) = get(fixture(), &format!("/scenarios/{id}/detections?from=5&to=4")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "bad_request");

    let (status, body) = get(fixture(), &format!("/scenarios/{id}/track?from=abc")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "bad_request");

    let (status, body) = get(fixture(), &format!("/scenarios/{id}/detections?cursor=-1")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "bad_request");

    let (status, body) = get(fixture(), "/model/info").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "not_found");

    let (status, body) = get(fixture(), "/no/such/path").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "not_found");
}

#[tokio::test]
async fn long_windows_paginate() {
    let rec = |i: u64| TrackEstimate {
        t: uranus_core::Timestamp(i),
        ..estimate(&generate_truth(&PatternId::S3.pattern(), 1000, 1).unwrap()[0].records[0])
    };
    let n = PAGE_ROWS as u64 + 250;
    let store = Arc::new(Store::new(
        BTreeMap::from([("big".to_string(), (0..n).map(rec).collect())]),
        None,
    ));
    let (_, first) = get(store.clone(), "/scenarios/big/detections").await;
    assert_eq!(first["rows"].as_array().unwrap().len(), PAGE_ROWS);
    assert_eq!(first["total"], n);
    let cursor = first["next_cursor"].as_str().unwrap().to_string();
    let (_, second) = get(store.clone(), &format!("/scenarios/big/detections?cursor={cursor}")).await;
    let rows = second["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 250);
    assert_eq!(rows[0]["t"], PAGE_ROWS as u64);
    assert_eq!(second["next_cursor"], Value::Null);
}

#[tokio::test]
async fn requests_never_mutate_the_store() {
    let store = Arc::new(fixture());
    let digest = |s: &Store| {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        serde_json::to_string(s).unwrap().hash(&mut h);
        h.finish()
    };
    let before = digest(&store);
    let ids = ["Scenario%201.1", "Scenario%202.1", "missing", "Scenario%203"];
    let mut x: u64 = 0x2545_f491_4f6c_dd1d;
    let mut first_bodies: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for i in 0..200 {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        let id = ids[(x % 4) as usize];
        let from = 1_600_000_000_000 + (x >> 8) % 400_000;
        let to = from.wrapping_add((x >> 20) % 400_000).saturating_sub(if i % 7 == 0 { 500_000 } else { 0 });
        let kind = if x & 1 == 0 { "detections" } else { "track" };
        let uri = format!("/scenarios/{id}/{kind}?from={from}&to={to}");
        let (status, body) = get_raw(store.clone(), &uri).await;
        if status == StatusCode::OK {
            let v: Value = serde_json::from_slice(&body).unwrap();
            if kind == "detections" {
                for r in v["rows"].as_array().unwrap() {
                    assert!((from..=to).contains(&r["t"].as_u64().unwrap()));
                }
            }
        }
        // identical queries give identical bodies
        let prev = first_bodies.entry(uri.clone()).or_insert_with(|| body.clone());
        assert_eq!(prev, &body, "{uri}");
        let (_, again) = get_raw(store.clone(), &uri).await;
        assert_eq!(again, body);
    }
    assert_eq!(digest(&store), before);
}

#[tokio::test]
async fn ui_placeholder_and_static_assets() {
    let (status, body) = get_raw(fixture(), "/ui/").await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("<html"));

    let dir = tempfile::tempdir().unwrap();
    let assets = dir.path().join("ui");
    std::fs::create_dir(&assets).unwrap();
    std::fs::write(assets.join("index.html"), "<html>console</html>").unwrap();
    std::fs::write(dir.path().join("secret.txt"), "do not serve").unwrap();
    let app = || router(fixture(), UiAssets(Some(assets.clone())));

    let resp = app()
        .oneshot(Request::get("/ui/").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&body[..], b"<html>console</html>");

    for uri in ["/ui/../secret.txt", "/ui/%2e%2e/secret.txt", "/ui/..%2fsecret.txt"] {
        let resp = app().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
        let status = resp.status();
        let body = resp.into_body().collect().await.unwrap().to_bytes();
        assert!(
            !String::from_utf8_lossy(&body).contains("do not serve"),
            "{uri} leaked ({status})"
        );
    }
}
