use axum::body::Body;
use axum::http::{Request, StatusCode};
use dac_core::interface::cli::run;
use dac_core::interface::server::router;
use dac_core::interface::{PriorSetDocument, ReportDocument};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn post(uri: &str, body: Value) -> (StatusCode, Value) {
    call("POST", uri, Some(body)).await
}

fn normal(mean: f64, sd: f64) -> Value {
    json!({"family": "normal", "parameters": {"mean": mean, "sd": sd}})
}

fn priors() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/turnover_priors.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[tokio::test]
async fn health() {
    let (s, v) = call("GET", "/api/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "ok");
}

#[tokio::test]
async fn density_cdf_quantiles() {
    let (s, v) = post("/api/density", json!({"spec": normal(0.0, 1.0), "xs": [0.0]})).await;
    assert_eq!(s, StatusCode::OK);
    assert!((v["densities"][0].as_f64().unwrap() - 0.3989423).abs() < 1e-7);

    let u = json!({"family": "uniform", "parameters": {"lower": 0.0, "upper": 5.0}});
    let (s, v) = post("/api/density", json!({"spec": u, "xs": [2.3, -0.1]})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["densities"], json!([0.2, 0.0]));

    let sn = json!({"family": "skew_normal", "parameters": {"location": 2.15, "scale": 0.09, "shape": 0.78}});
    let (s, v) = post("/api/cdf", json!({"spec": sn, "xs": [2.15]})).await;
    assert_eq!(s, StatusCode::OK);
    assert!((v["cdf"][0].as_f64().unwrap() - 1.0 / (1.0 + 0.78 * 0.78)).abs() < 1e-12);

    let (s, v) = post("/api/quantiles", json!({"spec": u, "ps": [0.2, 0.5]})).await;
    assert_eq!(s, StatusCode::OK);
    assert!((v["xs"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[tokio::test]
async fn kl_endpoint() {
    let (s, v) = post("/api/kl", json!({"p": normal(0.0, 1.0), "q": normal(0.5, 1.0)})).await;
    assert_eq!(s, StatusCode::OK);
    assert!((v["value"].as_f64().unwrap() - 0.125).abs() < 1e-9);

    let u = json!({"family": "uniform", "parameters": {"lower": 0.0, "upper": 5.0}});
    let (s, v) = post("/api/kl", json!({"p": normal(0.0, 1.0), "q": u})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["value"], "inf");
}

#[tokio::test]
async fn schema_and_parameter_errors_are_400() {
    let (s, v) = post("/api/density", json!({"spec": normal(0.0, 1.0)})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "schema");
    assert!(v["message"].as_str().unwrap().contains("xs"), "{v}");

    let (s, v) = post("/api/density", json!({"spec": normal(0.0, -1.0), "xs": [0.0]})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["message"].as_str().unwrap().contains("sd"), "{v}");

    let (s, _) = post("/api/density", json!({"spec": {"family": "gamma", "parameters": {}}, "xs": [0.0]})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, v) = post("/api/quantiles", json!({"spec": normal(0.0, 1.0), "ps": [0.5, 1.5]})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "domain");
    assert!(v["message"].as_str().unwrap().contains("ps[1]"));

    let (s, v) = post("/api/rank", json!({"benchmark": normal(0.0, 1.0), "experts": {"format_version": 1, "experts": []}, "posterior": normal(0.0, 0.1)})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "validation");
}

#[tokio::test]
async fn undefined_ratio_is_422() {
    let body = json!({
        "posterior": normal(2.29, 0.1),
        "benchmark": normal(2.29, 0.1),
        "experts": priors(),
    });
    let (s, v) = post("/api/rank", body).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "undefined_ratio");
}

#[tokio::test]
async fn rank_endpoint_orders_four_experts() {
    let body = json!({
        "posterior": normal(2.29, 0.09447),
        "benchmark": {"family": "uniform", "parameters": {"lower": 0.0, "upper": 5.0}},
        "experts": priors(),
    });
    let (s, v) = post("/api/rank", body).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let doc: ReportDocument = serde_json::from_value(v).unwrap();
    let ranks: Vec<usize> = ["expert1", "expert2", "expert3", "expert4"]
        .iter()
        .map(|id| doc.report.entry(id).unwrap().rank)
        .collect();
    assert_eq!(ranks, vec![2, 3, 4, 1]);
}

#[tokio::test]
async fn service_and_cli_agree() {
    let data_path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/turnover.csv");
    let priors_path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/turnover_priors.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let code = run(
        ["dac", "rank", "--data", data_path, "--priors", priors_path, "--benchmark", "uniform:0,5", "--out", out.to_str().unwrap()],
        &mut Vec::new(),
        &mut Vec::new(),
    );
    assert_eq!(code, 0);
    let cli_doc = ReportDocument::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();

    let observations = dac_core::interface::tables::parse_data_csv(&std::fs::read_to_string(data_path).unwrap()).unwrap();
    let experts = PriorSetDocument::from_json(&std::fs::read_to_string(priors_path).unwrap()).unwrap();
    let body = json!({
        "observations": observations,
        "benchmark": {"family": "uniform", "parameters": {"lower": 0.0, "upper": 5.0}},
        "experts": experts,
    });
    let (s, v) = post("/api/rank", body).await;
    assert_eq!(s, StatusCode::OK);
    let api_doc: ReportDocument = serde_json::from_value(v).unwrap();
    assert_eq!(api_doc.report, cli_doc.report);
    assert_eq!(api_doc.input_digests, cli_doc.input_digests);
}

#[tokio::test]
async fn unknown_route_is_404() {
    let (s, _) = call("GET", "/api/nothing", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}
