//! Stateless JSON-over-HTTP service.
//!
//! | route                | body                                   | response                  |
//! |----------------------|----------------------------------------|---------------------------|
//! | `GET /api/health`    |                                        | `{status, name, version}` |
//! | `POST /api/density`  | `{spec, xs}`                           | `{densities}`             |
//! | `POST /api/cdf`      | `{spec, xs}`                           | `{cdf}`                   |
//! | `POST /api/quantiles`| `{spec, ps}`                           | `{xs}`                    |
//! | `POST /api/kl`       | `{p, q, quadrature?}`                  | `KlResult`                |
//! | `POST /api/rank`     | [`RankRequest`]                        | [`ReportDocument`]        |
//!
//! Malformed bodies and invalid parameters give 400; numerical failures
//! (undefined DAC ratio, failed quadrature) give 422.

use std::net::SocketAddr;

use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::document::{ReportDocument, TOOL_NAME, TOOL_VERSION};
use super::pipeline::{rank, RankRequest};
use crate::dist::DistributionSpec;
use crate::divergence::{kl, KlResult, QuadratureConfig};
use crate::error::DacError;

pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl From<DacError> for ApiError {
    fn from(e: DacError) -> Self {
        let (status, kind) = match &e {
            DacError::Validation(_) => (StatusCode::BAD_REQUEST, "validation"),
            DacError::Domain(_) => (StatusCode::BAD_REQUEST, "domain"),
            DacError::UndefinedRatio(_) => (StatusCode::UNPROCESSABLE_ENTITY, "undefined_ratio"),
            DacError::Numerical(_) => (StatusCode::UNPROCESSABLE_ENTITY, "numerical"),
        };
        Self {
            status,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            kind: "schema",
            message: r.body_text(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.kind, "message": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
pub struct PointsRequest {
    pub spec: DistributionSpec,
    pub xs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DensityResponse {
    pub densities: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CdfResponse {
    pub cdf: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct QuantilesRequest {
    pub spec: DistributionSpec,
    pub ps: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QuantilesResponse {
    pub xs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct KlRequest {
    pub p: DistributionSpec,
    pub q: DistributionSpec,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "name": TOOL_NAME, "version": TOOL_VERSION }))
}

async fn density(body: Result<Json<PointsRequest>, JsonRejection>) -> ApiResult<DensityResponse> {
    let Json(req) = body?;
    Ok(Json(DensityResponse {
        densities: req.xs.iter().map(|&x| req.spec.density(x)).collect(),
    }))
}

async fn cdf(body: Result<Json<PointsRequest>, JsonRejection>) -> ApiResult<CdfResponse> {
    let Json(req) = body?;
    Ok(Json(CdfResponse {
        cdf: req.xs.iter().map(|&x| req.spec.cdf(x)).collect(),
    }))
}

async fn quantiles(body: Result<Json<QuantilesRequest>, JsonRejection>) -> ApiResult<QuantilesResponse> {
    let Json(req) = body?;
    let xs = req
        .ps
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            req.spec
                .quantile(p)
                .map_err(|e| DacError::Domain(format!("ps[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Json(QuantilesResponse { xs }))
}

async fn kl_handler(body: Result<Json<KlRequest>, JsonRejection>) -> ApiResult<KlResult> {
    let Json(req) = body?;
    let result = tokio::task::spawn_blocking(move || kl(&req.p, &req.q, &req.quadrature))
        .await
        .map_err(|e| DacError::Numerical(e.to_string()))??;
    Ok(Json(result))
}

async fn rank_handler(body: Result<Json<RankRequest>, JsonRejection>) -> ApiResult<ReportDocument> {
    let Json(req) = body?;
    let doc = tokio::task::spawn_blocking(move || rank(&req))
        .await
        .map_err(|e| DacError::Numerical(e.to_string()))??;
    Ok(Json(doc))
}

pub fn router() -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/density", post(density))
        .route("/api/cdf", post(cdf))
        .route("/api/quantiles", post(quantiles))
        .route("/api/kl", post(kl_handler))
        .route("/api/rank", post(rank_handler))
}

/// Bind and serve until the process is interrupted.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
