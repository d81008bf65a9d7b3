//! HTTP facade over the estimation chain.
//!
//! The state is assembled once at startup and never mutated: a request
//! either sees the fully loaded model bundle or a 503 while the service
//! has nothing to serve. All numeric work happens in `inferwatt-core`,
//! so a request answered here is field-for-field identical to the same
//! request answered by the CLI.

use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use inferwatt_core::dataset::{HardwareDb, HardwareSpec, RciDb};
use inferwatt_core::estimator::{
    estimate, rank_models, DeviceRounding, EstimateRequest, EstimateResult, ModelBundle,
    RankCandidate, ENCODING_FILE, MIN_DEVICES_FILE, PER_TOKEN_FILE,
};
use inferwatt_core::Error as CoreError;

/// Integrity stamps for one served model: the hash of the file on disk
/// and the fingerprint of the data it was trained on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStamp {
    pub file_sha256: String,
    pub data_fingerprint: String,
}

/// The bundle plus its integrity stamps, hashed at load time.
#[derive(Debug, Clone)]
pub struct LoadedModels {
    pub bundle: ModelBundle,
    pub min_devices: ModelStamp,
    pub encoding_latency: ModelStamp,
    pub per_token_latency: ModelStamp,
}

/// Immutable service state. `models` is `None` while the bundle could not
/// be loaded; every model-dependent route then answers 503.
pub struct ServiceState {
    models: Option<LoadedModels>,
    load_error: Option<String>,
    hardware_db: HardwareDb,
    rci_db: RciDb,
}

fn file_sha256(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(7 + digest.len() * 2);
    out.push_str("sha256:");
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    Ok(out)
}

impl ServiceState {
    /// Loads the bundle from `models_dir`, stamping each file. A load
    /// failure is not fatal: the service starts degraded and reports the
    /// reason via `/health`.
    pub fn load(models_dir: &Path, hardware_db: HardwareDb, rci_db: RciDb) -> Self {
        let loaded = ModelBundle::load_dir(models_dir).and_then(|bundle| {
            let stamp = |file: &str, fingerprint: &str| -> inferwatt_core::Result<ModelStamp> {
                let path = models_dir.join(file);
                Ok(ModelStamp {
                    file_sha256: file_sha256(&path).map_err(|source| CoreError::Io {
                        path: path.clone(),
                        source,
                    })?,
                    data_fingerprint: fingerprint.to_string(),
                })
            };
            Ok(LoadedModels {
                min_devices: stamp(MIN_DEVICES_FILE, &bundle.min_devices().data_fingerprint)?,
                encoding_latency: stamp(ENCODING_FILE, &bundle.encoding().data_fingerprint)?,
                per_token_latency: stamp(PER_TOKEN_FILE, &bundle.per_token().data_fingerprint)?,
                bundle,
            })
        });
        match loaded {
            Ok(models) => ServiceState {
                models: Some(models),
                load_error: None,
                hardware_db,
                rci_db,
            },
            Err(err) => ServiceState {
                models: None,
                load_error: Some(err.to_string()),
                hardware_db,
                rci_db,
            },
        }
    }

    pub fn is_ready(&self) -> bool {
        self.models.is_some()
    }
}

/// Builds the router onto shared state.
pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/estimate", post(estimate_handler))
        .route("/rank", post(rank_handler))
        .route("/health", get(health_handler))
        .route("/hardware", get(hardware_handler))
        .with_state(state)
}

#[derive(Debug, Serialize, Deserialize)]
struct ErrorBody {
    error: ErrorDetail,
}

#[derive(Debug, Serialize, Deserialize)]
struct ErrorDetail {
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    message: String,
}

fn error_response(status: StatusCode, field: Option<&str>, message: String) -> Response {
    (
        status,
        Json(ErrorBody {
            error: ErrorDetail {
                field: field.map(str::to_string),
                message,
            },
        }),
    )
        .into_response()
}

/// Maps a core error onto a status and, where one exists, the offending
/// request field.
fn core_error_response(err: CoreError) -> Response {
    let message = err.to_string();
    match err {
        CoreError::InvalidRequest { field, .. } => {
            error_response(StatusCode::BAD_REQUEST, Some(field), message)
        }
        CoreError::UnknownHardware { .. } => {
            error_response(StatusCode::BAD_REQUEST, Some("hardware_name"), message)
        }
        CoreError::EmptyInput { .. } => {
            error_response(StatusCode::BAD_REQUEST, Some("candidates"), message)
        }
        _ => error_response(StatusCode::INTERNAL_SERVER_ERROR, None, message),
    }
}

fn not_ready(state: &ServiceState) -> Response {
    let mut message = "models are not loaded".to_string();
    if let Some(detail) = &state.load_error {
        message = format!("{message}: {detail}");
    }
    error_response(StatusCode::SERVICE_UNAVAILABLE, None, message)
}

async fn estimate_handler(
    State(state): State<Arc<ServiceState>>,
    body: Result<Json<EstimateRequest>, JsonRejection>,
) -> Response {
    let Json(request) = match body {
        Ok(json) => json,
        Err(rejection) => {
            return error_response(StatusCode::BAD_REQUEST, None, rejection.body_text())
        }
    };
    let Some(models) = &state.models else {
        return not_ready(&state);
    };
    match estimate(&request, &models.bundle, &state.hardware_db, &state.rci_db) {
        Ok(result) => (StatusCode::OK, Json(result)).into_response(),
        Err(err) => core_error_response(err),
    }
}

/// Body of `POST /rank`: the candidates plus the shared workload they all
/// compete on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankRequest {
    pub candidates: Vec<RankCandidate>,
    pub prompt_tokens: u32,
    pub output_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pue: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rci_g_per_kwh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_override: Option<u32>,
    #[serde(default)]
    pub device_rounding: DeviceRounding,
}

impl RankRequest {
    fn template(&self) -> EstimateRequest {
        EstimateRequest {
            // Placeholder; replaced per candidate by `rank_models`.
            model_params: 1.0,
            prompt_tokens: self.prompt_tokens,
            output_tokens: self.output_tokens,
            hardware_name: self.hardware_name.clone(),
            utilization: self.utilization,
            pue: self.pue,
            rci_g_per_kwh: self.rci_g_per_kwh,
            device_override: self.device_override,
            device_rounding: self.device_rounding,
        }
    }
}

/// One ranked entry of the `POST /rank` response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedModel {
    pub name: String,
    pub estimate: EstimateResult,
}

#[derive(Debug, Serialize, Deserialize)]
struct RankResponse {
    ranking: Vec<RankedModel>,
}

async fn rank_handler(
    State(state): State<Arc<ServiceState>>,
    body: Result<Json<RankRequest>, JsonRejection>,
) -> Response {
    let Json(request) = match body {
        Ok(json) => json,
        Err(rejection) => {
            return error_response(StatusCode::BAD_REQUEST, None, rejection.body_text())
        }
    };
    if request.candidates.is_empty() {
        return error_response(
            StatusCode::BAD_REQUEST,
            Some("candidates"),
            "candidate list must not be empty".to_string(),
        );
    }
    let Some(models) = &state.models else {
        return not_ready(&state);
    };
    match rank_models(
        &request.candidates,
        &request.template(),
        &models.bundle,
        &state.hardware_db,
        &state.rci_db,
    ) {
        Ok(ranked) => {
            let ranking: Vec<RankedModel> = ranked
                .into_iter()
                .map(|(name, estimate)| RankedModel { name, estimate })
                .collect();
            (StatusCode::OK, Json(RankResponse { ranking })).into_response()
        }
        Err(err) => core_error_response(err),
    }
}

/// `GET /health` payload when the service is ready.
#[derive(Debug, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models: Option<HealthModels>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HealthModels {
    pub min_devices: ModelStamp,
    pub encoding_latency: ModelStamp,
    pub per_token_latency: ModelStamp,
}

async fn health_handler(State(state): State<Arc<ServiceState>>) -> Response {
    match &state.models {
        Some(models) => (
            StatusCode::OK,
            Json(HealthResponse {
                status: "ok".to_string(),
                models: Some(HealthModels {
                    min_devices: models.min_devices.clone(),
                    encoding_latency: models.encoding_latency.clone(),
                    per_token_latency: models.per_token_latency.clone(),
                }),
                detail: None,
            }),
        )
            .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(HealthResponse {
                status: "loading".to_string(),
                models: None,
                detail: state.load_error.clone(),
            }),
        )
            .into_response(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HardwareResponse {
    hardware: Vec<HardwareSpec>,
}

async fn hardware_handler(State(state): State<Arc<ServiceState>>) -> Response {
    (
        StatusCode::OK,
        Json(HardwareResponse {
            hardware: state.hardware_db.entries().to_vec(),
        }),
    )
        .into_response()
}
