//! HTTP preview service.
//!
//! | method | path | body / query | response |
//! |---|---|---|---|
//! | GET | `/api/presets` | | profile JSON list |
//! | POST | `/api/panorama` | raw PNG/JPEG/EXR bytes | `{id, width, height}` |
//! | POST | `/api/render` | `{panorama_id, profile, width, height}` | PNG |
//! | GET | `/api/aov` | `k`, `focal` or `fov`, `axis`, `aspect` | `{omega_h, omega_v, omega_d, aspect}` in degrees |
//!
//! `profile` is a preset name or a full lens-profile object. Errors are
//! `{field, message}` with a 4xx status: 400 for malformed requests, 404 for
//! an unknown panorama, 413 for oversized output, 422 for invalid parameters.

use std::collections::HashMap;
use std::io::Cursor;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pantomorph::profile::{lookup_preset, preset_registry, LensProfile};
use pantomorph::projection::{aov_from_focal, frame_aov, LensParams, ReferenceAxis};
use pantomorph::raster::RgbRaster;
use pantomorph::remap::{render_projection, Panorama, RenderOptions};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::store::PanoramaStore;
use crate::{parse_k, DEFAULT_ASPECT};

pub const STORE_CAPACITY: usize = 16;
pub const MAX_UPLOAD_BYTES: usize = 256 * 1024 * 1024;
pub const MAX_RENDER_SIDE: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub field: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            status,
            field: field.into(),
            message: message.into(),
        }
    }

    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, field, message)
    }
}

impl From<pantomorph::Error> for ApiError {
    fn from(e: pantomorph::Error) -> Self {
        let message = match &e {
            pantomorph::Error::Invalid { message, .. } => message.clone(),
            other => other.to_string(),
        };
        Self::invalid(e.field(), message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "field": self.field, "message": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct AppState {
    pub store: PanoramaStore,
}

impl Default for AppState {
    fn default() -> Self {
        Self {
            store: PanoramaStore::new(STORE_CAPACITY),
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/presets", get(presets))
        .route("/api/panorama", post(upload_panorama))
        .route("/api/render", post(render))
        .route("/api/aov", get(aov))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

pub fn app() -> Router {
    router(Arc::new(AppState::default()))
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn presets() -> Json<Vec<Value>> {
    Json(preset_registry().iter().map(LensProfile::to_value).collect())
}

async fn upload_panorama(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    if body.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "image", "request body is empty"));
    }
    let id = PanoramaStore::content_id(&body);
    let pano = match state.store.get(&id) {
        Some(p) => p,
        None => {
            let decoded = tokio::task::spawn_blocking(move || -> ApiResult<Panorama> {
                let image = image::load_from_memory(&body)
                    .map_err(|e| ApiError::invalid("image", format!("cannot decode image: {e}")))?;
                Ok(Panorama::new(RgbRaster::from_image(&image))?)
            })
            .await
            .map_err(internal)??;
            state.store.insert(id.clone(), decoded)
        }
    };
    let image = pano.image();
    Ok(Json(json!({ "id": id, "width": image.width(), "height": image.height() })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderRequest {
    panorama_id: String,
    profile: Value,
    width: usize,
    height: usize,
}

fn request_profile(value: Value) -> ApiResult<LensProfile> {
    match value {
        Value::String(name) => lookup_preset(&name)
            .ok_or_else(|| ApiError::invalid("profile", format!("unknown preset {name:?}"))),
        Value::Object(_) => Ok(LensProfile::from_value(value)?),
        _ => Err(ApiError::invalid("profile", "expected a preset name or a profile object")),
    }
}

fn check_side(field: &str, value: usize) -> ApiResult<()> {
    if value == 0 {
        return Err(ApiError::invalid(field, "must be at least 1"));
    }
    if value > MAX_RENDER_SIDE {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            field,
            format!("{value} exceeds the limit of {MAX_RENDER_SIDE}"),
        ));
    }
    Ok(())
}

async fn render(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let request: RenderRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "body", e.to_string()))?;
    check_side("width", request.width)?;
    check_side("height", request.height)?;
    let profile = request_profile(request.profile)?;
    let pano = state.store.get(&request.panorama_id).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "panorama_id",
            format!("no panorama with id {:?}", request.panorama_id),
        )
    })?;
    let options = RenderOptions {
        lens: profile.lens,
        distortion: profile.distortion,
        vignette: profile.vignette,
        chromatic: profile.chromatic,
    };
    let (w, h) = (request.width, request.height);
    let png = tokio::task::spawn_blocking(move || -> ApiResult<Vec<u8>> {
        let image = render_projection(&pano, w, h, &options)?;
        let mut bytes = Vec::new();
        image
            .to_rgba8()
            .write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
            .map_err(internal)?;
        Ok(bytes)
    })
    .await
    .map_err(internal)??;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

fn query_number(query: &HashMap<String, String>, key: &str) -> ApiResult<Option<f64>> {
    query
        .get(key)
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| ApiError::invalid(key, format!("{v:?} is not a number")))
        })
        .transpose()
}

fn degrees(omega: Option<f64>) -> Value {
    omega.map_or(Value::Null, |o| json!(o.to_degrees()))
}

async fn aov(Query(query): Query<HashMap<String, String>>) -> ApiResult<Json<Value>> {
    let k = parse_k(query.get("k").ok_or_else(|| ApiError::invalid("k", "missing"))?)?;
    let axis = match query.get("axis") {
        Some(a) => ReferenceAxis::parse(a)?,
        None => ReferenceAxis::Horizontal,
    };
    let lens = match (query_number(&query, "focal")?, query_number(&query, "fov")?) {
        (Some(_), Some(_)) => return Err(ApiError::invalid("fov", "give either focal or fov, not both")),
        (Some(focal), None) => LensParams::with_focal(k, focal, axis)?,
        (None, Some(fov)) => LensParams::with_aov(k, fov.to_radians(), axis)?,
        (None, None) => return Err(ApiError::invalid("focal", "missing (or give fov)")),
    };
    let aspect = query_number(&query, "aspect")?.unwrap_or(DEFAULT_ASPECT);
    let k_ref = match axis {
        ReferenceAxis::Horizontal => k.kx(),
        ReferenceAxis::Vertical => k.ky(),
    };
    aov_from_focal(lens.focal_reciprocal(), k_ref)?;
    let frame = frame_aov(&lens, aspect)?;
    Ok(Json(json!({
        "omega_h": degrees(frame.horizontal),
        "omega_v": degrees(frame.vertical),
        "omega_d": degrees(frame.diagonal),
        "aspect": aspect,
        "focal_reciprocal": lens.focal_reciprocal(),
    })))
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "server", e.to_string())
}
