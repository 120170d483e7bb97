//! HTTP facade over a dataset root: scene listing, frames, histograms,
//! saliency maps and simulation runs.
//!
//! ```no_run
//! # async fn go() -> std::io::Result<()> {
//! ae_sim_service::serve("data".into(), 8080).await
//! # }
//! ```

mod catalog;
mod error;
mod runs;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use ae_sim::ae::{metered_histogram, saliency_weight_map, AeConfig, Algorithm};
use ae_sim::histogram::WeightMap;
use ae_sim::image::RawImage;
use ae_sim::isp::{IspProfile, DEFAULT_KEY};
use ae_sim::saliency::mbd_saliency;
use ae_sim::scene::dataset::{encode_gray8_png, encode_raw16_png, encode_srgb_png, stored_frame_bytes};
use ae_sim::scene::SceneSequence;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

pub use catalog::{Catalog, SceneListing, SceneSummary, SceneWarning};
pub use error::{ApiError, ApiResult, ErrorBody};
pub use runs::{RunRequest, RunResult, TraceCache, DEFAULT_CACHE_CAPACITY};

#[derive(Clone, Debug)]
pub struct AppState {
    pub catalog: Arc<Catalog>,
    pub runs: Arc<TraceCache>,
}

impl AppState {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            catalog: Arc::new(Catalog::new(root)),
            runs: Arc::new(TraceCache::new(DEFAULT_CACHE_CAPACITY)),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/scenes", get(list_scenes))
        .route("/scenes/{id}/frame", get(frame))
        .route("/scenes/{id}/histogram", get(histogram))
        .route("/scenes/{id}/saliency", get(saliency))
        .route("/runs", post(create_run))
        .route("/runs/{trace_id}", get(get_run))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(root: PathBuf, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port))).await?;
    axum::serve(listener, router(AppState::new(root))).await
}

type Params = Query<HashMap<String, String>>;

fn param<T: std::str::FromStr>(q: &HashMap<String, String>, name: &str) -> ApiResult<Option<T>> {
    q.get(name)
        .map(|v| v.parse().map_err(|_| ApiError::unprocessable(name, format!("cannot parse `{v}`"))))
        .transpose()
}

fn required<T: std::str::FromStr>(q: &HashMap<String, String>, name: &str) -> ApiResult<T> {
    param(q, name)?.ok_or_else(|| ApiError::unprocessable(name, "required"))
}

/// `t` and `index` from the query, checked against the scene.
fn address(seq: &SceneSequence, q: &HashMap<String, String>) -> ApiResult<(usize, usize)> {
    let t: usize = required(q, "t")?;
    let index: usize = required(q, "index")?;
    if t >= seq.n_timesteps() {
        return Err(ApiError::unprocessable("t", format!("must be < {}", seq.n_timesteps())));
    }
    if index >= seq.ladder().len() {
        return Err(ApiError::unprocessable("index", format!("must be < {}", seq.ladder().len())));
    }
    Ok((t, index))
}

fn isp_from(q: &HashMap<String, String>) -> ApiResult<IspProfile> {
    Ok(IspProfile::new(param(q, "key")?.unwrap_or(DEFAULT_KEY))?)
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

async fn list_scenes(State(s): State<AppState>) -> ApiResult<Json<SceneListing>> {
    Ok(Json(s.catalog.list()?))
}

async fn frame(State(s): State<AppState>, Path(id): Path<String>, Query(q): Params) -> ApiResult<Response> {
    let seq = s.catalog.get(&id)?;
    let (t, index) = address(&seq, &q)?;
    let space = q.get("space").map(String::as_str).unwrap_or("raw16");
    let bytes = match space {
        "raw16" => match stored_frame_bytes(&seq, t, index) {
            Some(stored) => stored?,
            None => encode_raw16_png(&seq.frame(t, index)?, seq.info().bit_depth)?,
        },
        "srgb8" => encode_srgb_png(&isp_from(&q)?.raw_to_srgb(&seq.frame(t, index)?))?,
        other => return Err(ApiError::unprocessable("space", format!("`{other}` is not raw16 or srgb8"))),
    };
    Ok(png(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramResponse {
    pub scene: String,
    pub t: usize,
    pub index: usize,
    pub algorithm: Algorithm,
    /// `raw` or `srgb`.
    pub space: String,
    /// Bin centres, in `[0, 1]`.
    pub bins: Vec<f64>,
    /// Metering weight accumulated in each bin.
    pub weights: Vec<f64>,
    /// Weighted mean over bin centres; `None` when nothing is weighted.
    pub mean: Option<f64>,
    /// Metering target in the same space as `bins`.
    pub key: f64,
    pub total_weight: f64,
    pub saturated_pixels: usize,
    pub retained_pixels: usize,
    pub salient_pixels: Option<usize>,
}

/// Config from query overrides: `key`, `gamma`, `beta`, `bins`.
fn config_from(q: &HashMap<String, String>) -> ApiResult<AeConfig> {
    let mut c = AeConfig::default();
    if let Some(k) = param(q, "key")? {
        c.key_raw = k;
    }
    if let Some(g) = param(q, "gamma")? {
        c.saliency.gamma_threshold = g;
    }
    if let Some(b) = param(q, "beta")? {
        c.saliency.beta_weight = b;
    }
    if let Some(n) = param(q, "bins")? {
        c.raw_bins = n;
    }
    c.validate()?;
    Ok(c)
}

/// The weight map the named algorithm would meter frame `(t, index)` with.
/// Saliency looks at the previous step's frame at the same level, as the
/// closed loop would when holding that exposure.
fn algorithm_weights(
    seq: &SceneSequence,
    algo: Algorithm,
    t: usize,
    index: usize,
    frame: &RawImage,
    config: &AeConfig,
    isp: &IspProfile,
) -> ApiResult<(WeightMap, Option<usize>)> {
    let (w, h) = frame.dimensions();
    Ok(match algo {
        Algorithm::Global | Algorithm::Entropy => (WeightMap::uniform(w, h, 1.0), None),
        Algorithm::Semantic => {
            let bbox = seq.bounding_box(t).ok_or(ae_sim::Error::MissingBox(t))?;
            (WeightMap::from_box(w, h, &bbox)?, None)
        }
        Algorithm::Saliency => {
            let prev = match t {
                0 => None,
                _ => Some(isp.raw_to_srgb(&seq.frame(t - 1, index)?)),
            };
            let (map, n) = saliency_weight_map(prev.as_ref(), w, h, &config.saliency)?;
            (map, Some(n))
        }
    })
}

pub fn compute_histogram(
    seq: &SceneSequence,
    q: &HashMap<String, String>,
) -> ApiResult<HistogramResponse> {
    let (t, index) = address(seq, q)?;
    let algo: Algorithm = q.get("algo").map(|a| a.parse()).transpose()?.unwrap_or(Algorithm::Global);
    let space = q.get("space").map(String::as_str).unwrap_or("raw");
    let config = config_from(q)?;
    let isp = config.isp()?;
    let frame = seq.frame(t, index)?;
    let (wmap, salient) = algorithm_weights(seq, algo, t, index, &frame, &config, &isp)?;
    let m = metered_histogram(&frame, &wmap, &config)?;

    let (bins, weights, key) = match space {
        "raw" => {
            let h = &m.histogram;
            ((0..h.n_bins()).map(|i| h.bin_center(i)).collect(), h.bins().to_vec(), config.key_raw)
        }
        "srgb" => {
            let codes = isp.raw_to_srgb(&frame).luminance_codes();
            let mut weights = vec![0.0; 256];
            for (c, w) in codes.iter().zip(m.weights.as_slice()) {
                weights[*c as usize] += w;
            }
            let bins: Vec<f64> = (0..256).map(|c| c as f64 / 255.0).collect();
            (bins, weights, isp.encode(config.key_raw) as f64 / 255.0)
        }
        other => return Err(ApiError::unprocessable("space", format!("`{other}` is not raw or srgb"))),
    };
    let total_weight: f64 = weights.iter().sum();
    let mean = (total_weight > 0.0)
        .then(|| bins.iter().zip(&weights).map(|(b, w)| b * w).sum::<f64>() / total_weight);
    Ok(HistogramResponse {
        scene: seq.id().to_string(),
        t,
        index,
        algorithm: algo,
        space: space.to_string(),
        bins,
        weights,
        mean,
        key,
        total_weight,
        saturated_pixels: m.clip.saturated,
        retained_pixels: m.clip.retained,
        salient_pixels: salient,
    })
}

async fn histogram(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Params,
) -> ApiResult<Json<HistogramResponse>> {
    let seq = s.catalog.get(&id)?;
    tokio::task::spawn_blocking(move || compute_histogram(&seq, &q).map(Json))
        .await
        .expect("histogram task")
}

async fn saliency(State(s): State<AppState>, Path(id): Path<String>, Query(q): Params) -> ApiResult<Response> {
    let seq = s.catalog.get(&id)?;
    let (t, index) = address(&seq, &q)?;
    let binary: Option<f64> = param(&q, "binary")?;
    let config = config_from(&q)?;
    let srgb = isp_from(&q)?.raw_to_srgb(&seq.frame(t, index)?);
    let map = mbd_saliency(&srgb, &config.saliency);
    let gray = match binary {
        None => map.to_gray8(),
        Some(g) if (0.0..=1.0).contains(&g) => {
            map.threshold(g).as_slice().iter().map(|&b| if b { 255 } else { 0 }).collect()
        }
        Some(_) => return Err(ApiError::unprocessable("binary", "must be in [0, 1]")),
    };
    Ok(png(encode_gray8_png(map.width(), map.height(), gray)?))
}

async fn create_run(
    State(s): State<AppState>,
    body: Result<Json<RunRequest>, JsonRejection>,
) -> ApiResult<Json<RunResult>> {
    let Json(req) = body.map_err(|e| ApiError::unprocessable("body", e.body_text()))?;
    let seq = s.catalog.get(&req.scene)?;
    let cache = s.runs.clone();
    tokio::task::spawn_blocking(move || cache.run(&seq, &req).map(Json))
        .await
        .expect("run task")
}

async fn get_run(State(s): State<AppState>, Path(trace_id): Path<String>) -> ApiResult<Json<ae_sim::sim::SimulationTrace>> {
    s.runs.get(&trace_id).map(|t| Json((*t).clone())).ok_or_else(|| {
        ApiError::new(
            axum::http::StatusCode::NOT_FOUND,
            "unknown_trace",
            format!("no trace `{trace_id}`"),
            Some("trace_id"),
        )
    })
}
