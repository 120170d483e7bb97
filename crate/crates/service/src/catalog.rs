//! Scenes found under the dataset root.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use ae_sim::scene::dataset::{load_dataset, MANIFEST_NAME};
use ae_sim::scene::{SceneAttributes, SceneSequence};
use axum::http::StatusCode;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub n_timesteps: usize,
    pub bit_depth: u8,
    pub ladder_seconds: Vec<f64>,
    pub attributes: SceneAttributes,
    /// Some step has a bounding box.
    pub has_boxes: bool,
    /// Every step has one, so semantic AE can run.
    pub boxes_complete: bool,
}

impl SceneSummary {
    pub fn of(seq: &SceneSequence) -> Self {
        let info = seq.info();
        Self {
            id: info.id.clone(),
            width: info.width,
            height: info.height,
            n_timesteps: info.n_timesteps,
            bit_depth: info.bit_depth,
            ladder_seconds: seq.ladder().speeds().iter().map(|s| s.seconds()).collect(),
            attributes: info.attributes,
            has_boxes: info.boxes.iter().any(Option::is_some),
            boxes_complete: info.boxes.iter().all(Option::is_some),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneWarning {
    pub path: String,
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneListing {
    pub scenes: Vec<SceneSummary>,
    pub warnings: Vec<SceneWarning>,
}

/// Loaded scenes are immutable, so they are shared once found.
#[derive(Debug)]
pub struct Catalog {
    root: PathBuf,
    loaded: RwLock<HashMap<String, Arc<SceneSequence>>>,
}

impl Catalog {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            loaded: RwLock::new(HashMap::new()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn scan(&self) -> ApiResult<(Vec<Arc<SceneSequence>>, Vec<SceneWarning>)> {
        let entries = fs::read_dir(&self.root).map_err(|e| {
            ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "dataset_unavailable",
                format!("dataset root {} is not readable: {e}", self.root.display()),
                None,
            )
        })?;
        let mut dirs: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        dirs.sort();

        let mut scenes: Vec<Arc<SceneSequence>> = Vec::new();
        let mut warnings = Vec::new();
        let mut warn = |path: &Path, code: &str, message: String| {
            warnings.push(SceneWarning {
                path: path.display().to_string(),
                code: code.to_string(),
                message,
            })
        };
        for dir in dirs {
            if !dir.join(MANIFEST_NAME).is_file() {
                warn(&dir, "not_a_dataset", format!("no {MANIFEST_NAME}"));
                continue;
            }
            match load_dataset(&dir) {
                Ok(seq) if scenes.iter().any(|s| s.id() == seq.id()) => {
                    warn(&dir, "duplicate_id", format!("scene id `{}` already loaded", seq.id()))
                }
                Ok(seq) => scenes.push(Arc::new(seq)),
                Err(e) => warn(&dir, e.code(), e.to_string()),
            }
        }
        Ok((scenes, warnings))
    }

    pub fn list(&self) -> ApiResult<SceneListing> {
        let (scenes, warnings) = self.scan()?;
        let summaries = scenes.iter().map(|s| SceneSummary::of(s)).collect();
        let mut loaded = self.loaded.write().expect("catalog lock");
        for s in scenes {
            loaded.entry(s.id().to_string()).or_insert(s);
        }
        Ok(SceneListing {
            scenes: summaries,
            warnings,
        })
    }

    pub fn get(&self, id: &str) -> ApiResult<Arc<SceneSequence>> {
        if let Some(s) = self.loaded.read().expect("catalog lock").get(id) {
            return Ok(s.clone());
        }
        self.list()?;
        self.loaded
            .read()
            .expect("catalog lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_scene(id))
    }
}
