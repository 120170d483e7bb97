//! Synchronous runs with content-addressed ids.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use ae_sim::ae::{AeConfig, Algorithm};
use ae_sim::scene::SceneSequence;
use ae_sim::sim::{self, ControlMode, RunOptions, SimulationTrace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ApiResult;

pub const DEFAULT_CACHE_CAPACITY: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub scene: String,
    /// Parsed server-side so unknown names get the registered list back.
    pub algorithm: String,
    #[serde(default)]
    pub config: AeConfig,
    #[serde(default = "one")]
    pub scale: usize,
    #[serde(default)]
    pub mode: ControlMode,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub trace_id: String,
    pub trace: SimulationTrace,
}

type Entries = (HashMap<String, Arc<SimulationTrace>>, VecDeque<String>);

/// Finished traces, oldest evicted first.
#[derive(Debug)]
pub struct TraceCache {
    capacity: usize,
    inner: RwLock<Entries>,
}

impl TraceCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            inner: RwLock::new((HashMap::new(), VecDeque::new())),
        }
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("cache lock").0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, id: &str) -> Option<Arc<SimulationTrace>> {
        self.inner.read().expect("cache lock").0.get(id).cloned()
    }

    fn insert(&self, id: String, trace: Arc<SimulationTrace>) {
        let mut guard = self.inner.write().expect("cache lock");
        let (map, order) = &mut *guard;
        if map.insert(id.clone(), trace).is_none() {
            order.push_back(id);
        }
        while order.len() > self.capacity {
            if let Some(old) = order.pop_front() {
                map.remove(&old);
            }
        }
    }

    pub fn run(&self, seq: &SceneSequence, req: &RunRequest) -> ApiResult<RunResult> {
        let algorithm: Algorithm = req.algorithm.parse()?;
        let id = trace_id(seq, algorithm, req);
        if let Some(trace) = self.get(&id) {
            return Ok(RunResult {
                trace_id: id,
                trace: (*trace).clone(),
            });
        }
        let opts = RunOptions::new(algorithm, req.config.clone())
            .with_scale(req.scale)
            .with_mode(req.mode);
        let trace = Arc::new(sim::run(seq, &opts)?);
        self.insert(id.clone(), trace.clone());
        Ok(RunResult {
            trace_id: id,
            trace: (*trace).clone(),
        })
    }
}

/// Hash of the normalised request and the dataset version.
pub fn trace_id(seq: &SceneSequence, algorithm: Algorithm, req: &RunRequest) -> String {
    let canonical = serde_json::json!({
        "dataset": seq.fingerprint(),
        "algorithm": algorithm,
        "config": req.config,
        "scale": req.scale,
        "mode": req.mode,
    });
    let digest = Sha256::digest(serde_json::to_vec(&canonical).expect("request serializes"));
    hex::encode(&digest[..16])
}
