//! 4D scenes: time × exposure × height × width.

pub mod bundled;
pub mod dataset;
mod render;
mod script;

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use render::{max_code, quantize, render_exposure, render_exposure_noisy};
pub use script::{
    Background, LightSchedule, MovingObject, NoiseProfile, Path, Point, RadianceField, Rgb,
    SceneAttributes, SceneScript, Shape, DEFAULT_BIT_DEPTH,
};

use crate::error::{Error, Result};
use crate::exposure::{expand_stack, interpolate_exposure, ExposureLadder, ExposureStack};
use crate::image::{BoundingBox, RawImage};

/// Upper bound on pixels per frame accepted by the synthesizer.
pub const MAX_FRAME_PIXELS: usize = 6720 * 4480;

#[derive(Clone, Debug, PartialEq)]
pub struct SceneInfo {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub n_timesteps: usize,
    pub bit_depth: u8,
    pub boxes: Vec<Option<BoundingBox>>,
    pub attributes: SceneAttributes,
}

#[derive(Clone, Debug)]
enum FrameStore {
    /// Rendered on demand from a script.
    Synthetic(Arc<SceneScript>),
    /// Fully materialised stacks.
    Memory(Arc<Vec<ExposureStack>>),
    /// Captured levels decoded from disk on demand.
    Disk(Arc<dataset::DiskStore>),
}

/// A scene's full exposure stack at every time step.
///
/// Frames are produced lazily, so a sequence is cheap to clone and to hold
/// even at a hundred steps × forty levels.
#[derive(Clone, Debug)]
pub struct SceneSequence {
    info: SceneInfo,
    ladder: ExposureLadder,
    store: FrameStore,
}

/// Render `script` at every ladder level for every time step.
pub fn synthesize_scene(script: &SceneScript, ladder: &ExposureLadder) -> Result<SceneSequence> {
    script.validate()?;
    let pixels = script.width.checked_mul(script.height);
    if pixels.is_none_or(|p| p > MAX_FRAME_PIXELS) {
        return Err(Error::Capacity(format!(
            "{}x{} exceeds the {MAX_FRAME_PIXELS}-pixel frame limit",
            script.width, script.height
        )));
    }
    Ok(SceneSequence {
        info: SceneInfo {
            id: script.id.clone(),
            width: script.width,
            height: script.height,
            n_timesteps: script.n_timesteps,
            bit_depth: script.bit_depth,
            boxes: script.preferred_boxes(),
            attributes: script.attributes,
        },
        ladder: ladder.clone(),
        store: FrameStore::Synthetic(Arc::new(script.clone())),
    })
}

impl SceneSequence {
    /// Wrap explicit stacks, e.g. captured externally and expanded.
    pub fn from_stacks(
        info: SceneInfo,
        ladder: ExposureLadder,
        stacks: Vec<ExposureStack>,
    ) -> Result<Self> {
        if stacks.len() != info.n_timesteps || info.boxes.len() != info.n_timesteps {
            return Err(Error::invalid("stacks", "one stack and one box entry per time step"));
        }
        for stack in &stacks {
            if stack.len() != ladder.len() || stack.captured_mask.len() != ladder.len() {
                return Err(Error::invalid("stacks", "stack length must equal ladder length"));
            }
            if let Some(img) = stack.images.iter().find(|i| i.dimensions() != (info.width, info.height)) {
                return Err(Error::DimensionMismatch {
                    expected: (info.width, info.height),
                    actual: img.dimensions(),
                });
            }
        }
        Ok(Self {
            info,
            ladder,
            store: FrameStore::Memory(Arc::new(stacks)),
        })
    }

    pub(crate) fn from_disk(info: SceneInfo, ladder: ExposureLadder, store: dataset::DiskStore) -> Self {
        Self {
            info,
            ladder,
            store: FrameStore::Disk(Arc::new(store)),
        }
    }

    pub fn info(&self) -> &SceneInfo {
        &self.info
    }

    pub fn id(&self) -> &str {
        &self.info.id
    }

    pub fn ladder(&self) -> &ExposureLadder {
        &self.ladder
    }

    pub fn n_timesteps(&self) -> usize {
        self.info.n_timesteps
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.info.width, self.info.height)
    }

    pub fn bounding_box(&self, t: usize) -> Option<BoundingBox> {
        self.info.boxes.get(t).copied().flatten()
    }

    /// The script behind a synthetic sequence.
    pub fn script(&self) -> Option<&SceneScript> {
        match &self.store {
            FrameStore::Synthetic(s) => Some(s),
            _ => None,
        }
    }

    /// Which ladder levels hold captured (rather than interpolated) images.
    pub fn captured_mask(&self, t: usize) -> Result<Vec<bool>> {
        self.check_t(t)?;
        Ok(match &self.store {
            FrameStore::Synthetic(_) => vec![true; self.ladder.len()],
            FrameStore::Memory(stacks) => stacks[t].captured_mask.clone(),
            FrameStore::Disk(d) => d.captured_mask.clone(),
        })
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t >= self.info.n_timesteps {
            return Err(Error::out_of_range(
                "t",
                format!("time step {t} outside [0, {})", self.info.n_timesteps),
            ));
        }
        Ok(())
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.ladder.len() {
            return Err(Error::out_of_range(
                "index",
                format!("exposure index {index} outside [0, {})", self.ladder.len()),
            ));
        }
        Ok(())
    }

    fn render(&self, script: &SceneScript, field: &RadianceField, t: usize, index: usize) -> RawImage {
        let shutter = self.ladder.speed(index);
        match &script.noise {
            None => render_exposure(field, shutter, script.bit_depth),
            Some(noise) => {
                let stream = (t * self.ladder.len() + index) as u64;
                render_exposure_noisy(field, shutter, script.bit_depth, noise, script.seed, stream)
            }
        }
    }

    /// The RAW image at time step `t`, ladder level `index`.
    pub fn frame(&self, t: usize, index: usize) -> Result<RawImage> {
        self.check_t(t)?;
        self.check_index(index)?;
        match &self.store {
            FrameStore::Synthetic(script) => {
                let field = script.generate_radiance(t)?;
                Ok(self.render(script, &field, t, index))
            }
            FrameStore::Memory(stacks) => Ok(stacks[t].images[index].clone()),
            FrameStore::Disk(store) => {
                if store.captured_mask[index] {
                    return store.read(t, index);
                }
                let target = self.ladder.speed(index);
                let below = (0..index).rev().find(|&i| store.captured_mask[i]);
                let above = (index + 1..self.ladder.len()).find(|&i| store.captured_mask[i]);
                let (Some(a), Some(b)) = (below, above) else {
                    return Err(Error::out_of_range("index", "level outside the captured range"));
                };
                let (ia, ib) = (store.read(t, a)?, store.read(t, b)?);
                interpolate_exposure(&[(self.ladder.speed(a), &ia), (self.ladder.speed(b), &ib)], target)
            }
        }
    }

    /// Every ladder level at time step `t`.
    pub fn stack(&self, t: usize) -> Result<ExposureStack> {
        self.check_t(t)?;
        match &self.store {
            FrameStore::Synthetic(script) => {
                let field = script.generate_radiance(t)?;
                let images = (0..self.ladder.len())
                    .into_par_iter()
                    .map(|i| self.render(script, &field, t, i))
                    .collect();
                Ok(ExposureStack::fully_captured(images))
            }
            FrameStore::Memory(stacks) => Ok(stacks[t].clone()),
            FrameStore::Disk(store) => {
                let captured = (0..self.ladder.len())
                    .filter(|&i| store.captured_mask[i])
                    .collect::<Vec<_>>()
                    .into_par_iter()
                    .map(|i| Ok((self.ladder.speed(i), store.read(t, i)?)))
                    .collect::<Result<Vec<_>>>()?;
                expand_stack(&captured, &self.ladder)
            }
        }
    }

    /// Copy every frame into memory.
    pub fn materialize(&self) -> Result<SceneSequence> {
        let stacks = (0..self.n_timesteps())
            .map(|t| self.stack(t))
            .collect::<Result<Vec<_>>>()?;
        Self::from_stacks(self.info.clone(), self.ladder.clone(), stacks)
    }

    /// Content hash identifying this dataset version.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.info.id.as_bytes());
        for s in self.ladder.speeds() {
            h.update(s.seconds().to_le_bytes());
        }
        match &self.store {
            FrameStore::Synthetic(script) => {
                h.update(b"synthetic");
                h.update(serde_json::to_vec(script.as_ref()).expect("script serializes"));
            }
            FrameStore::Disk(store) => {
                h.update(b"disk");
                h.update(&store.manifest_digest);
            }
            FrameStore::Memory(stacks) => {
                h.update(b"memory");
                for stack in stacks.iter() {
                    for img in &stack.images {
                        for v in img.as_slice() {
                            h.update(v.to_le_bytes());
                        }
                    }
                }
            }
        }
        hex::encode(h.finalize())
    }

    pub(crate) fn disk_path(&self, t: usize, index: usize) -> Option<PathBuf> {
        match &self.store {
            FrameStore::Disk(store) => store.path(t, index),
            _ => None,
        }
    }
}

/// Frame-by-frame content equality.
impl PartialEq for SceneSequence {
    fn eq(&self, other: &Self) -> bool {
        if self.info != other.info || self.ladder != other.ladder {
            return false;
        }
        (0..self.n_timesteps()).all(|t| {
            match (self.stack(t), other.stack(t)) {
                (Ok(a), Ok(b)) => a == b,
                _ => false,
            }
        })
    }
}
