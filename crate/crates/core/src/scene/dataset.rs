//! On-disk dataset layout: `<scene>/manifest.json` plus one 16-bit PNG per
//! captured `(t, index)` image named `t{TTT}_e{EE}.png`.
//!
//! RAW codes are stored left-aligned: a `b`-bit code `k` is written as
//! `k << (16 - b)`, so decoding recovers `k / (2^b - 1)` bit-exactly.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, ImageFormat, Luma, Rgb};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{max_code, SceneAttributes, SceneInfo, SceneSequence};
use crate::error::{Error, Result};
use crate::exposure::{ExposureLadder, ShutterSpeed};
use crate::image::{BoundingBox, RawImage, SrgbImage};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub scene_id: String,
    pub n_timesteps: usize,
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub ladder_seconds: Vec<f64>,
    pub captured_mask: Vec<bool>,
    /// `frames[t][index]`: file name relative to the manifest, or `null`
    /// for levels reconstructed by interpolation.
    pub frames: Vec<Vec<Option<String>>>,
    pub boxes: Vec<Option<BoundingBox>>,
    #[serde(default)]
    pub attributes: SceneAttributes,
}

pub fn frame_file_name(t: usize, index: usize) -> String {
    format!("t{t:03}_e{index:02}.png")
}

/// Encode a RAW image as a 16-bit RGB PNG at the given bit depth.
pub fn encode_raw16_png(image: &RawImage, bit_depth: u8) -> Result<Vec<u8>> {
    let max = max_code(bit_depth) as f64;
    let shift = 16 - bit_depth as u32;
    let data: Vec<u16> = image
        .as_slice()
        .iter()
        .map(|&v| (((v * max).round() as u32) << shift) as u16)
        .collect();
    let buf: ImageBuffer<Rgb<u16>, Vec<u16>> =
        ImageBuffer::from_raw(image.width() as u32, image.height() as u32, data)
            .expect("buffer sized from image");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png).map_err(|source| Error::Image {
        path: PathBuf::from("<memory>"),
        source,
    })?;
    Ok(out.into_inner())
}

/// Decode a 16-bit PNG written by [`encode_raw16_png`].
pub fn decode_raw16_png(bytes: &[u8], bit_depth: u8, path: &Path) -> Result<RawImage> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|source| {
        Error::Image {
            path: path.to_path_buf(),
            source,
        }
    })?;
    let rgb = img.to_rgb16();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let max = max_code(bit_depth) as f64;
    let shift = 16 - bit_depth as u32;
    let pixels = rgb
        .into_raw()
        .into_iter()
        .map(|m| ((m as u32) >> shift) as f64 / max)
        .collect();
    Ok(RawImage::from_parts_unchecked(w, h, pixels, Some(bit_depth)))
}

pub fn encode_srgb_png(image: &SrgbImage) -> Result<Vec<u8>> {
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(image.width() as u32, image.height() as u32, image.as_slice().to_vec())
            .expect("buffer sized from image");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png).map_err(|source| Error::Image {
        path: PathBuf::from("<memory>"),
        source,
    })?;
    Ok(out.into_inner())
}

pub fn decode_srgb_png(bytes: &[u8], path: &Path) -> Result<SrgbImage> {
    let img = image::load_from_memory(bytes).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = img.to_rgb8();
    SrgbImage::new(rgb.width() as usize, rgb.height() as usize, rgb.into_raw())
}

pub fn encode_gray8_png(width: usize, height: usize, values: Vec<u8>) -> Result<Vec<u8>> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(width as u32, height as u32, values)
            .ok_or_else(|| Error::invalid("values", "length does not match dimensions"))?;
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png).map_err(|source| Error::Image {
        path: PathBuf::from("<memory>"),
        source,
    })?;
    Ok(out.into_inner())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Write the captured levels of `seq` and its manifest under `dir`.
pub fn save_dataset(seq: &SceneSequence, dir: &Path) -> Result<DatasetManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let info = seq.info();
    let ladder = seq.ladder();
    let mut frames = Vec::with_capacity(info.n_timesteps);
    let mut mask0: Option<Vec<bool>> = None;

    for t in 0..info.n_timesteps {
        let mask = seq.captured_mask(t)?;
        match &mask0 {
            None => mask0 = Some(mask.clone()),
            Some(m) if *m != mask => {
                return Err(Error::invalid("captured_mask", "must be identical at every time step"))
            }
            _ => {}
        }
        let stack = seq.stack(t)?;
        let names: Vec<Option<String>> = mask
            .iter()
            .enumerate()
            .map(|(i, &c)| c.then(|| frame_file_name(t, i)))
            .collect();
        names
            .par_iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_ref().map(|n| (i, n)))
            .try_for_each(|(i, name)| {
                let bytes = encode_raw16_png(&stack.images[i], info.bit_depth)?;
                write_file(&dir.join(name), &bytes)
            })?;
        frames.push(names);
    }

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        scene_id: info.id.clone(),
        n_timesteps: info.n_timesteps,
        width: info.width,
        height: info.height,
        bit_depth: info.bit_depth,
        ladder_seconds: ladder.speeds().iter().map(|s| s.seconds()).collect(),
        captured_mask: mask0.unwrap_or_default(),
        frames,
        boxes: info.boxes.clone(),
        attributes: info.attributes,
    };
    let json = serde_json::to_vec_pretty(&manifest)?;
    write_file(&dir.join(MANIFEST_NAME), &json)?;
    Ok(manifest)
}

/// Backing store for a loaded dataset; images are decoded per access.
#[derive(Debug)]
pub(crate) struct DiskStore {
    root: PathBuf,
    frames: Vec<Vec<Option<String>>>,
    bit_depth: u8,
    dims: (usize, usize),
    pub(crate) captured_mask: Vec<bool>,
    pub(crate) manifest_digest: Vec<u8>,
}

impl DiskStore {
    pub(crate) fn path(&self, t: usize, index: usize) -> Option<PathBuf> {
        self.frames[t][index].as_ref().map(|n| self.root.join(n))
    }

    pub(crate) fn read(&self, t: usize, index: usize) -> Result<RawImage> {
        let path = self
            .path(t, index)
            .ok_or_else(|| Error::out_of_range("index", format!("level {index} was not captured")))?;
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let img = decode_raw16_png(&bytes, self.bit_depth, &path)?;
        if img.dimensions() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                actual: img.dimensions(),
            });
        }
        Ok(img)
    }
}

fn manifest_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Manifest {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Read and validate a manifest. `path` may name the manifest or its directory.
pub fn read_manifest(path: &Path) -> Result<(PathBuf, DatasetManifest, Vec<u8>)> {
    let manifest_path = if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_path_buf()
    };
    let bytes = fs::read(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: DatasetManifest = serde_json::from_slice(&bytes)
        .map_err(|e| manifest_error(&manifest_path, e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: manifest.format_version,
            supported: FORMAT_VERSION,
        });
    }
    Ok((manifest_path, manifest, bytes))
}

/// Open a dataset written by [`save_dataset`] (or captured externally in the
/// same layout). Every referenced file is checked to exist with the declared
/// dimensions; pixel data is decoded lazily.
pub fn load_dataset(path: &Path) -> Result<SceneSequence> {
    let (manifest_path, m, bytes) = read_manifest(path)?;
    let root = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let bad = |msg: String| manifest_error(&manifest_path, msg);

    if !(1..=16).contains(&m.bit_depth) {
        return Err(bad(format!("bit_depth {} outside 1..=16", m.bit_depth)));
    }
    let speeds = m
        .ladder_seconds
        .iter()
        .map(|&s| ShutterSpeed::new(s))
        .collect::<Result<Vec<_>>>()?;
    let ladder = ExposureLadder::from_speeds(speeds).map_err(|e| bad(e.to_string()))?;
    if m.captured_mask.len() != ladder.len() {
        return Err(bad("captured_mask length differs from ladder".into()));
    }
    if !m.captured_mask.first().copied().unwrap_or(false)
        || !m.captured_mask.last().copied().unwrap_or(false)
    {
        return Err(bad("captured levels must include both ladder ends".into()));
    }
    if m.frames.len() != m.n_timesteps || m.boxes.len() != m.n_timesteps {
        return Err(bad("frames and boxes need one entry per time step".into()));
    }
    for (t, row) in m.frames.iter().enumerate() {
        if row.len() != ladder.len() {
            return Err(bad(format!("frames[{t}] has {} entries, expected {}", row.len(), ladder.len())));
        }
        for (i, name) in row.iter().enumerate() {
            if name.is_some() != m.captured_mask[i] {
                return Err(bad(format!("frames[{t}][{i}] disagrees with captured_mask")));
            }
        }
    }
    for b in m.boxes.iter().flatten() {
        b.validate(m.width, m.height).map_err(|e| bad(e.to_string()))?;
    }

    m.frames
        .par_iter()
        .flatten()
        .flatten()
        .try_for_each(|name| {
            let p = root.join(name);
            let (w, h) = image::image_dimensions(&p).map_err(|source| match source {
                image::ImageError::IoError(e) => Error::io(&p, e),
                source => Error::Image { path: p.clone(), source },
            })?;
            if (w as usize, h as usize) != (m.width, m.height) {
                return Err(Error::DimensionMismatch {
                    expected: (m.width, m.height),
                    actual: (w as usize, h as usize),
                });
            }
            Ok(())
        })?;

    let info = SceneInfo {
        id: m.scene_id.clone(),
        width: m.width,
        height: m.height,
        n_timesteps: m.n_timesteps,
        bit_depth: m.bit_depth,
        boxes: m.boxes.clone(),
        attributes: m.attributes,
    };
    let store = DiskStore {
        root,
        frames: m.frames,
        bit_depth: m.bit_depth,
        dims: (m.width, m.height),
        captured_mask: m.captured_mask,
        manifest_digest: Sha256::digest(&bytes).to_vec(),
    };
    Ok(SceneSequence::from_disk(info, ladder, store))
}

/// Raw bytes of a stored frame file, when the level was captured.
pub fn stored_frame_bytes(seq: &SceneSequence, t: usize, index: usize) -> Option<Result<Vec<u8>>> {
    let path = seq.disk_path(t, index)?;
    Some(fs::read(&path).map_err(|e| Error::io(&path, e)))
}
