//! Independent reference implementations used by integration and
//! acceptance tests. Nothing here calls into the library's own versions of
//! the same computation.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ae_sim::exposure::ExposureLadder;
use ae_sim::image::RawImage;
use ae_sim::scene::{bundled, synthesize_scene, SceneSequence};

/// Exact minimum barrier distance from the image boundary, 4-connected.
///
/// For every candidate lower bound `l` (each distinct intensity), restrict
/// the graph to pixels `>= l` and run a minimax Dijkstra from the boundary
/// pixels in that subgraph. The barrier of the best path with minimum `l`
/// is at most `minimax_l(x) - l`, and the optimum is attained when `l` is
/// that path's actual minimum.
pub fn exact_mbd(lum: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut levels: Vec<f64> = lum.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let on_border = |i: usize| {
        let (x, y) = (i % w, i / w);
        x == 0 || y == 0 || x + 1 == w || y + 1 == h
    };
    let mut best = vec![f64::INFINITY; lum.len()];
    // keys are compared through their bit pattern; all values are >= 0
    let key = |v: f64| Reverse(v.to_bits());
    for &l in &levels {
        let mut top = vec![f64::INFINITY; lum.len()];
        let mut heap = BinaryHeap::new();
        for i in 0..lum.len() {
            if on_border(i) && lum[i] >= l {
                top[i] = lum[i];
                heap.push((key(lum[i]), i));
            }
        }
        while let Some((Reverse(bits), i)) = heap.pop() {
            let d = f64::from_bits(bits);
            if d > top[i] {
                continue;
            }
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if lum[j] < l {
                    return;
                }
                let nd = d.max(lum[j]);
                if nd < top[j] {
                    top[j] = nd;
                    heap.push((key(nd), j));
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        for i in 0..lum.len() {
            if top[i].is_finite() {
                best[i] = best[i].min(top[i] - l);
            }
        }
    }
    for i in 0..lum.len() {
        if on_border(i) {
            best[i] = 0.0;
        }
    }
    best
}

/// Exponent `g` with `key^g = 1/2`, by bisection.
pub fn gamma_by_bisection(key: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if key.powf(mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Power-law encoding of every 14-bit sensor code.
pub struct ReferenceTone {
    gamma: f64,
    table: Vec<f64>,
}

const CODES: f64 = 16383.0;

impl ReferenceTone {
    pub fn new(gamma: f64) -> Self {
        let table = (0..=CODES as usize).map(|k| (255.0 * (k as f64 / CODES).powf(gamma)).round()).collect();
        Self { gamma, table }
    }

    fn encode(&self, v: f64) -> f64 {
        let k = (v * CODES).round();
        if (k / CODES - v).abs() < 1e-12 {
            self.table[k as usize]
        } else {
            (255.0 * v.powf(self.gamma)).round()
        }
    }

    /// Shannon entropy (bits) of the 8-bit luminance histogram of a RAW
    /// frame rendered through the tone curve.
    pub fn entropy(&self, frame: &RawImage) -> f64 {
        let px = frame.as_slice();
        let mut counts = [0u64; 256];
        for rgb in px.chunks_exact(3) {
            let s = self.encode(rgb[0]) + self.encode(rgb[1]) + self.encode(rgb[2]);
            counts[(s / 3.0).round() as usize] += 1;
        }
        let n = (px.len() / 3) as f64;
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum()
    }

    /// Exhaustive entropy search; first maximum wins.
    pub fn argmax(&self, frames: &[RawImage]) -> usize {
        let e: Vec<f64> = frames.iter().map(|f| self.entropy(f)).collect();
        let mut best = 0;
        for i in 1..e.len() {
            if e[i] > e[best] {
                best = i;
            }
        }
        best
    }
}

pub fn bundled_scene(n: usize, width: usize, height: usize, steps: usize) -> SceneSequence {
    let script = bundled::scene(n).unwrap().with_size(width, height).with_timesteps(steps);
    synthesize_scene(&script, &ExposureLadder::standard()).unwrap()
}

pub fn full_bundled_scene(n: usize) -> SceneSequence {
    synthesize_scene(&bundled::scene(n).unwrap(), &ExposureLadder::standard()).unwrap()
}

/// Intersection over union of two equally sized masks.
pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}
