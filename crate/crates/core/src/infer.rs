//! Overlapping sliding-window inference with class-probability summation.

use crate::error::{Error, Result};
use crate::math::Aabb;
use crate::network::{forward, softmax_rows, FpsStart, Model};
use crate::sampling::{extract_subvolume, sample_random, PointSet, SubVolumeSpec};
use rayon::prelude::*;

pub const DEFAULT_WINDOW: f64 = 1.5;
pub const DEFAULT_STRIDE: f64 = 0.45;
pub const DEFAULT_PAD: f64 = 0.5;

/// Per-vertex accumulated class-probability sums over all windows that
/// sampled the vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbabilityField {
    pub n: usize,
    pub num_classes: usize,
    pub sums: Vec<f64>,
    pub window_counts: Vec<u32>,
}

impl ClassProbabilityField {
    pub fn new(n: usize, num_classes: usize) -> Self {
        ClassProbabilityField {
            n,
            num_classes,
            sums: vec![0.0; n * num_classes],
            window_counts: vec![0; n],
        }
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.sums[v * self.num_classes..(v + 1) * self.num_classes]
    }
}

/// Window centers on a regular grid covering the padded scene footprint so
/// that every point lies in at least one window. Row-major order, x fastest.
/// A stride larger than the window is clamped to the window size (larger
/// strides would leave gaps between windows).
pub fn window_schedule(scene_bounds: &Aabb, window: f64, stride: f64, pad: f64) -> Vec<SubVolumeSpec> {
    assert!(window > 0.0 && stride > 0.0);
    let stride = stride.min(window);
    let lo_x = scene_bounds.min.x - pad;
    let hi_x = scene_bounds.max.x + pad;
    let lo_y = scene_bounds.min.y - pad;
    let hi_y = scene_bounds.max.y + pad;
    let count = |lo: f64, hi: f64| -> usize {
        let extent = hi - lo;
        if extent <= window {
            1
        } else {
            ((extent - window) / stride).ceil() as usize + 1
        }
    };
    let nx = count(lo_x, hi_x);
    let ny = count(lo_y, hi_y);
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            out.push(SubVolumeSpec::new(
                lo_x + window * 0.5 + ix as f64 * stride,
                lo_y + window * 0.5 + iy as f64 * stride,
                window,
                window,
            ));
        }
    }
    out
}

/// Stable per-window seed derived from the global seed and the window's
/// center coordinates, so results do not depend on schedule order.
pub fn window_seed(seed: u64, spec: &SubVolumeSpec) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for bits in [spec.center_x.to_bits(), spec.center_y.to_bits()] {
        h ^= bits;
        h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
        h ^= h >> 33;
    }
    h
}

/// Slide the model over the scene: for each window, sample a fixed-size
/// sub-volume point set, run a forward pass, softmax, and add each sampled
/// point's probability row into its source vertex (points sampled more
/// than once add once per occurrence).
///
/// Window forwards run in parallel; accumulation follows schedule order,
/// so the field is identical to the sequential reference.
type WindowOutput = Option<(Vec<usize>, crate::network::Matrix)>;

pub fn infer_scene(
    scene: &PointSet,
    scene_sample: &PointSet,
    model: &Model,
    schedule: &[SubVolumeSpec],
    seed: u64,
) -> Result<ClassProbabilityField> {
    let num_classes = model.config.num_classes;
    // Sums are indexed by source vertex id; the scene point set must cover
    // them (normally one point per mesh vertex, identity-indexed).
    if let Some(&max_src) = scene.source_indices.iter().max() {
        if max_src as usize >= scene.len() {
            return Err(Error::ShapeMismatch(format!(
                "scene source index {max_src} outside point count {}",
                scene.len()
            )));
        }
    }
    let mut field = ClassProbabilityField::new(scene.len(), num_classes);

    let per_window: Vec<Result<WindowOutput>> = schedule
        .par_iter()
        .map(|spec| {
            let inside = extract_subvolume(scene, spec);
            if inside.is_empty() {
                return Ok(None);
            }
            let wseed = window_seed(seed, spec);
            let sampled = sample_random(&inside, model.config.subvolume_points, wseed);
            let sub = scene.gather(&sampled);
            let scene_ref = model.config.use_global.then_some(scene_sample);
            let logits = forward(model, &sub, scene_ref, FpsStart::Seeded(wseed))?;
            let probs = softmax_rows(&logits);
            Ok(Some((sampled, probs)))
        })
        .collect();

    for result in per_window {
        let Some((sampled, probs)) = result? else { continue };
        for (row, &point_idx) in sampled.iter().enumerate() {
            let vertex = scene.source_indices[point_idx] as usize;
            let dst = &mut field.sums[vertex * num_classes..(vertex + 1) * num_classes];
            for (d, &p) in dst.iter_mut().zip(probs.row(row)) {
                *d += p;
            }
            field.window_counts[vertex] += 1;
        }
    }
    Ok(field)
}

/// Per-vertex argmax class (1-based labels; ties to the lowest class
/// index). Vertices never sampled by any window get the unannotated
/// sentinel 0.
pub fn argmax_labels(field: &ClassProbabilityField) -> Vec<u16> {
    (0..field.n)
        .map(|v| {
            if field.window_counts[v] == 0 {
                return 0;
            }
            let row = field.row(v);
            let mut best = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for (c, &x) in row.iter().enumerate() {
                if x > best_val {
                    best_val = x;
                    best = c;
                }
            }
            (best + 1) as u16
        })
        .collect()
}

/// Error when the schedule covers no points at all.
pub fn ensure_covered(field: &ClassProbabilityField) -> Result<()> {
    if field.window_counts.iter().all(|&c| c == 0) {
        return Err(Error::InvalidConfig("no window sampled any point".into()));
    }
    Ok(())
}
