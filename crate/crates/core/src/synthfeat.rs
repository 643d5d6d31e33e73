//! Synthetic per-pixel features: class evidence by construction.
//!
//! Stands in for a learned 2D feature extractor. Each hit pixel carries a
//! one-hot encoding of the hit triangle's majority vertex class, the
//! barycentrically interpolated vertex color, zero padding to the target
//! width, and optional Gaussian noise. Miss pixels are all-zero.

use crate::backproject::FeatureImage;
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::raycast::AssociationMap;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Majority label of a face's three vertices; ties resolve to the smallest
/// label. Returns 0 when the mesh is unlabeled.
pub fn face_majority_label(mesh: &Mesh, triangle: usize) -> u16 {
    let Some(labels) = &mesh.labels else { return 0 };
    let face = mesh.faces[triangle];
    let mut ls = [
        labels[face[0] as usize],
        labels[face[1] as usize],
        labels[face[2] as usize],
    ];
    ls.sort_unstable();
    // With three values sorted, the middle one is a majority element if any
    // value repeats; otherwise all differ and the smallest wins.
    if ls[0] == ls[1] || ls[1] == ls[2] {
        ls[1]
    } else {
        ls[0]
    }
}

/// Build a feature image for one rendered view.
///
/// Channels: [0, num_classes) one-hot class evidence, then 3 RGB channels
/// in [0, 1], then zero padding to `dim`; Gaussian noise with `noise_sigma`
/// is added to every channel of hit pixels.
pub fn synth_features(
    mesh: &Mesh,
    assoc: &AssociationMap,
    dim: usize,
    num_classes: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<FeatureImage> {
    if dim < num_classes + 3 {
        return Err(Error::InvalidConfig(format!(
            "feature dim {dim} < num_classes + 3 = {}",
            num_classes + 3
        )));
    }
    let mut feat = FeatureImage::zeros(assoc.height(), assoc.width(), dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = if noise_sigma > 0.0 {
        Some(Normal::new(0.0, noise_sigma).map_err(|_| {
            Error::InvalidConfig(format!("invalid noise sigma {noise_sigma}"))
        })?)
    } else {
        None
    };

    for (row, col, hit) in assoc.hits() {
        let pixel = feat.pixel_mut(row, col);
        let label = face_majority_label(mesh, hit.triangle as usize);
        if label != 0 && (label as usize) <= num_classes {
            pixel[(label - 1) as usize] = 1.0;
        }
        if let Some(colors) = &mesh.colors {
            let face = mesh.faces[hit.triangle as usize];
            let w = [hit.weights.w1, hit.weights.w2, hit.weights.w3];
            for channel in 0..3 {
                let mut value = 0.0;
                for (&vertex, &weight) in face.iter().zip(&w) {
                    value += weight * colors[vertex as usize][channel] as f64 / 255.0;
                }
                pixel[num_classes + channel] = value as f32;
            }
        }
        if let Some(n) = &normal {
            for v in pixel.iter_mut() {
                *v += n.sample(&mut rng) as f32;
            }
        }
    }
    Ok(feat)
}
