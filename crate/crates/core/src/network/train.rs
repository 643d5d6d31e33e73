//! Desk-scale trainer: sample a sub-volume, rotate the scene for
//! augmentation, forward, weighted cross entropy, backward, Adam.

use super::adam::{learning_rate, AdamState};
use super::backward::backward;
use super::forward::{forward_trace, FpsStart};
use super::loss::weighted_cross_entropy_with_grad;
use super::Model;
use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};
use crate::sampling::{
    extract_subvolume, rotate_scene_z, sample_random, training_filter, PointSet, SubVolumeSpec,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// One training scene: the full point set plus its usable sub-volumes
/// (already filtered for annotation coverage, unsampled).
#[derive(Debug, Clone)]
pub struct TrainScene {
    pub scene: PointSet,
    pub subvolumes: Vec<PointSet>,
}

/// Extract candidate training sub-volumes from a scene on a jittered grid,
/// keeping those that pass the 70%-annotated filter.
pub fn build_training_scene(
    scene: PointSet,
    window: f64,
    candidates: usize,
    seed: u64,
) -> TrainScene {
    let bounds = Aabb::from_points(scene.positions.iter().copied());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subvolumes = Vec::new();
    for _ in 0..candidates {
        let cx = rng.random_range(bounds.min.x..=bounds.max.x);
        let cy = rng.random_range(bounds.min.y..=bounds.max.y);
        let spec = SubVolumeSpec::new(cx, cy, window, window);
        let indices = extract_subvolume(&scene, &spec);
        if indices.is_empty() {
            continue;
        }
        let labels: Vec<u16> = match &scene.labels {
            Some(ls) => indices.iter().map(|&i| ls[i]).collect(),
            None => continue,
        };
        if !training_filter(&labels) {
            continue;
        }
        subvolumes.push(scene.gather(&indices));
    }
    TrainScene { scene, subvolumes }
}

/// Inverse-frequency class weights normalized to mean 1 over the classes
/// present in the histogram; absent classes get weight 1.
pub fn compute_class_weights(label_sets: &[&[u16]], num_classes: usize) -> Vec<f64> {
    let mut counts = vec![0u64; num_classes];
    for labels in label_sets {
        for &l in *labels {
            if l != 0 && (l as usize) <= num_classes {
                counts[(l - 1) as usize] += 1;
            }
        }
    }
    let present: Vec<usize> = (0..num_classes).filter(|&c| counts[c] > 0).collect();
    if present.is_empty() {
        return vec![1.0; num_classes];
    }
    let raw: Vec<f64> = present.iter().map(|&c| 1.0 / counts[c] as f64).collect();
    let scale = present.len() as f64 / raw.iter().sum::<f64>();
    let mut weights = vec![1.0; num_classes];
    for (&c, &r) in present.iter().zip(&raw) {
        weights[c] = r * scale;
    }
    weights
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub steps: usize,
    pub seed: u64,
    /// Apply random z-rotation augmentation.
    pub augment: bool,
    /// Record a (step, loss) sample every this many steps.
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { steps: 500, seed: 0, augment: true, log_every: 10 }
    }
}

/// Loss curve of a completed run.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub losses: Vec<f64>,
    pub logged: Vec<(usize, f64)>,
}

/// Train the model in place. Deterministic given the seed (sequential
/// reference mode; batch size 1). Aborts with [`Error::Diverged`] when the
/// loss stops being finite.
pub fn train_toy(
    model: &mut Model,
    scenes: &[TrainScene],
    class_weights: &[f64],
    config: &TrainConfig,
) -> Result<TrainingRun> {
    let usable: Vec<&TrainScene> = scenes.iter().filter(|s| !s.subvolumes.is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::InvalidConfig("no training sub-volumes survive the filter".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(&model.params);
    let mut losses = Vec::with_capacity(config.steps);
    let mut logged = Vec::new();

    for step in 0..config.steps {
        let scene = usable[rng.random_range(0..usable.len())];
        let subvolume = &scene.subvolumes[rng.random_range(0..scene.subvolumes.len())];

        // Fixed-size point samples, fresh each step.
        let sub_idx: Vec<usize> = (0..subvolume.len()).collect();
        let sub_sample = sample_random(&sub_idx, model.config.subvolume_points, rng.random());
        let mut sub = subvolume.gather(&sub_sample);
        let scene_idx: Vec<usize> = (0..scene.scene.len()).collect();
        let scene_sample = sample_random(&scene_idx, model.config.scene_points, rng.random());
        let mut scn = scene.scene.gather(&scene_sample);

        if config.augment {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let center = Aabb::from_points(scene.scene.positions.iter().copied()).center();
            let center = Vec3::new(center.x, center.y, 0.0);
            sub = rotate_scene_z(&sub, angle, center);
            scn = rotate_scene_z(&scn, angle, center);
        }

        let labels = sub.labels.clone().ok_or(Error::NoSupervisedPoints)?;
        let fps = FpsStart::Seeded(rng.random());
        let scene_ref = model.config.use_global.then_some(&scn);
        let (logits, trace) = forward_trace(model, &sub, scene_ref, fps)?;
        let (loss, grad_logits) = weighted_cross_entropy_with_grad(&logits, &labels, class_weights)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { step, loss });
        }
        let grads = backward(model, &trace, &grad_logits);
        adam.step(&mut model.params, &grads, learning_rate(adam.t))?;

        losses.push(loss);
        if step % config.log_every == 0 {
            logged.push((step, loss));
        }
    }
    Ok(TrainingRun { losses, logged })
}
