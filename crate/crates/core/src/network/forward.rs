//! Full-model forward pass.

use super::layers::{
    feature_propagation, features_matrix, set_abstraction, Matrix, PropagationTrace,
    SetAbstraction,
};
use super::{GlobalWiring, Model};
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::sampling::PointSet;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// How the farthest-point-sampling start index is chosen per encoder layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FpsStart {
    /// Index 0 everywhere (deterministic reference used by tests).
    Zero,
    /// Seeded random start per layer, drawn in a fixed layer order.
    Seeded(u64),
    /// Explicit start for each branch's first layer; deeper layers use 0
    /// (their ordering is induced by geometry, not input order).
    Explicit { subvolume: usize, scene: usize },
}

struct StartPlan {
    rng: Option<ChaCha8Rng>,
    explicit_sub: usize,
    explicit_scene: usize,
    mode: FpsStart,
}

impl StartPlan {
    fn new(mode: FpsStart) -> Self {
        let rng = match mode {
            FpsStart::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let (explicit_sub, explicit_scene) = match mode {
            FpsStart::Explicit { subvolume, scene } => (subvolume, scene),
            _ => (0, 0),
        };
        StartPlan { rng, explicit_sub, explicit_scene, mode }
    }

    fn next(&mut self, branch_is_scene: bool, layer: usize, point_count: usize) -> usize {
        match self.mode {
            FpsStart::Zero => 0,
            FpsStart::Seeded(_) => self
                .rng
                .as_mut()
                .expect("seeded plan has rng")
                .random_range(0..point_count),
            FpsStart::Explicit { .. } => {
                if layer == 0 {
                    if branch_is_scene {
                        self.explicit_scene
                    } else {
                        self.explicit_sub
                    }
                } else {
                    0
                }
            }
        }
    }
}

/// Everything backward needs from a forward pass.
pub struct ForwardTrace {
    pub sub_stages: Vec<SetAbstraction>,
    pub scene_stages: Vec<SetAbstraction>,
    pub dec_traces: Vec<PropagationTrace>,
    pub head_outputs: Vec<Matrix>,
    pub input_len: usize,
    pub scene_input_len: usize,
}

fn encode_branch(
    model: &Model,
    is_scene: bool,
    points: &PointSet,
    plan: &mut StartPlan,
    record: bool,
) -> Result<Vec<SetAbstraction>> {
    let (layers, mlps) = if is_scene {
        (&model.config.scene_layers, &model.scene_mlps)
    } else {
        (&model.config.subvolume_layers, &model.sub_mlps)
    };
    let mut stages: Vec<SetAbstraction> = Vec::with_capacity(layers.len());
    let mut positions: &[Vec3] = &points.positions;
    let mut features = features_matrix(points);
    for (l, spec) in layers.iter().enumerate() {
        let start = plan.next(is_scene, l, positions.len());
        let stage = set_abstraction(positions, &features, spec, &mlps[l], &model.params, start, record)?;
        stages.push(stage);
        let last = stages.last().unwrap();
        positions = &last.positions;
        features = last.features.clone();
        // `features` is cloned so the stage keeps its own copy; stage
        // outputs are small compared to the group matrices.
    }
    Ok(stages)
}

fn forward_impl(
    model: &Model,
    subvolume: &PointSet,
    scene: Option<&PointSet>,
    fps: FpsStart,
    record: bool,
) -> Result<(Matrix, Option<ForwardTrace>)> {
    let config = &model.config;
    if subvolume.feature_dim != config.input_feature_dim {
        return Err(Error::ShapeMismatch(format!(
            "sub-volume feature dim {} != configured {}",
            subvolume.feature_dim, config.input_feature_dim
        )));
    }
    if config.use_global {
        let scene = scene.ok_or_else(|| {
            Error::InvalidConfig("model uses global context but no scene point set given".into())
        })?;
        if scene.feature_dim != config.input_feature_dim {
            return Err(Error::ShapeMismatch(format!(
                "scene feature dim {} != configured {}",
                scene.feature_dim, config.input_feature_dim
            )));
        }
    }

    let mut plan = StartPlan::new(fps);
    let sub_stages = encode_branch(model, false, subvolume, &mut plan, record)?;
    let scene_stages = if config.use_global {
        encode_branch(model, true, scene.unwrap(), &mut plan, record)?
    } else {
        Vec::new()
    };

    // Decoder: level 0 upsamples the deepest stage onto stage-3 points,
    // level 3 ends on the input points.
    let input_features = features_matrix(subvolume);
    let mut dec_traces = Vec::with_capacity(4);
    let mut prev_positions: &[Vec3] = &sub_stages[3].positions;
    let mut prev_features: Matrix = sub_stages[3].features.clone();
    let mut last_output = Matrix::zeros(0, 0);
    for level in 0..4 {
        let (query_positions, skip): (&[Vec3], &Matrix) = if level < 3 {
            (&sub_stages[2 - level].positions, &sub_stages[2 - level].features)
        } else {
            (&subvolume.positions, &input_features)
        };
        let global: Option<(&[Vec3], &Matrix)> = if config.use_global {
            match config.global_wiring {
                GlobalWiring::LevelMatched => {
                    let s = &scene_stages[3 - level];
                    Some((&s.positions, &s.features))
                }
                GlobalWiring::FinalStageOnly if level == 0 => {
                    let s = &scene_stages[3];
                    Some((&s.positions, &s.features))
                }
                GlobalWiring::FinalStageOnly => None,
            }
        } else {
            None
        };
        let (out, trace) = feature_propagation(
            query_positions,
            prev_positions,
            &prev_features,
            global,
            skip,
            &model.dec_mlps[level],
            &model.params,
            record,
        )?;
        if let Some(t) = trace {
            dec_traces.push(t);
        }
        prev_positions = query_positions;
        prev_features = out.clone();
        last_output = out;
    }

    // Classification head: affine+ReLU then a linear layer to logits.
    let hidden = super::layers::affine_forward(&last_output, &model.head_mlps[0], &model.params, true);
    let logits = super::layers::affine_forward(&hidden, &model.head_mlps[1], &model.params, false);

    let trace = record.then(|| ForwardTrace {
        sub_stages,
        scene_stages,
        dec_traces,
        head_outputs: vec![hidden, logits.clone()],
        input_len: subvolume.len(),
        scene_input_len: scene.map_or(0, |s| s.len()),
    });
    Ok((logits, trace))
}

/// Inference-only forward pass: returns per-point class logits
/// (rows follow the sub-volume point order).
pub fn forward(
    model: &Model,
    subvolume: &PointSet,
    scene: Option<&PointSet>,
    fps: FpsStart,
) -> Result<Matrix> {
    forward_impl(model, subvolume, scene, fps, false).map(|(logits, _)| logits)
}

/// Forward pass with full trace recording for backward.
pub fn forward_trace(
    model: &Model,
    subvolume: &PointSet,
    scene: Option<&PointSet>,
    fps: FpsStart,
) -> Result<(Matrix, ForwardTrace)> {
    let (logits, trace) = forward_impl(model, subvolume, scene, fps, true)?;
    Ok((logits, trace.expect("trace recorded")))
}
