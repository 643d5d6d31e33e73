//! Reverse-mode gradients for the full model.
//!
//! Sampling and grouping index selections are constants of the trace;
//! gradient flows through MLPs, group max-pooling (argmax member, ties to
//! the lowest index), fixed-weight interpolation, and concatenation.

use super::forward::ForwardTrace;
use super::layers::{affine_backward, feature_propagation_backward, set_abstraction_backward, Matrix};
use super::params::Gradients;
use super::{GlobalWiring, Model};

fn add_into(dst: &mut Matrix, src: &Matrix) {
    debug_assert_eq!(dst.rows, src.rows);
    debug_assert_eq!(dst.cols, src.cols);
    for (d, &s) in dst.data.iter_mut().zip(&src.data) {
        *d += s;
    }
}

/// Gradient of every parameter tensor given the gradient of the logits.
pub fn backward(model: &Model, trace: &ForwardTrace, grad_logits: &Matrix) -> Gradients {
    let config = &model.config;
    let mut grads = Gradients::zeros_like(&model.params);

    // Head: linear logits layer, then the ReLU hidden layer whose input is
    // the last decoder output.
    let head_input = trace.dec_traces[3].mlp_outputs.last().unwrap();
    let hidden = &trace.head_outputs[0];
    let logits = &trace.head_outputs[1];
    let g = affine_backward(
        hidden,
        logits,
        grad_logits,
        &model.head_mlps[1],
        &model.params,
        &mut grads,
        false,
    );
    let mut grad_decoder_out = affine_backward(
        head_input,
        hidden,
        &g,
        &model.head_mlps[0],
        &model.params,
        &mut grads,
        true,
    );

    // Per-stage feature gradients accumulated while walking the decoder.
    let mut sub_stage_grads: Vec<Matrix> = trace
        .sub_stages
        .iter()
        .map(|s| Matrix::zeros(s.features.rows, s.features.cols))
        .collect();
    let mut scene_stage_grads: Vec<Matrix> = trace
        .scene_stages
        .iter()
        .map(|s| Matrix::zeros(s.features.rows, s.features.cols))
        .collect();

    for level in (0..4).rev() {
        let support_len = if level == 0 {
            trace.sub_stages[3].positions.len()
        } else {
            trace.sub_stages[3 - level].positions.len()
        };
        let global_stage: Option<usize> = if config.use_global {
            match config.global_wiring {
                GlobalWiring::LevelMatched => Some(3 - level),
                GlobalWiring::FinalStageOnly if level == 0 => Some(3),
                GlobalWiring::FinalStageOnly => None,
            }
        } else {
            None
        };
        let out = feature_propagation_backward(
            &trace.dec_traces[level],
            grad_decoder_out,
            support_len,
            global_stage.map(|s| trace.scene_stages[s].positions.len()),
            &model.dec_mlps[level],
            &model.params,
            &mut grads,
        );
        if let (Some(s), Some(g)) = (global_stage, out.global) {
            add_into(&mut scene_stage_grads[s], &g);
        }
        // Skip connections: levels 0..2 read encoder stages 2..0; level 3
        // reads the raw input features, which are constants.
        if level < 3 {
            add_into(&mut sub_stage_grads[2 - level], &out.skip);
        }
        if level == 0 {
            add_into(&mut sub_stage_grads[3], &out.support);
            grad_decoder_out = Matrix::zeros(0, 0);
        } else {
            grad_decoder_out = out.support;
        }
    }

    // Sub-volume encoder, deepest stage first; each stage hands its input
    // gradient to the stage below.
    for s in (0..4).rev() {
        let (input_dim, input_len) = if s == 0 {
            (config.input_feature_dim, trace.input_len)
        } else {
            (
                trace.sub_stages[s - 1].features.cols,
                trace.sub_stages[s - 1].positions.len(),
            )
        };
        let grad_in = set_abstraction_backward(
            &trace.sub_stages[s],
            input_dim,
            input_len,
            &sub_stage_grads[s],
            &model.sub_mlps[s],
            &model.params,
            &mut grads,
        );
        if s > 0 {
            add_into(&mut sub_stage_grads[s - 1], &grad_in);
        }
    }

    if config.use_global {
        for s in (0..4).rev() {
            let (input_dim, input_len) = if s == 0 {
                (config.input_feature_dim, trace.scene_input_len)
            } else {
                (
                    trace.scene_stages[s - 1].features.cols,
                    trace.scene_stages[s - 1].positions.len(),
                )
            };
            let grad_in = set_abstraction_backward(
                &trace.scene_stages[s],
                input_dim,
                input_len,
                &scene_stage_grads[s],
                &model.scene_mlps[s],
                &model.params,
                &mut grads,
            );
            if s > 0 {
                add_into(&mut scene_stage_grads[s - 1], &grad_in);
            }
        }
    }

    grads
}
