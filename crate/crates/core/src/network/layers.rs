//! Layer primitives: dense matrices, affine+ReLU MLPs, set abstraction and
//! feature propagation, each with a hand-written backward pass.

use super::params::{AffineRef, Gradients, ParamSet};
use super::LayerSpec;
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::sampling::{ball_query, farthest_point_sample, three_nn_weights, BallGroup, InterpWeights, PointSet};
use rayon::prelude::*;

/// Row-major dense f64 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            debug_assert_eq!(r.len(), cols);
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// y = x W^T + b, optionally followed by ReLU, applied per row.
/// Large inputs split across threads by row; outputs are identical to the
/// sequential evaluation since rows are independent.
pub fn affine_forward(x: &Matrix, affine: &AffineRef, params: &ParamSet, relu: bool) -> Matrix {
    debug_assert_eq!(x.cols, affine.in_dim);
    let w = &params.tensor(affine.weight).data;
    let b = &params.tensor(affine.bias).data;
    let mut out = Matrix::zeros(x.rows, affine.out_dim);
    let in_dim = affine.in_dim;
    let out_dim = affine.out_dim;
    let row_job = |xr: &[f64], or: &mut [f64]| {
        for o in 0..out_dim {
            let wrow = &w[o * in_dim..(o + 1) * in_dim];
            let mut acc = b[o];
            for (xi, wi) in xr.iter().zip(wrow) {
                acc += xi * wi;
            }
            or[o] = if relu { acc.max(0.0) } else { acc };
        }
    };
    if x.rows * in_dim * out_dim > 1 << 20 {
        out.data
            .par_chunks_mut(out_dim)
            .zip(x.data.par_chunks(in_dim))
            .for_each(|(or, xr)| row_job(xr, or));
    } else {
        for r in 0..x.rows {
            let xr = x.row(r);
            let or = &mut out.data[r * out_dim..(r + 1) * out_dim];
            row_job(xr, or);
        }
    }
    out
}

/// Backward through an affine (+ReLU) layer.
///
/// `output` is the forward result (post-activation), `input` its input.
/// Accumulates weight/bias gradients and returns the input gradient.
pub fn affine_backward(
    input: &Matrix,
    output: &Matrix,
    grad_output: &Matrix,
    affine: &AffineRef,
    params: &ParamSet,
    grads: &mut Gradients,
    relu: bool,
) -> Matrix {
    debug_assert_eq!(grad_output.cols, affine.out_dim);
    let w = &params.tensor(affine.weight).data;
    let mut grad_input = Matrix::zeros(input.rows, affine.in_dim);
    for r in 0..input.rows {
        let xr = input.row(r);
        let gr = grad_output.row(r);
        let yr = output.row(r);
        let gi = grad_input.row_mut(r);
        for o in 0..affine.out_dim {
            // ReLU kills the gradient where the activation clamped to zero.
            let g = if relu && yr[o] <= 0.0 { 0.0 } else { gr[o] };
            if g == 0.0 {
                continue;
            }
            grads.data[affine.bias][o] += g;
            let wrow = &w[o * affine.in_dim..(o + 1) * affine.in_dim];
            let gw = &mut grads.data[affine.weight][o * affine.in_dim..(o + 1) * affine.in_dim];
            for i in 0..affine.in_dim {
                gw[i] += g * xr[i];
                gi[i] += g * wrow[i];
            }
        }
    }
    grad_input
}

/// Forward through a chain of affine+ReLU layers, recording every
/// post-activation output (needed for backward).
pub fn mlp_chain_forward(
    input: &Matrix,
    mlps: &[AffineRef],
    params: &ParamSet,
) -> Vec<Matrix> {
    let mut outputs = Vec::with_capacity(mlps.len());
    let mut current = input;
    for affine in mlps {
        let out = affine_forward(current, affine, params, true);
        outputs.push(out);
        current = outputs.last().unwrap();
    }
    outputs
}

/// Backward through a chain recorded by [`mlp_chain_forward`].
pub fn mlp_chain_backward(
    input: &Matrix,
    outputs: &[Matrix],
    grad_last: Matrix,
    mlps: &[AffineRef],
    params: &ParamSet,
    grads: &mut Gradients,
) -> Matrix {
    let mut grad = grad_last;
    for j in (0..mlps.len()).rev() {
        let layer_input = if j == 0 { input } else { &outputs[j - 1] };
        grad = affine_backward(layer_input, &outputs[j], &grad, &mlps[j], params, grads, true);
    }
    grad
}

/// Per-group record of a set-abstraction layer (needed for backward).
#[derive(Debug, Clone)]
pub struct GroupTrace {
    pub member_input: Matrix,
    pub mlp_outputs: Vec<Matrix>,
    /// Argmax member row per output channel (ties to the lowest row).
    pub argmax: Vec<usize>,
}

/// Output of one set-abstraction layer.
#[derive(Debug, Clone)]
pub struct SetAbstraction {
    /// Indices of the sampled centers into the layer's input point list.
    pub center_indices: Vec<usize>,
    pub groups: Vec<BallGroup>,
    pub positions: Vec<Vec3>,
    pub features: Matrix,
    /// Per-group traces; `None` in inference mode.
    pub traces: Option<Vec<GroupTrace>>,
}

fn group_member_matrix(
    positions: &[Vec3],
    features: &Matrix,
    group: &BallGroup,
    center: Vec3,
) -> Matrix {
    let c_in = features.cols;
    let mut m = Matrix::zeros(group.indices.len(), 3 + c_in);
    for (row, &idx) in group.indices.iter().enumerate() {
        let local = positions[idx] - center;
        let dst = m.row_mut(row);
        dst[0] = local.x;
        dst[1] = local.y;
        dst[2] = local.z;
        dst[3..].copy_from_slice(features.row(idx));
    }
    m
}

/// Channelwise max over rows, recording the argmax row per channel
/// (ties to the lowest row index, for deterministic gradients).
fn max_pool(rows: &Matrix) -> (Vec<f64>, Vec<usize>) {
    let mut feature = vec![f64::NEG_INFINITY; rows.cols];
    let mut argmax = vec![0usize; rows.cols];
    for r in 0..rows.rows {
        let row = rows.row(r);
        for (c, &v) in row.iter().enumerate() {
            if v > feature[c] {
                feature[c] = v;
                argmax[c] = r;
            }
        }
    }
    (feature, argmax)
}

/// One set-abstraction layer: FPS centers, ball-query groups, shared MLPs
/// over (local xyz, member features), channelwise max per group.
pub fn set_abstraction(
    positions: &[Vec3],
    features: &Matrix,
    spec: &LayerSpec,
    mlps: &[AffineRef],
    params: &ParamSet,
    fps_start: usize,
    record: bool,
) -> Result<SetAbstraction> {
    if positions.is_empty() {
        return Err(Error::ShapeMismatch("set abstraction on empty input".into()));
    }
    if features.rows != positions.len() {
        return Err(Error::ShapeMismatch(format!(
            "feature rows {} != point count {}",
            features.rows,
            positions.len()
        )));
    }
    if mlps.first().map(|m| m.in_dim) != Some(3 + features.cols) {
        return Err(Error::ShapeMismatch(format!(
            "layer expects {} input channels, got {}",
            mlps.first().map_or(0, |m| m.in_dim),
            3 + features.cols
        )));
    }
    if fps_start >= positions.len() {
        return Err(Error::ShapeMismatch(format!(
            "FPS start {fps_start} outside {} points",
            positions.len()
        )));
    }
    let center_indices = farthest_point_sample(positions, spec.n_points, fps_start)?;
    let center_positions: Vec<Vec3> = center_indices.iter().map(|&i| positions[i]).collect();
    let groups = ball_query(positions, &center_positions, spec.radius, spec.group_size);

    let width = spec.output_width();
    // Groups are independent; evaluate them in parallel and assemble in
    // group order so the result matches sequential evaluation bitwise.
    let per_group: Vec<(Vec<f64>, Option<GroupTrace>)> = groups
        .par_iter()
        .enumerate()
        .map(|(g, group)| {
            let member_input = group_member_matrix(positions, features, group, center_positions[g]);
            let mlp_outputs = mlp_chain_forward(&member_input, mlps, params);
            let (feature, argmax) = max_pool(mlp_outputs.last().unwrap());
            let trace = record.then_some(GroupTrace { member_input, mlp_outputs, argmax });
            (feature, trace)
        })
        .collect();
    let mut out_features = Matrix::zeros(groups.len(), width);
    let mut traces = record.then(|| Vec::with_capacity(groups.len()));
    for (g, (feature, trace)) in per_group.into_iter().enumerate() {
        out_features.row_mut(g).copy_from_slice(&feature);
        if let (Some(ts), Some(t)) = (&mut traces, trace) {
            ts.push(t);
        }
    }
    Ok(SetAbstraction {
        center_indices,
        groups,
        positions: center_positions,
        features: out_features,
        traces,
    })
}

/// Backward through a set-abstraction layer. `grad_out` is the gradient of
/// the per-center features; returns the gradient of the layer's input
/// features (positions are constants).
pub fn set_abstraction_backward(
    sa: &SetAbstraction,
    input_feature_dim: usize,
    input_len: usize,
    grad_out: &Matrix,
    mlps: &[AffineRef],
    params: &ParamSet,
    grads: &mut Gradients,
) -> Matrix {
    let traces = sa.traces.as_ref().expect("backward requires a recorded forward");
    let mut grad_input = Matrix::zeros(input_len, input_feature_dim);
    for (g, trace) in traces.iter().enumerate() {
        let members = trace.member_input.rows;
        let width = grad_out.cols;
        // Route the pooled gradient to each channel's argmax member.
        let mut grad_last = Matrix::zeros(members, width);
        for (c, &g_c) in grad_out.row(g).iter().enumerate() {
            grad_last.row_mut(trace.argmax[c])[c] += g_c;
        }
        let grad_members = mlp_chain_backward(
            &trace.member_input,
            &trace.mlp_outputs,
            grad_last,
            mlps,
            params,
            grads,
        );
        // Columns 0..3 are local coordinates (constants); the rest flow
        // back to the input features of the member points.
        for (row, &idx) in sa.groups[g].indices.iter().enumerate() {
            let src = &grad_members.row(row)[3..];
            let dst = grad_input.row_mut(idx);
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
    grad_input
}

/// Inverse-distance interpolation of support features onto query points.
pub fn interpolate(
    weights: &[InterpWeights],
    support_features: &Matrix,
) -> Matrix {
    let mut out = Matrix::zeros(weights.len(), support_features.cols);
    for (q, w) in weights.iter().enumerate() {
        let dst = out.row_mut(q);
        for k in 0..3 {
            let src = support_features.row(w.indices[k]);
            let wk = w.weights[k];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += wk * s;
            }
        }
    }
    out
}

/// Backward of [`interpolate`]: distributes query gradients onto support
/// rows with the same fixed weights.
pub fn interpolate_backward(
    weights: &[InterpWeights],
    grad_query: &Matrix,
    support_len: usize,
) -> Matrix {
    let mut grad_support = Matrix::zeros(support_len, grad_query.cols);
    for (q, w) in weights.iter().enumerate() {
        let src = grad_query.row(q);
        for k in 0..3 {
            let dst = grad_support.row_mut(w.indices[k]);
            let wk = w.weights[k];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += wk * s;
            }
        }
    }
    grad_support
}

/// Record of one decoder level's forward pass.
#[derive(Debug, Clone)]
pub struct PropagationTrace {
    pub interp_prev: Vec<InterpWeights>,
    pub interp_global: Option<Vec<InterpWeights>>,
    pub concat: Matrix,
    pub mlp_outputs: Vec<Matrix>,
    /// Column ranges of (prev, global, skip) inside the concat.
    pub split: (usize, usize, usize),
}

/// One decoder level: interpolate previous-level features onto the query
/// points, optionally interpolate a global-encoder stage, concatenate the
/// skip features, then run the level MLPs.
#[allow(clippy::too_many_arguments)]
pub fn feature_propagation(
    query_positions: &[Vec3],
    support_positions: &[Vec3],
    support_features: &Matrix,
    global: Option<(&[Vec3], &Matrix)>,
    skip_features: &Matrix,
    mlps: &[AffineRef],
    params: &ParamSet,
    record: bool,
) -> Result<(Matrix, Option<PropagationTrace>)> {
    if support_positions.is_empty() {
        return Err(Error::ShapeMismatch("feature propagation without support points".into()));
    }
    if skip_features.rows != query_positions.len() {
        return Err(Error::ShapeMismatch(format!(
            "skip rows {} != query count {}",
            skip_features.rows,
            query_positions.len()
        )));
    }
    let interp_prev = three_nn_weights(query_positions, support_positions);
    let prev = interpolate(&interp_prev, support_features);
    let (interp_global, glob) = match global {
        Some((gpos, gfeat)) => {
            let w = three_nn_weights(query_positions, gpos);
            let f = interpolate(&w, gfeat);
            (Some(w), Some(f))
        }
        None => (None, None),
    };
    let glob_cols = glob.as_ref().map_or(0, |g| g.cols);
    let cols = prev.cols + glob_cols + skip_features.cols;
    let mut concat = Matrix::zeros(query_positions.len(), cols);
    for q in 0..query_positions.len() {
        let dst = concat.row_mut(q);
        dst[..prev.cols].copy_from_slice(prev.row(q));
        if let Some(g) = &glob {
            dst[prev.cols..prev.cols + glob_cols].copy_from_slice(g.row(q));
        }
        dst[prev.cols + glob_cols..].copy_from_slice(skip_features.row(q));
    }
    if mlps.first().map(|m| m.in_dim) != Some(cols) {
        return Err(Error::ShapeMismatch(format!(
            "decoder level expects {} channels, concat has {cols}",
            mlps.first().map_or(0, |m| m.in_dim)
        )));
    }
    let mlp_outputs = mlp_chain_forward(&concat, mlps, params);
    let out = mlp_outputs.last().unwrap().clone();
    let trace = record.then_some(PropagationTrace {
        interp_prev,
        interp_global,
        concat,
        mlp_outputs,
        split: (prev.cols, glob_cols, skip_features.cols),
    });
    Ok((out, trace))
}

/// Gradients produced by one decoder level's backward pass.
pub struct PropagationGrads {
    pub support: Matrix,
    pub global: Option<Matrix>,
    pub skip: Matrix,
}

pub fn feature_propagation_backward(
    trace: &PropagationTrace,
    grad_out: Matrix,
    support_len: usize,
    global_len: Option<usize>,
    mlps: &[AffineRef],
    params: &ParamSet,
    grads: &mut Gradients,
) -> PropagationGrads {
    let grad_concat = mlp_chain_backward(
        &trace.concat,
        &trace.mlp_outputs,
        grad_out,
        mlps,
        params,
        grads,
    );
    let (prev_cols, glob_cols, skip_cols) = trace.split;
    let rows = grad_concat.rows;
    let mut grad_prev = Matrix::zeros(rows, prev_cols);
    let mut grad_glob = Matrix::zeros(rows, glob_cols);
    let mut grad_skip = Matrix::zeros(rows, skip_cols);
    for q in 0..rows {
        let src = grad_concat.row(q);
        grad_prev.row_mut(q).copy_from_slice(&src[..prev_cols]);
        grad_glob
            .row_mut(q)
            .copy_from_slice(&src[prev_cols..prev_cols + glob_cols]);
        grad_skip.row_mut(q).copy_from_slice(&src[prev_cols + glob_cols..]);
    }
    let support = interpolate_backward(&trace.interp_prev, &grad_prev, support_len);
    let global = match (&trace.interp_global, global_len) {
        (Some(w), Some(len)) => Some(interpolate_backward(w, &grad_glob, len)),
        _ => None,
    };
    PropagationGrads { support, global, skip: grad_skip }
}

/// Helper: the feature matrix of a [`PointSet`].
pub fn features_matrix(set: &PointSet) -> Matrix {
    Matrix {
        rows: set.len(),
        cols: set.feature_dim,
        data: set.features.clone(),
    }
}
