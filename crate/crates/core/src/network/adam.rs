//! Adam optimizer with bias correction and the staircase learning-rate
//! schedule lr(t) = 0.001 * 0.9^floor(t / 2000).

use super::params::{Gradients, ParamSet};
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;
pub const BASE_LR: f64 = 0.001;
pub const DECAY_EVERY: u64 = 2000;
pub const DECAY_FACTOR: f64 = 0.9;

/// Learning rate at optimizer step `t` (0-based).
pub fn learning_rate(t: u64) -> f64 {
    BASE_LR * DECAY_FACTOR.powi((t / DECAY_EVERY) as i32)
}

/// First/second moment estimates, aligned with the parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    /// Number of completed steps.
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        let zeros: Vec<Vec<f64>> =
            params.tensors().iter().map(|t| vec![0.0; t.data.len()]).collect();
        AdamState { m: zeros.clone(), v: zeros, t: 0 }
    }

    /// One Adam update. Rejects non-finite gradients before touching any
    /// state.
    pub fn step(
        &mut self,
        params: &mut ParamSet,
        grads: &Gradients,
        lr: f64,
    ) -> Result<()> {
        if !grads.is_finite() {
            return Err(Error::NonFiniteGradient);
        }
        self.t += 1;
        let bias1 = 1.0 - BETA1.powi(self.t as i32);
        let bias2 = 1.0 - BETA2.powi(self.t as i32);
        for (idx, g_tensor) in grads.data.iter().enumerate() {
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            let data = &mut params.tensor_mut(idx).data;
            for (((p, &g), m_i), v_i) in data.iter_mut().zip(g_tensor).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m_i = BETA1 * *m_i + (1.0 - BETA1) * g;
                *v_i = BETA2 * *v_i + (1.0 - BETA2) * g * g;
                let m_hat = *m_i / bias1;
                let v_hat = *v_i / bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
            }
        }
        Ok(())
    }
}
