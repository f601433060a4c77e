use super::{Gradients, Mlp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment accumulators, shaped like the model parameters.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub m: Gradients,
    pub v: Gradients,
    pub step: u64,
}

impl OptimizerState {
    pub fn new(model: &Mlp) -> Self {
        OptimizerState {
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
            step: 0,
        }
    }
}

/// Bias-corrected Adam update over flat slices. `step` is the already
/// incremented step counter (1 on the first update).
pub fn adam_update(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], step: u64, cfg: &AdamConfig) {
    let c1 = 1.0 - cfg.beta1.powi(step as i32);
    let c2 = 1.0 - cfg.beta2.powi(step as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

/// One Adam step over every weight and bias of `model`.
pub fn adam_step(state: &mut OptimizerState, model: &mut Mlp, grads: &Gradients, cfg: &AdamConfig) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::Training(format!(
            "non-finite gradient at optimizer step {}",
            state.step + 1
        )));
    }
    if grads.weights.len() != model.weights.len() {
        return Err(Error::dim("gradient layer count does not match model"));
    }
    state.step += 1;
    let step = state.step;
    for l in 0..model.weights.len() {
        let (Some(p), Some(g), Some(m), Some(v)) = (
            model.weights[l].as_slice_mut(),
            grads.weights[l].as_slice(),
            state.m.weights[l].as_slice_mut(),
            state.v.weights[l].as_slice_mut(),
        ) else {
            return Err(Error::dim("non-contiguous parameter storage"));
        };
        if p.len() != g.len() {
            return Err(Error::dim(format!("layer {l} gradient shape mismatch")));
        }
        adam_update(p, g, m, v, step, cfg);

        let (Some(p), Some(g), Some(m), Some(v)) = (
            model.biases[l].as_slice_mut(),
            grads.biases[l].as_slice(),
            state.m.biases[l].as_slice_mut(),
            state.v.biases[l].as_slice_mut(),
        ) else {
            return Err(Error::dim("non-contiguous parameter storage"));
        };
        if p.len() != g.len() {
            return Err(Error::dim(format!("layer {l} bias gradient shape mismatch")));
        }
        adam_update(p, g, m, v, step, cfg);
    }
    Ok(())
}
