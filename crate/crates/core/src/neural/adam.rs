use crate::error::{Error, Result};

use super::mlp::{Gradients, Mlp};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First/second moment accumulators for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    first: Gradients,
    second: Gradients,
    step: u64,
}

impl AdamState {
    pub fn new(net: &Mlp) -> Self {
        Self {
            first: Gradients::zeros_like(net),
            second: Gradients::zeros_like(net),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update. Rejects non-finite gradients without
/// touching `net` or `state`.
pub fn adam_step(net: &mut Mlp, grads: &Gradients, state: &mut AdamState, lr: f64) -> Result<()> {
    if !grads.matches(net) || !state.first.matches(net) {
        return Err(Error::invalid("gradient shapes do not match the network"));
    }
    if !grads.is_finite() {
        return Err(Error::Numeric("non-finite gradient".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - ADAM_BETA1.powi(t);
    let c2 = 1.0 - ADAM_BETA2.powi(t);
    for (((layer, g), m), v) in net
        .layers_mut()
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.first.layers)
        .zip(&mut state.second.layers)
    {
        update(
            layer.weights_mut(),
            &g.weights,
            &mut m.weights,
            &mut v.weights,
            lr,
            c1,
            c2,
        );
        update(layer.biases_mut(), &g.biases, &mut m.biases, &mut v.biases, lr, c1, c2);
    }
    Ok(())
}

fn update(params: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], lr: f64, c1: f64, c2: f64) {
    for (((p, &g), m), v) in params.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
    }
}
