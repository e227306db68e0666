use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Moment estimates for one parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub t: u64,
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(len: usize, cfg: &AdamConfig) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            t: 0,
            lr: T::of(cfg.lr),
            beta1: T::of(cfg.beta1),
            beta2: T::of(cfg.beta2),
            eps: T::of(cfg.eps),
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Clears moments and the step counter, keeping hyperparameters.
    pub fn reset(&mut self) {
        self.m.iter_mut().for_each(|x| *x = T::zero());
        self.v.iter_mut().for_each(|x| *x = T::zero());
        self.t = 0;
    }
}

/// Bias-corrected Adam update, in place.
pub fn adam_step<T: Scalar>(params: &mut [T], grad: &[T], state: &mut AdamState<T>) -> Result<()> {
    check_len("adam gradient", grad.len(), params.len())?;
    check_len("adam state", state.len(), params.len())?;
    state.t += 1;
    let one = T::one();
    let (b1, b2) = (state.beta1, state.beta2);
    let t = i32::try_from(state.t).unwrap_or(i32::MAX);
    let bc1 = one - b1.powi(t);
    let bc2_sqrt = (one - b2.powi(t)).sqrt();
    let step = state.lr / bc1;
    for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(state.m.iter_mut()).zip(state.v.iter_mut()) {
        *m = b1 * *m + (one - b1) * g;
        *v = b2 * *v + (one - b2) * g * g;
        *p -= step * *m / (v.sqrt() / bc2_sqrt + state.eps);
    }
    Ok(())
}
