//! Adaptive-moment gradient descent, one instance per parameter group.

use std::collections::HashMap;

use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One pending parameter update: a named parameter and its gradient.
pub struct ParamUpdate<'a> {
    pub name: String,
    pub param: &'a mut Tensor,
    pub grad: &'a Tensor,
}

/// Optimizer state: first/second moment accumulators keyed by leaf name,
/// plus a strictly increasing step counter shared by the group.
pub struct Adam {
    cfg: AdamConfig,
    step: u64,
    moments: HashMap<String, (Vec<f64>, Vec<f64>)>,
}

impl Adam {
    pub fn new(cfg: AdamConfig) -> Self {
        Adam {
            cfg,
            step: 0,
            moments: HashMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn learning_rate(&self) -> f64 {
        self.cfg.lr
    }

    /// Apply one update to every entry. The whole group advances one step
    /// even if some gradients are zero.
    pub fn step(&mut self, updates: &mut [ParamUpdate<'_>]) -> Result<()> {
        self.step += 1;
        let t = self.step;
        let bc1 = 1.0 - self.cfg.beta1.powi(t as i32);
        let bc2 = 1.0 - self.cfg.beta2.powi(t as i32);

        for ParamUpdate { name, param, grad } in updates.iter_mut() {
            if !param.same_shape(grad) {
                return Err(Error::Shape(format!(
                    "adam: param {name} {:?} vs grad {:?}",
                    param.shape(),
                    grad.shape()
                )));
            }
            if grad.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::Train(format!(
                    "NaN gradient for leaf `{name}` at optimizer step {t}"
                )));
            }
            let (m, v) = self
                .moments
                .entry(name.to_string())
                .or_insert_with(|| (vec![0.0; param.len()], vec![0.0; param.len()]));
            if m.len() != param.len() {
                return Err(Error::Shape(format!(
                    "adam: moment size {} vs param {name} size {}",
                    m.len(),
                    param.len()
                )));
            }
            let lr = self.cfg.lr;
            let (b1, b2, eps) = (self.cfg.beta1, self.cfg.beta2, self.cfg.eps);
            for ((p, &g), (m, v)) in param
                .values_mut()
                .iter_mut()
                .zip(grad.values())
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let mhat = *m / bc1;
                let vhat = *v / bc2;
                *p -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
