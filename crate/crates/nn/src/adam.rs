use serde::{Deserialize, Serialize};

use crate::error::{check_shape, Result};
use crate::tensor::Tensor2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam with one moment pair per parameter tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub config: AdamConfig,
    pub m: Vec<Tensor2>,
    pub v: Vec<Tensor2>,
    pub t: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, params: &[&Tensor2]) -> Self {
        let zeros = || {
            params
                .iter()
                .map(|p| Tensor2::zeros(p.rows(), p.cols()))
                .collect::<Vec<_>>()
        };
        Self {
            config,
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    /// Applies one update. `params` and `grads` must match the shapes the
    /// optimizer was created with.
    pub fn step(&mut self, params: Vec<&mut Tensor2>, grads: &[Tensor2]) -> Result<()> {
        check_shape("Adam::step tensors", (self.m.len(), 1), (params.len(), 1))?;
        check_shape("Adam::step grads", (self.m.len(), 1), (grads.len(), 1))?;
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            check_shape("Adam::step param", m.shape(), p.shape())?;
            check_shape("Adam::step grad", m.shape(), g.shape())?;
        }
        self.t += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let bias1 = 1.0 - beta1.powi(self.t as i32);
        let bias2 = 1.0 - beta2.powi(self.t as i32);
        for (((p, g), m), v) in params
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for (((p, &g), m), v) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Plain gradient descent, `p -= lr * g`.
pub fn sgd_step(params: Vec<&mut Tensor2>, grads: &[Tensor2], lr: f64) -> Result<()> {
    check_shape("sgd_step", (params.len(), 1), (grads.len(), 1))?;
    for (p, g) in params.into_iter().zip(grads) {
        check_shape("sgd_step tensor", p.shape(), g.shape())?;
        for (p, g) in p.data_mut().iter_mut().zip(g.data()) {
            *p -= lr * g;
        }
    }
    Ok(())
}
