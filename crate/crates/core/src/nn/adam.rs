//! Adam with decoupled step counting and additive L2 weight decay
//! (decay is folded into the gradient before the moment updates).

use crate::error::{Error, Result};
use crate::nn::{LinearWeights, TrainConfig};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    lr: f64,
    weight_decay: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    shapes: Vec<(usize, usize)>,
}

impl Adam {
    pub fn new(config: &TrainConfig, weights: &[LinearWeights]) -> Result<Self> {
        config.validate()?;
        let shapes: Vec<_> = weights.iter().map(|lw| lw.w.dim()).collect();
        Ok(Adam {
            lr: config.lr,
            weight_decay: config.weight_decay,
            beta1: config.beta1,
            beta2: config.beta2,
            eps: config.eps,
            step: 0,
            m: shapes.iter().map(|&(r, c)| vec![0.0; r * c]).collect(),
            v: shapes.iter().map(|&(r, c)| vec![0.0; r * c]).collect(),
            shapes,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update over all weight matrices with their gradients.
    pub fn step(&mut self, weights: &mut [LinearWeights], grads: &[Array2<f64>]) -> Result<()> {
        if weights.len() != self.shapes.len() || grads.len() != self.shapes.len() {
            return Err(Error::shape("Adam::step", "weight/gradient count mismatch"));
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for (i, lw) in weights.iter_mut().enumerate() {
            if lw.w.dim() != self.shapes[i] || grads[i].dim() != self.shapes[i] {
                return Err(Error::shape("Adam::step", format!("layer {i} shape drift")));
            }
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            for ((j, w), g) in lw.w.iter_mut().enumerate().zip(grads[i].iter()) {
                let g = g + self.weight_decay * *w;
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                *w -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
