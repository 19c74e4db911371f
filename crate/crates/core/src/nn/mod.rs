//! Trainable layers and the training loop: slice-shared signal
//! transformation, tensor shifting (one-hop and iterative
//! personalized-PageRank style), readout, loss, reverse-mode gradients,
//! Adam, and grid search.

mod adam;
mod fastpath;
mod forward;
mod train;

pub use adam::Adam;
pub use fastpath::{CollapsedModel, CollapsedRecord};
pub use forward::{
    accuracy, backward, cross_entropy, forward_recorded, lift_weights, loss, readout,
    thgcn_forward, thgin_forward, transform, ForwardRecord,
};
pub use train::{
    dump_weights, evaluate, grid_search, restore_weights, train, train_checkpointed,
    train_from_checkpoint, Checkpoint, EpochMetrics, EvalReport, GridRow, TrainOutcome,
    WeightDump, CHECKPOINT_VERSION,
};

use crate::error::{Error, Result};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A bias-free linear map shared across every frontal slice (the weight
/// tensor is nonzero only in its first frontal slice).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWeights {
    pub w: Array2<f64>,
}

impl LinearWeights {
    pub fn d_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn d_out(&self) -> usize {
        self.w.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Sum over all frontal slices; calibrated so that
    /// `readout(symmetrize(S)) = S`.
    SliceSum,
    /// Twice the first reflected data slice (slice index 1).
    LeadingSlice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    THgcn,
    THgin,
    /// Plain MLP on raw features; no propagation. Baseline.
    Mlp,
    /// MLP followed by row-normalized clique-expansion shifting. Baseline.
    CliqueMlp,
}

impl Variant {
    pub fn is_tensor(&self) -> bool {
        matches!(self, Variant::THgcn | Variant::THgin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Dimension chain: input D, hidden sizes, number of classes.
    pub layer_dims: Vec<usize>,
    pub variant: Variant,
    /// Teleport probability of the iterative shifting (T-HGIN only).
    pub alpha: f64,
    /// Propagation steps (T-HGIN only; T-HGCN is one hop).
    pub k: usize,
    pub activation: Activation,
    pub readout: Readout,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 2 {
            return Err(Error::InvalidConfig("layer_dims needs input and output dims".into()));
        }
        if self.layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig("layer dims must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha {} not in [0, 1]", self.alpha)));
        }
        if self.variant == Variant::THgin && self.k == 0 {
            return Err(Error::InvalidConfig("T-HGIN needs k >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    /// Early stop after this many epochs without validation improvement.
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.01,
            weight_decay: 0.0005,
            epochs: 200,
            patience: 200,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr < 0.0 || self.weight_decay < 0.0 {
            return Err(Error::InvalidConfig("lr and weight_decay must be nonnegative".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidConfig("adam betas must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Weight matrices drawn from the fan-based uniform scheme
/// `U(-s, s)`, `s = sqrt(6 / (d_in + d_out))`.
pub fn init_weights(config: &ModelConfig) -> Result<Vec<LinearWeights>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights = Vec::with_capacity(config.layer_dims.len() - 1);
    for pair in config.layer_dims.windows(2) {
        let (d_in, d_out) = (pair[0], pair[1]);
        let s = (6.0 / (d_in + d_out) as f64).sqrt();
        let w = Array2::from_shape_fn((d_in, d_out), |_| rng.random_range(-s..s));
        weights.push(LinearWeights { w });
    }
    Ok(weights)
}
