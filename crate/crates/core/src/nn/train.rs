//! Full-batch training with Adam, early stopping on validation
//! accuracy, checkpoint/resume, and the K x alpha grid search.
//!
//! The engine is picked per configuration: tensor variants with the
//! slice-sum readout (and the matrix baselines) run on the collapsed
//! matrix form; the leading-slice readout needs the full tensor path.

use crate::builder::{symmetrized_adjacency, symmetrized_signal};
use crate::error::{Error, Result};
use crate::hypergraph::Dataset;
use crate::nn::fastpath::{CollapsedModel, CollapsedRecord};
use crate::nn::forward::{accuracy, backward, cross_entropy, forward_recorded, readout};
use crate::nn::{init_weights, Adam, Activation, LinearWeights, ModelConfig, Readout, TrainConfig};
use crate::talg::SymTensor3;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: Vec<LinearWeights>,
    pub best_weights: Vec<LinearWeights>,
    pub best_val_acc: f64,
    pub best_epoch: usize,
    pub test_acc: f64,
    pub metrics: Vec<EpochMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub train_acc: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub logits: Array2<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightDump {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl WeightDump {
    fn from_weights(w: &LinearWeights) -> WeightDump {
        WeightDump {
            rows: w.w.nrows(),
            cols: w.w.ncols(),
            data: w.w.iter().copied().collect(),
        }
    }

    fn to_weights(&self) -> Result<LinearWeights> {
        let w = Array2::from_shape_vec((self.rows, self.cols), self.data.clone())
            .map_err(|e| Error::shape("WeightDump::to_weights", e.to_string()))?;
        Ok(LinearWeights { w })
    }
}

pub fn dump_weights(weights: &[LinearWeights]) -> Vec<WeightDump> {
    weights.iter().map(WeightDump::from_weights).collect()
}

pub fn restore_weights(dumps: &[WeightDump]) -> Result<Vec<LinearWeights>> {
    dumps.iter().map(WeightDump::to_weights).collect()
}

/// Everything needed to resume a run and reproduce the remaining
/// epochs bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub epoch: usize,
    pub weights: Vec<WeightDump>,
    pub best_weights: Vec<WeightDump>,
    pub best_val_acc: f64,
    pub best_epoch: usize,
    pub epochs_since_best: usize,
    pub adam: Adam,
    pub metrics: Vec<EpochMetrics>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

enum Engine {
    // The record is kept across epochs so its large buffers are reused.
    Collapsed { model: CollapsedModel, record: CollapsedRecord },
    General { x_s: SymTensor3, a_s: SymTensor3, alpha: f64, k: usize },
}

impl Engine {
    fn build(dataset: &Dataset, config: &ModelConfig) -> Result<Engine> {
        if config.variant.is_tensor() && config.readout == Readout::LeadingSlice {
            let m = dataset.graph.order().max(2);
            let a_s = symmetrized_adjacency(&dataset.graph)?;
            let x_s = symmetrized_signal(&dataset.features, m)?;
            let (alpha, k) = match config.variant {
                crate::nn::Variant::THgcn => (0.0, 1),
                _ => (config.alpha, config.k),
            };
            Ok(Engine::General { x_s, a_s, alpha, k })
        } else {
            Ok(Engine::Collapsed {
                model: CollapsedModel::build(config, &dataset.graph, &dataset.features)?,
                record: CollapsedRecord::new(),
            })
        }
    }

    fn logits(&mut self, weights: &[LinearWeights], activation: Activation, ro: Readout) -> Result<Array2<f64>> {
        match self {
            Engine::Collapsed { model, record } => {
                model.forward_into(weights, activation, record)?;
                Ok(record.logits.clone())
            }
            Engine::General { x_s, a_s, alpha, k } => {
                let record = forward_recorded(x_s, a_s, weights, activation, *alpha, *k)?;
                Ok(readout(&record.output, ro))
            }
        }
    }

    fn step_gradients(
        &mut self,
        weights: &[LinearWeights],
        activation: Activation,
        ro: Readout,
        labels: &[Option<usize>],
        train_mask: &[bool],
    ) -> Result<(Array2<f64>, f64, Vec<Array2<f64>>)> {
        match self {
            Engine::Collapsed { model, record } => {
                model.forward_into(weights, activation, record)?;
                let (loss, d_logits) = cross_entropy(&record.logits, labels, train_mask)?;
                let logits = record.logits.clone();
                let grads = model.backward(record, weights, &d_logits)?;
                Ok((logits, loss, grads))
            }
            Engine::General { x_s, a_s, alpha, k } => {
                let record = forward_recorded(x_s, a_s, weights, activation, *alpha, *k)?;
                let logits = readout(&record.output, ro);
                let (loss, d_logits) = cross_entropy(&logits, labels, train_mask)?;
                let d_output = readout_adjoint(&record.output, ro, &d_logits)?;
                let grads = backward(&record, a_s, weights, &d_output)?;
                Ok((logits, loss, grads))
            }
        }
    }
}

fn readout_adjoint(output: &SymTensor3, ro: Readout, d_logits: &Array2<f64>) -> Result<SymTensor3> {
    let ns = output.n_slices();
    let mut d = SymTensor3::zeros(output.n_rows(), output.n_cols(), ns)?;
    match ro {
        Readout::SliceSum => {
            for s in d.slices_mut() {
                s.assign(d_logits);
            }
        }
        Readout::LeadingSlice => {
            if ns == 1 {
                d.slices_mut()[0].assign(d_logits);
            } else {
                d.slices_mut()[1].assign(&(d_logits * 2.0));
            }
        }
    }
    Ok(d)
}

fn check_dims(dataset: &Dataset, config: &ModelConfig) -> Result<()> {
    config.validate()?;
    let d_in = config.layer_dims[0];
    let d_out = *config.layer_dims.last().unwrap();
    if d_in != dataset.feature_dim() {
        return Err(Error::InvalidConfig(format!(
            "input dim {d_in} does not match {} features",
            dataset.feature_dim()
        )));
    }
    if d_out < dataset.num_classes() {
        return Err(Error::InvalidConfig(format!(
            "output dim {d_out} below {} classes",
            dataset.num_classes()
        )));
    }
    Ok(())
}

struct TrainState {
    weights: Vec<LinearWeights>,
    adam: Adam,
    epoch: usize,
    best_weights: Vec<LinearWeights>,
    best_val_acc: f64,
    best_epoch: usize,
    epochs_since_best: usize,
    metrics: Vec<EpochMetrics>,
}

fn run(
    dataset: &Dataset,
    model: &ModelConfig,
    train_cfg: &TrainConfig,
    state: TrainState,
    target_epochs: usize,
) -> Result<TrainOutcome> {
    run_keep_state(dataset, model, train_cfg, state, target_epochs).map(|(outcome, _)| outcome)
}

pub fn train(dataset: &Dataset, model: &ModelConfig, train_cfg: &TrainConfig) -> Result<TrainOutcome> {
    check_dims(dataset, model)?;
    train_cfg.validate()?;
    let weights = init_weights(model)?;
    let adam = Adam::new(train_cfg, &weights)?;
    let state = TrainState {
        best_weights: weights.clone(),
        weights,
        adam,
        epoch: 0,
        best_val_acc: f64::NEG_INFINITY,
        best_epoch: 0,
        epochs_since_best: 0,
        metrics: Vec::new(),
    };
    run(dataset, model, train_cfg, state, train_cfg.epochs)
}

/// Continue a checkpointed run up to `target_epochs` total epochs;
/// resuming reproduces an uninterrupted run bit-for-bit.
pub fn train_from_checkpoint(
    dataset: &Dataset,
    ckpt: &Checkpoint,
    target_epochs: usize,
) -> Result<TrainOutcome> {
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::InvalidConfig(format!("unsupported checkpoint version {}", ckpt.version)));
    }
    check_dims(dataset, &ckpt.model)?;
    let state = TrainState {
        weights: restore_weights(&ckpt.weights)?,
        adam: ckpt.adam.clone(),
        epoch: ckpt.epoch,
        best_weights: restore_weights(&ckpt.best_weights)?,
        best_val_acc: ckpt.best_val_acc,
        best_epoch: ckpt.best_epoch,
        epochs_since_best: ckpt.epochs_since_best,
        metrics: ckpt.metrics.clone(),
    };
    run(dataset, &ckpt.model, &ckpt.train, state, target_epochs)
}

/// Train for `epochs` and return the outcome together with a resumable
/// checkpoint capturing the optimizer state.
pub fn train_checkpointed(
    dataset: &Dataset,
    model: &ModelConfig,
    train_cfg: &TrainConfig,
    epochs: usize,
) -> Result<(TrainOutcome, Checkpoint)> {
    check_dims(dataset, model)?;
    train_cfg.validate()?;
    let weights = init_weights(model)?;
    let adam = Adam::new(train_cfg, &weights)?;
    let state = TrainState {
        best_weights: weights.clone(),
        weights,
        adam,
        epoch: 0,
        best_val_acc: f64::NEG_INFINITY,
        best_epoch: 0,
        epochs_since_best: 0,
        metrics: Vec::new(),
    };
    let (outcome, state) = run_keep_state(dataset, model, train_cfg, state, epochs)?;
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION,
        model: model.clone(),
        train: train_cfg.clone(),
        epoch: state.epoch,
        weights: dump_weights(&state.weights),
        best_weights: dump_weights(&state.best_weights),
        best_val_acc: state.best_val_acc,
        best_epoch: state.best_epoch,
        epochs_since_best: state.epochs_since_best,
        adam: state.adam,
        metrics: state.metrics,
    };
    Ok((outcome, ckpt))
}

fn run_keep_state(
    dataset: &Dataset,
    model: &ModelConfig,
    train_cfg: &TrainConfig,
    state: TrainState,
    target_epochs: usize,
) -> Result<(TrainOutcome, TrainState)> {
    // Mirror of `run` that hands the state back for checkpointing.
    let mut engine = Engine::build(dataset, model)?;
    let mut state = state;
    while state.epoch < target_epochs {
        let (logits, loss, grads) = engine.step_gradients(
            &state.weights,
            model.activation,
            model.readout,
            &dataset.labels,
            &dataset.train_mask,
        )?;
        let train_acc = accuracy(&logits, &dataset.labels, &dataset.train_mask);
        let val_acc = accuracy(&logits, &dataset.labels, &dataset.val_mask);
        state.metrics.push(EpochMetrics { epoch: state.epoch, train_loss: loss, train_acc, val_acc });
        if val_acc > state.best_val_acc {
            state.best_val_acc = val_acc;
            state.best_epoch = state.epoch;
            state.best_weights = state.weights.clone();
            state.epochs_since_best = 0;
        } else {
            state.epochs_since_best += 1;
        }
        state.adam.step(&mut state.weights, &grads)?;
        state.epoch += 1;
        if state.epochs_since_best >= train_cfg.patience {
            break;
        }
    }
    let best_logits = engine.logits(&state.best_weights, model.activation, model.readout)?;
    let test_acc = accuracy(&best_logits, &dataset.labels, &dataset.test_mask);
    let outcome = TrainOutcome {
        weights: state.weights.clone(),
        best_weights: state.best_weights.clone(),
        best_val_acc: state.best_val_acc,
        best_epoch: state.best_epoch,
        test_acc,
        metrics: state.metrics.clone(),
    };
    Ok((outcome, state))
}

/// Accuracy of given weights on all three splits.
pub fn evaluate(dataset: &Dataset, model: &ModelConfig, weights: &[LinearWeights]) -> Result<EvalReport> {
    check_dims(dataset, model)?;
    let mut engine = Engine::build(dataset, model)?;
    let logits = engine.logits(weights, model.activation, model.readout)?;
    Ok(EvalReport {
        train_acc: accuracy(&logits, &dataset.labels, &dataset.train_mask),
        val_acc: accuracy(&logits, &dataset.labels, &dataset.val_mask),
        test_acc: accuracy(&logits, &dataset.labels, &dataset.test_mask),
        logits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub k: usize,
    pub alpha: f64,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub n_runs: usize,
}

/// Test accuracy over the (K, alpha) grid, averaged over seeds.
pub fn grid_search(
    dataset: &Dataset,
    base: &ModelConfig,
    train_cfg: &TrainConfig,
    ks: &[usize],
    alphas: &[f64],
    seeds: &[u64],
) -> Result<Vec<GridRow>> {
    if ks.is_empty() || alphas.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidConfig("grid_search: empty grid axis".into()));
    }
    let mut rows = Vec::with_capacity(ks.len() * alphas.len());
    for &k in ks {
        for &alpha in alphas {
            let mut accs = Vec::with_capacity(seeds.len());
            for &seed in seeds {
                let mut cfg = base.clone();
                cfg.k = k;
                cfg.alpha = alpha;
                cfg.seed = seed;
                accs.push(train(dataset, &cfg, train_cfg)?.test_acc);
            }
            let n = accs.len();
            let mean = accs.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            log::info!("grid K={k} alpha={alpha}: mean {mean:.4} std {std:.4}");
            rows.push(GridRow { k, alpha, mean_acc: mean, std_acc: std, n_runs: n });
        }
    }
    Ok(rows)
}
