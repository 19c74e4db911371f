//! Collapsed training engine for the slice-sum readout.
//!
//! The slice sum is a homomorphism of the t-product:
//! `slicesum(a * b) = slicesum(a) . slicesum(b)`. With the slice-sum
//! readout the whole tensor pipeline therefore collapses to matrices:
//! `logits = P . sum_k mlp(S_k)` where `P` is a polynomial in the
//! pairwise-summed adjacency and `S_k` ranges over the signal slices.
//! No symmetrized slice is materialized twice: the reflection doubles
//! every distinct data slice (halved by the symmetrization, so each
//! appears once at half scale with block weight 2) and the zero slice
//! contributes nothing because the layers are bias-free.

use crate::builder::{build_adjacency_with_order, build_signal};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::nn::{Activation, LinearWeights, ModelConfig, Readout, Variant};
use ndarray::linalg::general_mat_mul;
use ndarray::parallel::prelude::*;
use ndarray::{s, Array2, ArrayView2, Axis};

/// Row-chunk size for the parallel matrix products. Fixed (independent of
/// the thread count) so results are bitwise reproducible across runs.
const PAR_ROWS: usize = 4096;

/// `out = a . b`, parallelized over fixed row chunks of `a`. The output
/// buffer is reused when the shape already matches.
fn par_dot_into(a: ArrayView2<f64>, b: ArrayView2<f64>, out: &mut Array2<f64>) {
    let dim = (a.nrows(), b.ncols());
    if out.dim() != dim {
        *out = Array2::zeros(dim);
    }
    out.axis_chunks_iter_mut(Axis(0), PAR_ROWS)
        .into_par_iter()
        .zip(a.axis_chunks_iter(Axis(0), PAR_ROWS).into_par_iter())
        .for_each(|(mut o, ac)| general_mat_mul(1.0, &ac, &b, 0.0, &mut o));
}

/// `a^T . b` over a tall common dimension: partial products per fixed row
/// chunk in parallel, then summed in chunk order for reproducibility.
fn par_gram(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    if a.nrows() <= PAR_ROWS {
        return a.t().dot(&b);
    }
    let partials: Vec<Array2<f64>> = a
        .axis_chunks_iter(Axis(0), PAR_ROWS)
        .into_par_iter()
        .zip(b.axis_chunks_iter(Axis(0), PAR_ROWS).into_par_iter())
        .map(|(ac, bc)| ac.t().dot(&bc))
        .collect();
    let mut acc = Array2::zeros((a.ncols(), b.ncols()));
    for p in partials {
        acc += &p;
    }
    acc
}

pub struct CollapsedModel {
    prop: Array2<f64>,
    stacked: Array2<f64>,
    block_weight: f64,
    n_blocks: usize,
    n_nodes: usize,
}

/// Per-layer outputs kept for the reverse pass; the input of layer `i`
/// is `activations[i - 1]` (the stacked data for `i = 0`). Holding the
/// record across epochs reuses its buffers, which is where the bulk of
/// the per-epoch cost goes otherwise.
#[derive(Default)]
pub struct CollapsedRecord {
    activations: Vec<Array2<f64>>,
    dz: Vec<Array2<f64>>,
    pub logits: Array2<f64>,
}

impl CollapsedRecord {
    pub fn new() -> CollapsedRecord {
        CollapsedRecord::default()
    }
}

impl CollapsedModel {
    /// Build at the hypergraph's own order (at least 2).
    pub fn build(config: &ModelConfig, graph: &Hypergraph, features: &Array2<f64>) -> Result<Self> {
        Self::build_with_order(config, graph, features, graph.order().max(2))
    }

    pub fn build_with_order(
        config: &ModelConfig,
        graph: &Hypergraph,
        features: &Array2<f64>,
        m: usize,
    ) -> Result<Self> {
        config.validate()?;
        if config.variant.is_tensor() && config.readout != Readout::SliceSum {
            return Err(Error::InvalidConfig(
                "collapsed engine requires the slice-sum readout for tensor variants".into(),
            ));
        }
        let n = graph.num_nodes();
        if features.nrows() != n {
            return Err(Error::shape(
                "CollapsedModel::build",
                format!("{} feature rows for {n} nodes", features.nrows()),
            ));
        }
        match config.variant {
            Variant::Mlp => Ok(CollapsedModel {
                prop: Array2::eye(n),
                stacked: features.clone(),
                block_weight: 1.0,
                n_blocks: 1,
                n_nodes: n,
            }),
            Variant::CliqueMlp => Ok(CollapsedModel {
                prop: row_normalized_clique(graph),
                stacked: features.clone(),
                block_weight: 1.0,
                n_blocks: 1,
                n_nodes: n,
            }),
            Variant::THgcn | Variant::THgin => {
                let a_bar = build_adjacency_with_order(graph, m)?.pairwise_sum();
                let prop = match config.variant {
                    Variant::THgcn => a_bar,
                    _ => thgin_matrix(&a_bar, config.alpha, config.k),
                };
                let signal = build_signal(features, m)?;
                let n_blocks = signal.slices().len();
                let d = features.ncols();
                let mut stacked = Array2::zeros((n_blocks * n, d));
                for (b, slice) in signal.slices().iter().enumerate() {
                    stacked.slice_mut(s![b * n..(b + 1) * n, ..]).assign(&(slice * 0.5));
                }
                Ok(CollapsedModel { prop, stacked, block_weight: 2.0, n_blocks, n_nodes: n })
            }
        }
    }

    pub fn forward(
        &self,
        weights: &[LinearWeights],
        activation: Activation,
    ) -> Result<CollapsedRecord> {
        let mut record = CollapsedRecord::new();
        self.forward_into(weights, activation, &mut record)?;
        Ok(record)
    }

    /// Forward pass writing into a reusable record.
    pub fn forward_into(
        &self,
        weights: &[LinearWeights],
        activation: Activation,
        record: &mut CollapsedRecord,
    ) -> Result<()> {
        if weights.is_empty() {
            return Err(Error::InvalidConfig("forward needs at least one linear map".into()));
        }
        if weights[0].d_in() != self.stacked.ncols() {
            return Err(Error::shape(
                "CollapsedModel::forward",
                format!("first layer expects {} inputs, data has {}", weights[0].d_in(), self.stacked.ncols()),
            ));
        }
        let n_layers = weights.len();
        record.activations.resize_with(n_layers, || Array2::zeros((0, 0)));
        for (i, lw) in weights.iter().enumerate() {
            let (done, todo) = record.activations.split_at_mut(i);
            let input = if i == 0 { self.stacked.view() } else { done[i - 1].view() };
            par_dot_into(input, lw.w.view(), &mut todo[0]);
            if i + 1 < n_layers {
                todo[0].mapv_inplace(|z| activation.apply(z));
            }
        }
        let summed = self.sum_blocks(record.activations.last().expect("at least one layer"));
        record.logits = self.prop.dot(&summed);
        Ok(())
    }

    pub fn backward(
        &self,
        record: &mut CollapsedRecord,
        weights: &[LinearWeights],
        d_logits: &Array2<f64>,
    ) -> Result<Vec<Array2<f64>>> {
        let n_layers = weights.len();
        let n = self.n_nodes;
        let CollapsedRecord { activations, dz, .. } = record;
        dz.resize_with(n_layers, || Array2::zeros((0, 0)));
        let d_summed = self.prop.t().dot(d_logits) * self.block_weight;
        let last = &mut dz[n_layers - 1];
        if last.dim() != (self.n_blocks * n, d_summed.ncols()) {
            *last = Array2::zeros((self.n_blocks * n, d_summed.ncols()));
        }
        for b in 0..self.n_blocks {
            last.slice_mut(s![b * n..(b + 1) * n, ..]).assign(&d_summed);
        }
        let mut grads = vec![Array2::zeros((0, 0)); n_layers];
        for i in (0..n_layers).rev() {
            let (head, tail) = dz.split_at_mut(i);
            if i + 1 < n_layers {
                tail[0].zip_mut_with(&activations[i], |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                });
            }
            let input = if i == 0 { self.stacked.view() } else { activations[i - 1].view() };
            grads[i] = par_gram(input, tail[0].view());
            if i > 0 {
                par_dot_into(tail[0].view(), weights[i].w.t(), &mut head[i - 1]);
            }
        }
        Ok(grads)
    }

    fn sum_blocks(&self, stacked: &Array2<f64>) -> Array2<f64> {
        let n = self.n_nodes;
        let mut acc = Array2::zeros((n, stacked.ncols()));
        for b in 0..self.n_blocks {
            acc += &stacked.slice(s![b * n..(b + 1) * n, ..]);
        }
        acc * self.block_weight
    }
}

/// `M_K` with `M_0 = I`, `M_k = alpha I + (1 - alpha) A_bar . M_(k-1)`;
/// the matrix shadow of the iterative shifting under the slice sum.
fn thgin_matrix(a_bar: &Array2<f64>, alpha: f64, k: usize) -> Array2<f64> {
    let n = a_bar.nrows();
    let mut m = Array2::eye(n);
    for _ in 0..k {
        m = a_bar.dot(&m);
        if alpha != 0.0 {
            m = m * (1.0 - alpha) + Array2::<f64>::eye(n) * alpha;
        }
    }
    m
}

/// Row-normalized 0/1 clique expansion; isolated nodes keep zero rows.
fn row_normalized_clique(graph: &Hypergraph) -> Array2<f64> {
    let mut a = graph.clique_expansion();
    for mut row in a.rows_mut() {
        let s: f64 = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|v| v / s);
        }
    }
    a
}
