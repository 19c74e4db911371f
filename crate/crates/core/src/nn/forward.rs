//! General tensor-path forward/backward passes.
//!
//! These operate on full `SymTensor3` signals and are the reference
//! semantics for the layers; training on large slice counts goes through
//! the collapsed engine in `fastpath`, which is checked against this
//! path.

use crate::error::{Error, Result};
use crate::nn::{Activation, LinearWeights, Readout};
use crate::talg::{t_product_auto, t_transpose, SymTensor3};
use ndarray::Array2;

/// Apply the slice-shared MLP: every frontal slice is pushed through the
/// same chain of linear maps with the activation between them (final map
/// linear). Zero slices stay zero because there are no bias terms.
pub fn transform(
    x_s: &SymTensor3,
    weights: &[LinearWeights],
    activation: Activation,
) -> Result<SymTensor3> {
    if weights.is_empty() {
        return Err(Error::InvalidConfig("transform needs at least one linear map".into()));
    }
    check_chain(x_s.n_cols(), weights)?;
    let n_layers = weights.len();
    let slices = x_s
        .slices()
        .iter()
        .map(|slice| {
            let mut h = slice.clone();
            for (i, lw) in weights.iter().enumerate() {
                h = h.dot(&lw.w);
                if i + 1 < n_layers {
                    h.mapv_inplace(|z| activation.apply(z));
                }
            }
            h
        })
        .collect();
    let out = SymTensor3::new(slices, false)?;
    debug_assert!(
        !x_s.is_symmetrized() || out.slice(0).iter().all(|&v| v == 0.0),
        "transform must preserve the zero first slice"
    );
    Ok(out)
}

fn check_chain(d_in: usize, weights: &[LinearWeights]) -> Result<()> {
    let mut d = d_in;
    for (i, lw) in weights.iter().enumerate() {
        if lw.d_in() != d {
            return Err(Error::shape(
                "transform",
                format!("layer {i} expects {} inputs, got {d}", lw.d_in()),
            ));
        }
        d = lw.d_out();
    }
    Ok(())
}

/// One-hop layer: shifting of the transformed signal.
pub fn thgcn_forward(
    x_s: &SymTensor3,
    a_s: &SymTensor3,
    weights: &[LinearWeights],
    activation: Activation,
) -> Result<SymTensor3> {
    let transformed = transform(x_s, weights, activation)?;
    t_product_auto(a_s, &transformed)
}

/// Iterative layer: `Y(k) = alpha X' + (1 - alpha) A_s * Y(k-1)`,
/// `Y(0) = X'`, for `k = 1..=K`.
pub fn thgin_forward(
    x_s: &SymTensor3,
    a_s: &SymTensor3,
    weights: &[LinearWeights],
    activation: Activation,
    alpha: f64,
    k: usize,
) -> Result<SymTensor3> {
    if k == 0 {
        return Err(Error::InvalidConfig("thgin_forward needs k >= 1".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} not in [0, 1]")));
    }
    let transformed = transform(x_s, weights, activation)?;
    let mut y = transformed.clone();
    for _ in 0..k {
        y = shift_step(&transformed, a_s, &y, alpha)?;
    }
    Ok(y)
}

/// `alpha X' + (1 - alpha) A_s * Y`; alpha == 0 reduces to the bare
/// shift so that T-HGIN(alpha = 0, K = 1) is bitwise the T-HGCN.
fn shift_step(
    x_prime: &SymTensor3,
    a_s: &SymTensor3,
    y: &SymTensor3,
    alpha: f64,
) -> Result<SymTensor3> {
    let shifted = t_product_auto(a_s, y)?;
    if alpha == 0.0 {
        Ok(shifted)
    } else {
        x_prime.scale(alpha).add(&shifted.scale(1.0 - alpha))
    }
}

/// Project the tensor-valued layer output to per-node scores.
pub fn readout(y_s: &SymTensor3, mode: Readout) -> Array2<f64> {
    match mode {
        Readout::SliceSum => y_s.slice_sum(),
        Readout::LeadingSlice => {
            if y_s.n_slices() == 1 {
                y_s.slice(0).clone()
            } else {
                y_s.slice(1) * 2.0
            }
        }
    }
}

/// Softmax cross-entropy averaged over masked nodes.
pub fn loss(logits: &Array2<f64>, labels: &[Option<usize>], mask: &[bool]) -> Result<f64> {
    Ok(cross_entropy(logits, labels, mask)?.0)
}

/// Loss plus its gradient with respect to the logits.
pub fn cross_entropy(
    logits: &Array2<f64>,
    labels: &[Option<usize>],
    mask: &[bool],
) -> Result<(f64, Array2<f64>)> {
    let (n, c) = logits.dim();
    if labels.len() != n || mask.len() != n {
        return Err(Error::shape("cross_entropy", "labels/mask length mismatch"));
    }
    let count = mask.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(Error::InvalidConfig("cross_entropy: empty mask".into()));
    }
    let inv = 1.0 / count as f64;
    let mut total = 0.0;
    let mut grad = Array2::zeros((n, c));
    for v in 0..n {
        if !mask[v] {
            continue;
        }
        let label = labels[v].ok_or_else(|| {
            Error::InvalidConfig(format!("cross_entropy: masked node {v} has no label"))
        })?;
        if label >= c {
            return Err(Error::InvalidConfig(format!(
                "cross_entropy: label {label} out of range for {c} classes"
            )));
        }
        let row = logits.row(v);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = row.iter().map(|z| (z - max).exp()).sum();
        total += inv * (denom.ln() - (row[label] - max));
        for j in 0..c {
            let p = (row[j] - max).exp() / denom;
            grad[[v, j]] = inv * (p - if j == label { 1.0 } else { 0.0 });
        }
    }
    if !total.is_finite() {
        return Err(Error::Internal("non-finite loss".into()));
    }
    Ok((total, grad))
}

/// Per-node argmax accuracy over a mask.
pub fn accuracy(logits: &Array2<f64>, labels: &[Option<usize>], mask: &[bool]) -> f64 {
    let mut hit = 0usize;
    let mut count = 0usize;
    for v in 0..logits.nrows() {
        if !mask[v] {
            continue;
        }
        let Some(label) = labels[v] else { continue };
        let row = logits.row(v);
        let pred = (0..row.len())
            .max_by(|&a, &b| row[a].total_cmp(&row[b]))
            .unwrap_or(0);
        count += 1;
        hit += (pred == label) as usize;
    }
    if count == 0 {
        0.0
    } else {
        hit as f64 / count as f64
    }
}

/// Everything the reverse pass needs: per-layer slice inputs of the
/// transform chain, the transformed signal, and the layer output.
pub struct ForwardRecord {
    /// layer_inputs[i][k]: input of linear map i at slice k;
    /// layer_inputs[L] is the transformed output (post final linear).
    layer_inputs: Vec<Vec<Array2<f64>>>,
    alpha: f64,
    k: usize,
    pub output: SymTensor3,
}

/// Tensor-path forward with the computation record kept for [`backward`].
pub fn forward_recorded(
    x_s: &SymTensor3,
    a_s: &SymTensor3,
    weights: &[LinearWeights],
    activation: Activation,
    alpha: f64,
    k: usize,
) -> Result<ForwardRecord> {
    check_chain(x_s.n_cols(), weights)?;
    let n_layers = weights.len();
    let mut layer_inputs: Vec<Vec<Array2<f64>>> = vec![Vec::with_capacity(x_s.n_slices()); n_layers + 1];
    for slice in x_s.slices() {
        let mut h = slice.clone();
        for (i, lw) in weights.iter().enumerate() {
            layer_inputs[i].push(h.clone());
            h = h.dot(&lw.w);
            if i + 1 < n_layers {
                h.mapv_inplace(|z| activation.apply(z));
            }
        }
        layer_inputs[n_layers].push(h);
    }
    let transformed = SymTensor3::new(layer_inputs[n_layers].clone(), false)?;
    let mut y = transformed.clone();
    for _ in 0..k {
        y = shift_step(&transformed, a_s, &y, alpha)?;
    }
    Ok(ForwardRecord { layer_inputs, alpha, k, output: y })
}

/// Reverse-mode pass: gradient of a scalar loss with upstream
/// `d_output` through the recorded computation, yielding per-layer
/// weight gradients.
pub fn backward(
    record: &ForwardRecord,
    a_s: &SymTensor3,
    weights: &[LinearWeights],
    d_output: &SymTensor3,
) -> Result<Vec<Array2<f64>>> {
    let a_t = t_transpose(a_s);
    // Through the propagation recurrence, unrolled.
    let mut d_y = d_output.clone();
    let mut d_transformed: Option<SymTensor3> = None;
    for _ in 0..record.k {
        if record.alpha != 0.0 {
            let skip = d_y.scale(record.alpha);
            d_transformed = Some(match d_transformed {
                Some(acc) => acc.add(&skip)?,
                None => skip,
            });
            d_y = t_product_auto(&a_t, &d_y.scale(1.0 - record.alpha))?;
        } else {
            d_y = t_product_auto(&a_t, &d_y)?;
        }
    }
    let d_transformed = match d_transformed {
        Some(acc) => acc.add(&d_y)?,
        None => d_y,
    };

    // Through the slice-shared chain.
    let n_layers = weights.len();
    let mut grads: Vec<Array2<f64>> = weights
        .iter()
        .map(|lw| Array2::zeros(lw.w.dim()))
        .collect();
    for (k, d_out_slice) in d_transformed.slices().iter().enumerate() {
        let mut dz = d_out_slice.clone();
        for i in (0..n_layers).rev() {
            // For non-final layers the activation sits between the linear
            // map and the next input; mask by the activated output.
            if i + 1 < n_layers {
                let activated = &record.layer_inputs[i + 1][k];
                dz.zip_mut_with(activated, |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                });
            }
            grads[i] += &record.layer_inputs[i][k].t().dot(&dz);
            if i > 0 {
                dz = dz.dot(&weights[i].w.t());
            }
        }
    }
    Ok(grads)
}

/// Embed a slice-shared matrix into the first frontal slice of a weight
/// tensor, for checking that `transform` is a t-product in disguise.
pub fn lift_weights(w: &Array2<f64>, n_slices: usize) -> Result<SymTensor3> {
    let mut slices = vec![Array2::zeros(w.dim()); n_slices];
    slices[0] = w.clone();
    SymTensor3::new(slices, false)
}
