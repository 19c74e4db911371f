//! Shared helpers for the t-product benchmarks.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thg_core::talg::SymTensor3;

/// Dense random tensor with `ns` slices of shape `n x c`.
pub fn random_tensor(seed: u64, n: usize, c: usize, ns: usize) -> SymTensor3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymTensor3::new(
        (0..ns)
            .map(|_| Array2::from_shape_fn((n, c), |_| rng.random_range(-1.0..1.0)))
            .collect(),
        false,
    )
    .expect("odd slice count")
}
