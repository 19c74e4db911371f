//! Denoising solver checked against independent oracles: finite
//! differences of the leading objective entry, the closed-form fixed
//! point, and the contraction bound of the update map.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thg_core::builder::{laplacian, symmetrized_adjacency};
use thg_core::denoise::{
    fixed_point, gradient_leading, iterate, objective, DenoiseConfig,
};
use thg_core::synth::regular_hypergraph;
use thg_core::talg::{bcirc, SymTensor3};

fn random_signal(rng: &mut ChaCha8Rng, n: usize, ns: usize) -> SymTensor3 {
    SymTensor3::new(
        (0..ns)
            .map(|_| Array2::from_shape_fn((n, 1), |_| rng.random_range(-1.0..1.0)))
            .collect(),
        false,
    )
    .unwrap()
}

/// On a degree-regular hypergraph every Laplacian slice is symmetric,
/// so the leading objective entry is a true potential for the leading
/// gradient and finite differences must reproduce it.
#[test]
fn gradient_matches_finite_differences_on_regular_hypergraphs() {
    for seed in [0u64, 1, 2] {
        let g = regular_hypergraph(seed, 6, 3, 2).unwrap();
        let a_s = symmetrized_adjacency(&g).unwrap();
        let l = laplacian(&a_s).unwrap();
        // Sanity: the block-circulant image really is symmetric here.
        let bl = bcirc(&l);
        let asym = (&bl - &bl.t()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(asym <= 1e-12, "seed {seed}: bcirc(L) asymmetry {asym}");

        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let ns = a_s.n_slices();
        let x = random_signal(&mut rng, 6, ns);
        let mut y = random_signal(&mut rng, 6, ns);
        let b = 0.4;
        let grad = gradient_leading(&y, &x, &l, b).unwrap();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for k in 0..ns {
            for i in 0..6 {
                let orig = y.slice(k)[[i, 0]];
                y.slices_mut()[k][[i, 0]] = orig + h;
                let up = objective(&y, &x, &l, b).unwrap().0[0];
                y.slices_mut()[k][[i, 0]] = orig - h;
                let dn = objective(&y, &x, &l, b).unwrap().0[0];
                y.slices_mut()[k][[i, 0]] = orig;
                let fd = (up - dn) / (2.0 * h);
                worst = worst.max((fd - grad.slice(k)[[i, 0]]).abs());
            }
        }
        assert!(worst <= 1e-6, "seed {seed}: worst FD mismatch {worst}");
    }
}

/// Without degree regularity the Laplacian slices are asymmetric and
/// the leading entry is not a potential: finite differences then pick
/// up the symmetrized operator instead. Documented by construction.
#[test]
fn gradient_is_formal_on_irregular_hypergraphs() {
    let g = thg_core::hypergraph::Hypergraph::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
    let a_s = symmetrized_adjacency(&g).unwrap();
    let l = laplacian(&a_s).unwrap();
    let bl = bcirc(&l);
    let asym = (&bl - &bl.t()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(asym > 1e-3, "expected an asymmetric Laplacian, got {asym}");

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ns = a_s.n_slices();
    let x = random_signal(&mut rng, 3, ns);
    let mut y = random_signal(&mut rng, 3, ns);
    let b = 0.4;
    let grad = gradient_leading(&y, &x, &l, b).unwrap();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for k in 0..ns {
        for i in 0..3 {
            let orig = y.slice(k)[[i, 0]];
            y.slices_mut()[k][[i, 0]] = orig + h;
            let up = objective(&y, &x, &l, b).unwrap().0[0];
            y.slices_mut()[k][[i, 0]] = orig - h;
            let dn = objective(&y, &x, &l, b).unwrap().0[0];
            y.slices_mut()[k][[i, 0]] = orig;
            let fd = (up - dn) / (2.0 * h);
            worst = worst.max((fd - grad.slice(k)[[i, 0]]).abs());
        }
    }
    assert!(worst > 1e-4, "asymmetric case should disagree, worst {worst}");
}

#[test]
fn update_deltas_contract_at_the_predicted_rate() {
    let g = regular_hypergraph(3, 8, 4, 2).unwrap();
    let a_s = symmetrized_adjacency(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_signal(&mut rng, 8, a_s.n_slices());
    let cfg = DenoiseConfig::new(0.5, 0.2, 1);
    let bound = cfg.contraction_bound();
    assert!((bound - 0.4).abs() < 1e-12);

    let mut deltas = Vec::new();
    let mut prev = x.clone();
    for k in 1..=8 {
        let out =
            iterate(&x, &a_s, &DenoiseConfig { k, tol: f64::MIN_POSITIVE, ..cfg.clone() }).unwrap();
        deltas.push(out.signal.sub(&prev).unwrap().max_abs());
        prev = out.signal;
    }
    for pair in deltas.windows(2) {
        if pair[0] > 1e-13 {
            let rate = pair[1] / pair[0];
            assert!(rate <= bound + 0.05, "rate {rate} above bound {bound}");
        }
    }
}

#[test]
fn long_iteration_reaches_the_step_size_fixed_point() {
    let g = regular_hypergraph(11, 6, 3, 3).unwrap();
    let a_s = symmetrized_adjacency(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = random_signal(&mut rng, 6, a_s.n_slices());
    let cfg = DenoiseConfig { b: 0.5, c: 0.2, k: 200, tol: 1e-14, alpha: None };
    let out = iterate(&x, &a_s, &cfg).unwrap();
    let star = fixed_point(&x, &a_s, cfg.c).unwrap();
    assert!(out.signal.sub(&star).unwrap().max_abs() <= 1e-8);
}

#[test]
fn alpha_mode_is_bitwise_the_bc_parameterization() {
    let g = regular_hypergraph(2, 6, 3, 2).unwrap();
    let a_s = symmetrized_adjacency(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_signal(&mut rng, 6, a_s.n_slices());
    let alpha = 0.3;
    let via_alpha = iterate(&x, &a_s, &DenoiseConfig::from_alpha(alpha, 6).unwrap()).unwrap();
    let cfg = DenoiseConfig::new(alpha / 2.0, (1.0 - alpha) / alpha, 6);
    let via_bc = iterate(&x, &a_s, &cfg).unwrap();
    for (s1, s2) in via_alpha.signal.slices().iter().zip(via_bc.signal.slices().iter()) {
        assert_eq!(s1, s2);
    }
    assert_eq!(via_alpha.trace, via_bc.trace);
}

#[test]
fn denoising_moves_noisy_signal_toward_truth() {
    // Smooth ground truth (community indicator), additive noise: the
    // solver output must be closer to the truth than the input was.
    let g = regular_hypergraph(4, 6, 3, 3).unwrap();
    let a_s = symmetrized_adjacency(&g).unwrap();
    let ns = a_s.n_slices();
    let ones = SymTensor3::new(vec![Array2::from_elem((6, 1), 1.0); ns], false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let noise = random_signal(&mut rng, 6, ns);
    let x = ones.add(&noise.scale(0.3)).unwrap();
    let out = iterate(&x, &a_s, &DenoiseConfig::from_alpha(0.2, 30).unwrap()).unwrap();
    let err_before = x.sub(&ones).unwrap().max_abs();
    let err_after = out.signal.sub(&ones).unwrap().max_abs();
    assert!(
        err_after < err_before,
        "denoising did not help: {err_after} vs {err_before}"
    );
}
