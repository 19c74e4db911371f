//! Property tests for the t-algebra: the direct slice-convolution and
//! Fourier paths must agree, and the algebra must behave like its
//! block-circulant matrix image.

use ndarray::Array2;
use proptest::prelude::*;
use thg_core::talg::{
    bcirc, fold, identity_tensor, t_product, t_product_fft, t_solve, t_transpose, unfold,
    SymTensor3,
};

fn tensor_strategy(
    n_rows: usize,
    n_cols: usize,
    n_slices: usize,
) -> impl Strategy<Value = SymTensor3> {
    proptest::collection::vec(-10.0f64..10.0, n_rows * n_cols * n_slices).prop_map(
        move |values| {
            let slices = (0..n_slices)
                .map(|k| {
                    Array2::from_shape_fn((n_rows, n_cols), |(i, j)| {
                        values[k * n_rows * n_cols + i * n_cols + j]
                    })
                })
                .collect();
            SymTensor3::new(slices, false).unwrap()
        },
    )
}

fn shapes() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (1usize..=8, 1usize..=8, 1usize..=8, prop_oneof![Just(1usize), Just(3), Just(5), Just(17)])
}

fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_path_matches_direct_path(
        (n, c, p, ns) in shapes(),
        seed in 0u64..1_000_000,
    ) {
        let mut rng = {
            use rand::SeedableRng;
            rand_chacha::ChaCha8Rng::seed_from_u64(seed)
        };
        use rand::Rng;
        let mk = |rng: &mut rand_chacha::ChaCha8Rng, r: usize, cc: usize| {
            SymTensor3::new(
                (0..ns).map(|_| Array2::from_shape_fn((r, cc), |_| rng.random_range(-5.0..5.0))).collect(),
                false,
            ).unwrap()
        };
        let a = mk(&mut rng, n, c);
        let b = mk(&mut rng, c, p);
        let direct = t_product(&a, &b).unwrap();
        let fft = t_product_fft(&a, &b).unwrap();
        let scale = a.max_abs() * b.max_abs() * ns as f64;
        prop_assert!(direct.sub(&fft).unwrap().max_abs() <= 1e-10 * (1.0 + scale));
    }

    #[test]
    fn fold_inverts_unfold(t in tensor_strategy(3, 2, 5)) {
        let back = fold(&unfold(&t), 3, 5).unwrap();
        for (a, b) in back.slices().iter().zip(t.slices().iter()) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn bcirc_is_a_product_homomorphism(
        a in tensor_strategy(3, 3, 5),
        b in tensor_strategy(3, 3, 5),
    ) {
        let lhs = bcirc(&t_product(&a, &b).unwrap());
        let rhs = bcirc(&a).dot(&bcirc(&b));
        prop_assert!(max_abs(&(&lhs - &rhs)) <= 1e-10 * (1.0 + max_abs(&rhs)));
    }

    #[test]
    fn t_transpose_maps_to_matrix_transpose(t in tensor_strategy(3, 4, 5)) {
        let lhs = bcirc(&t_transpose(&t));
        let rhs = bcirc(&t).t().to_owned();
        prop_assert!(max_abs(&(&lhs - &rhs)) == 0.0);
    }

    #[test]
    fn product_distributes_over_addition(
        a in tensor_strategy(3, 3, 5),
        b in tensor_strategy(3, 2, 5),
        c in tensor_strategy(3, 2, 5),
    ) {
        let lhs = t_product(&a, &b.add(&c).unwrap()).unwrap();
        let rhs = t_product(&a, &b).unwrap().add(&t_product(&a, &c).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-9 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn identity_is_neutral(t in tensor_strategy(4, 2, 5)) {
        let i = identity_tensor(4, 5).unwrap();
        let y = t_product(&i, &t).unwrap();
        prop_assert!(y.sub(&t).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn solve_inverts_well_conditioned_products(
        x in tensor_strategy(3, 2, 5),
        a in tensor_strategy(3, 3, 5),
    ) {
        // Diagonal dominance keeps every frequency slice invertible.
        let mut op = a.scale(0.05);
        for (k, s) in op.slices_mut().iter_mut().enumerate() {
            if k == 0 {
                for i in 0..3 {
                    s[[i, i]] += 2.0;
                }
            }
        }
        let y = t_solve(&op, &x).unwrap();
        let residual = t_product(&op, &y).unwrap().sub(&x).unwrap().max_abs();
        prop_assert!(residual <= 1e-8 * (1.0 + x.max_abs()));
    }
}
