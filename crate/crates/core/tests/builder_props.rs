//! Properties of the adjacency and signal tensor builders on random
//! hypergraphs: exact row sums, relabeling equivariance, and the
//! higher-order information a clique expansion destroys.

use ndarray::Array2;
use proptest::prelude::*;
use thg_core::builder::{
    build_adjacency, build_adjacency_with_order, build_signal, symmetrize, symmetrized_adjacency,
};
use thg_core::hypergraph::Hypergraph;

fn hypergraph_strategy(max_order: usize) -> impl Strategy<Value = Hypergraph> {
    (3usize..=12).prop_flat_map(move |n| {
        let edge = proptest::collection::btree_set(0..n, 1..=max_order.min(n));
        proptest::collection::vec(edge, 1..=6).prop_map(move |edges| {
            Hypergraph::new(n, edges.into_iter().map(|e| e.into_iter().collect()).collect())
                .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn row_sums_are_exactly_one(g in hypergraph_strategy(4)) {
        let a = build_adjacency(&g).unwrap();
        prop_assert!(a.max_rowsum_deviation(&g) <= 1e-12);
    }

    #[test]
    fn row_sums_survive_order_lifting(g in hypergraph_strategy(3)) {
        let a = build_adjacency_with_order(&g, 4).unwrap();
        prop_assert!(a.max_rowsum_deviation(&g) <= 1e-12);
    }

    #[test]
    fn relabeling_permutes_entries(g in hypergraph_strategy(3), shift in 1usize..5) {
        // Relabel v -> (v + shift) mod n and compare entrywise.
        let n = g.num_nodes();
        let perm = |v: usize| (v + shift) % n;
        let relabeled = Hypergraph::new(
            n,
            g.hyperedges().iter().map(|e| e.iter().map(|&v| perm(v)).collect()).collect(),
        ).unwrap();
        let a = build_adjacency(&g).unwrap();
        let b = build_adjacency(&relabeled).unwrap();
        prop_assert_eq!(a.entries().len(), b.entries().len());
        for (idx, w) in a.entries() {
            let mapped: Vec<usize> = idx.iter().map(|&v| perm(v)).collect();
            let other = b.entries().get(&mapped).copied().unwrap_or(f64::NAN);
            prop_assert!((w - other).abs() <= 1e-12, "index {:?}", idx);
        }
    }

    #[test]
    fn symmetrized_slice_sum_is_pairwise_sum(g in hypergraph_strategy(3)) {
        let spec = build_adjacency(&g).unwrap();
        let sym = symmetrize(&spec.flatten_to_slices());
        let diff = &sym.slice_sum() - &spec.pairwise_sum();
        prop_assert!(diff.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn signal_slices_have_proportional_columns(
        values in proptest::collection::vec(-3.0f64..3.0, 4 * 2),
    ) {
        // Slice k of the order-3 signal tensor is the feature matrix with
        // column d scaled by x[k, d]; check the proportionality exactly.
        let x = Array2::from_shape_fn((4, 2), |(i, j)| values[i * 2 + j]);
        let s = build_signal(&x, 3).unwrap();
        for (k, slice) in s.slices().iter().enumerate() {
            for j in 0..2 {
                for i in 0..4 {
                    let expected = x[[i, j]] * x[[k, j]];
                    prop_assert!((slice[[i, j]] - expected).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn higher_order_structure_survives_the_tensor_but_not_the_clique() {
    // One 3-edge vs the three pairwise 2-edges: identical clique
    // expansions, different adjacency tensors at order 3.
    let g1 = Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
    let g2 = Hypergraph::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
    assert_eq!(g1.clique_expansion(), g2.clique_expansion());
    let a1 = symmetrized_adjacency(&g1).unwrap();
    let a2 = build_adjacency_with_order(&g2, 3).unwrap();
    let a2 = symmetrize(&a2.flatten_to_slices());
    let diff = a1.sub(&a2).unwrap().max_abs();
    assert!(diff > 0.1, "tensors should differ, max diff {diff}");
}

#[test]
fn lifted_pair_edges_fill_diagonal_slices() {
    // At order 3 a pair edge {u, v} must place weight on sequences like
    // (u, v, v); the flattened tensor then has mass outside slice u, v.
    let g = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
    let t = build_adjacency_with_order(&g, 3).unwrap().flatten_to_slices();
    assert!(t.slices()[0][[1, 0]] > 0.0);
    assert!(t.slices()[1][[0, 1]] > 0.0);
}
