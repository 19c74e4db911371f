//! Seeded synthetic hypergraphs and datasets for tests, benchmarks,
//! and the demo subcommands.

use crate::error::{Error, Result};
use crate::hypergraph::{Dataset, Hypergraph};
use ndarray::Array2;
use rand::prelude::*;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Uniformly random hyperedges with cardinalities in `[min_size, max_size]`.
pub fn random_hypergraph(
    seed: u64,
    n: usize,
    n_edges: usize,
    min_size: usize,
    max_size: usize,
) -> Result<Hypergraph> {
    if min_size == 0 || min_size > max_size || max_size > n {
        return Err(Error::InvalidConfig(format!(
            "random_hypergraph: bad size range [{min_size}, {max_size}] for {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<usize> = (0..n).collect();
    let edges = (0..n_edges)
        .map(|_| {
            let size = rng.random_range(min_size..=max_size);
            nodes.shuffle(&mut rng);
            nodes[..size].to_vec()
        })
        .collect();
    Hypergraph::new(n, edges)
}

/// Degree-regular hypergraph: `reps` random permutations of the nodes,
/// each chunked into edges of `chunk` nodes, so every node has degree
/// exactly `reps`. Requires `chunk` to divide `n`.
pub fn regular_hypergraph(seed: u64, n: usize, chunk: usize, reps: usize) -> Result<Hypergraph> {
    if chunk == 0 || n % chunk != 0 {
        return Err(Error::InvalidConfig(format!(
            "regular_hypergraph: chunk {chunk} must divide {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<usize> = (0..n).collect();
    let mut edges = Vec::with_capacity(reps * n / chunk);
    for _ in 0..reps {
        nodes.shuffle(&mut rng);
        for c in nodes.chunks(chunk) {
            edges.push(c.to_vec());
        }
    }
    Hypergraph::new(n, edges)
}

#[derive(Debug, Clone)]
pub struct TwoCommunityConfig {
    pub nodes_per_community: usize,
    pub feature_dim: usize,
    pub edges_per_community: usize,
    pub min_edge: usize,
    pub max_edge: usize,
    /// Standard deviation of the Gaussian feature noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for TwoCommunityConfig {
    fn default() -> Self {
        TwoCommunityConfig {
            nodes_per_community: 30,
            feature_dim: 8,
            edges_per_community: 15,
            min_edge: 3,
            max_edge: 4,
            noise: 1.5,
            seed: 0,
        }
    }
}

/// Two-community benchmark: within-community hyperedges, noisy block
/// indicator features, balanced train/val/test split (half the nodes
/// train, a quarter each val and test).
pub fn two_community(seed: u64) -> Dataset {
    two_community_with(TwoCommunityConfig { seed, ..TwoCommunityConfig::default() })
        .expect("default two-community config is valid")
}

pub fn two_community_with(cfg: TwoCommunityConfig) -> Result<Dataset> {
    let h = cfg.nodes_per_community;
    let n = 2 * h;
    let d = cfg.feature_dim;
    if h < 4 || d < 2 {
        return Err(Error::InvalidConfig("two_community: too small".into()));
    }
    if cfg.min_edge == 0 || cfg.min_edge > cfg.max_edge || cfg.max_edge > h {
        return Err(Error::InvalidConfig("two_community: bad edge size range".into()));
    }
    if !(cfg.noise >= 0.0) {
        return Err(Error::InvalidConfig("two_community: noise must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut edges = Vec::with_capacity(2 * cfg.edges_per_community);
    for community in 0..2 {
        let mut members: Vec<usize> = (community * h..(community + 1) * h).collect();
        for _ in 0..cfg.edges_per_community {
            let size = rng.random_range(cfg.min_edge..=cfg.max_edge);
            members.shuffle(&mut rng);
            edges.push(members[..size].to_vec());
        }
    }
    let graph = Hypergraph::new(n, edges)?;

    // Block indicator means drowned in noise: per-node features are
    // nearly uninformative, the hyperedge structure is what separates.
    let normal = Normal::new(0.0, cfg.noise).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut features = Array2::zeros((n, d));
    for v in 0..n {
        let community = v / h;
        for j in 0..d {
            let mean = if (j < d / 2) == (community == 0) { 1.0 } else { 0.0 };
            features[[v, j]] = mean + normal.sample(&mut rng);
        }
    }

    let labels: Vec<Option<usize>> = (0..n).map(|v| Some(v / h)).collect();
    let mut train = vec![false; n];
    let mut val = vec![false; n];
    let mut test = vec![false; n];
    for community in 0..2 {
        let mut members: Vec<usize> = (community * h..(community + 1) * h).collect();
        members.shuffle(&mut rng);
        let n_train = h / 2;
        let n_val = (h - n_train) / 2 + (community % 2) * ((h - n_train) % 2);
        for (i, &v) in members.iter().enumerate() {
            if i < n_train {
                train[v] = true;
            } else if i < n_train + n_val {
                val[v] = true;
            } else {
                test[v] = true;
            }
        }
    }
    Dataset::new(graph, features, labels, train, val, test)
}
