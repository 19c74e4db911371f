//! Construction of the normalized adjacency tensor, the hypergraph
//! signal tensor, their symmetrized forms, and the Laplacian tensor.
//!
//! For a hyperedge of cardinality `c` in an order-`M` hypergraph, every
//! length-`M` index sequence over the edge's nodes in which each node
//! appears at least once receives weight `(1/d(p1)) * c / alpha(c, M)`.
//! Entries from distinct hyperedges landing on the same index tuple add,
//! which is what keeps the per-node row sums exactly 1.

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::talg::{identity_tensor, SymTensor3, Tensor3};
use ndarray::Array2;
use std::collections::BTreeMap;

/// Unsymmetrized M-order sparse adjacency tensor.
///
/// Keys are full index tuples `(p1, ..., pM)`, kept sorted for
/// deterministic iteration; rows of isolated nodes are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencySpec {
    order: usize,
    dim: usize,
    entries: BTreeMap<Vec<usize>, f64>,
}

impl AdjacencySpec {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.entries
    }

    /// Per-node sum over all trailing indices; 1 for every non-isolated
    /// node, 0 for isolated ones.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim];
        for (idx, w) in &self.entries {
            sums[idx[0]] += w;
        }
        sums
    }

    /// Largest deviation of a non-isolated node's row sum from 1.
    pub fn max_rowsum_deviation(&self, graph: &Hypergraph) -> f64 {
        let degrees = graph.degrees();
        self.row_sums()
            .iter()
            .enumerate()
            .filter(|(v, _)| degrees.0[*v] > 0)
            .map(|(_, s)| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Sum of every slice of the flattened tensor: `S[p1, p2] = sum over
    /// p3..pM of a`. Cheap and exact from the sparse entries.
    pub fn pairwise_sum(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for (idx, w) in &self.entries {
            m[[idx[0], idx[1]]] += w;
        }
        m
    }

    /// Flatten the trailing `M-2` indices into `N^(M-2)` frontal slices
    /// (row-major), producing the third-order operand of the t-algebra.
    pub fn flatten_to_slices(&self) -> Tensor3 {
        let n = self.dim;
        let n_slices = n.pow((self.order - 2) as u32);
        let mut t = Tensor3::zeros(n, n, n_slices);
        for (idx, w) in &self.entries {
            let slice = flat_index(&idx[2..], n);
            t.slices_mut()[slice][[idx[0], idx[1]]] += w;
        }
        t
    }
}

/// Dense hypergraph signal tensor of shape `N x D x N^(M-2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    dim: usize,
    feature_dim: usize,
    order: usize,
    slices: Vec<Array2<f64>>,
}

impl SignalSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn slices(&self) -> &[Array2<f64>] {
        &self.slices
    }

    pub fn flatten_to_slices(&self) -> Tensor3 {
        Tensor3::new(self.slices.clone()).expect("signal slices are uniform by construction")
    }
}

/// Row-major flattening of a multi-index with digits in `[0, n)`.
pub fn flat_index(digits: &[usize], n: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * n + d)
}

/// Inverse of [`flat_index`] for `len` digits.
pub fn unflatten_index(mut flat: usize, n: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut().rev() {
        *d = flat % n;
        flat /= n;
    }
    digits
}

/// Sum of multinomial coefficients `M! / (r_1! ... r_c!)` over all
/// compositions of `M` into `c` positive parts; equivalently the number
/// of length-`M` sequences over `c` symbols that use every symbol.
pub fn multinomial_alpha(c: usize, m: usize) -> Result<u64> {
    if c == 0 || c > m {
        return Err(Error::InvalidConfig(format!(
            "multinomial_alpha: need 1 <= c <= M, got c={c}, M={m}"
        )));
    }
    fn factorial(n: usize) -> u64 {
        (1..=n as u64).product()
    }
    // Enumerate compositions recursively.
    fn go(remaining_parts: usize, remaining_total: usize, m_fact: u64, denom: u64) -> u64 {
        if remaining_parts == 1 {
            return m_fact / (denom * factorial(remaining_total));
        }
        let max_here = remaining_total - (remaining_parts - 1);
        (1..=max_here)
            .map(|r| go(remaining_parts - 1, remaining_total - r, m_fact, denom * factorial(r)))
            .sum()
    }
    Ok(go(c, m, factorial(m), 1))
}

/// Enumerate every length-`m` sequence over `nodes` in which each node
/// appears at least once, invoking `visit` per sequence.
fn for_each_covering_sequence(nodes: &[usize], m: usize, mut visit: impl FnMut(&[usize])) {
    let c = nodes.len();
    let mut seq = vec![0usize; m];
    let mut used = vec![false; c];
    fn rec(
        nodes: &[usize],
        m: usize,
        pos: usize,
        unused: usize,
        seq: &mut [usize],
        used: &mut [bool],
        visit: &mut impl FnMut(&[usize]),
    ) {
        if pos == m {
            if unused == 0 {
                visit(seq);
            }
            return;
        }
        // Prune: the remaining positions must fit every unused node.
        if unused > m - pos {
            return;
        }
        for (i, &v) in nodes.iter().enumerate() {
            seq[pos] = v;
            let first_use = !used[i];
            if first_use {
                used[i] = true;
            }
            rec(nodes, m, pos + 1, unused - first_use as usize, seq, used, visit);
            if first_use {
                used[i] = false;
            }
        }
    }
    rec(nodes, m, 0, c, &mut seq, &mut used, &mut visit);
}

/// Normalized adjacency tensor per hyperedge enumeration; requires
/// `M >= 2` where `M` is the hypergraph order.
pub fn build_adjacency(graph: &Hypergraph) -> Result<AdjacencySpec> {
    build_adjacency_with_order(graph, graph.order().max(2))
}

/// Same as [`build_adjacency`] with an explicit order `M >= graph.order()`.
pub fn build_adjacency_with_order(graph: &Hypergraph, m: usize) -> Result<AdjacencySpec> {
    if m < 2 {
        return Err(Error::InvalidConfig("adjacency order M must be >= 2".into()));
    }
    if m < graph.order() {
        return Err(Error::InvalidConfig(format!(
            "order M={m} below hypergraph order {}",
            graph.order()
        )));
    }
    let degrees = graph.degrees();
    let mut entries: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for edge in graph.hyperedges() {
        let c = edge.len();
        let alpha = multinomial_alpha(c, m)? as f64;
        let base = c as f64 / alpha;
        for_each_covering_sequence(edge, m, |seq| {
            let w = base / degrees.0[seq[0]] as f64;
            *entries.entry(seq.to_vec()).or_insert(0.0) += w;
        });
    }
    Ok(AdjacencySpec { order: m, dim: graph.num_nodes(), entries })
}

/// Hypergraph signal tensor: the `(M-1)`-fold outer power of each
/// feature column, stacked along the feature dimension.
pub fn build_signal(features: &Array2<f64>, m: usize) -> Result<SignalSpec> {
    if m < 2 {
        return Err(Error::InvalidConfig("signal order M must be >= 2".into()));
    }
    let (n, d) = features.dim();
    if m == 2 {
        return Ok(SignalSpec {
            dim: n,
            feature_dim: d,
            order: m,
            slices: vec![features.clone()],
        });
    }
    let n_slices = n.pow((m - 2) as u32);
    let mut slices = Vec::with_capacity(n_slices);
    for flat in 0..n_slices {
        let digits = unflatten_index(flat, n, m - 2);
        let mut slice = Array2::zeros((n, d));
        for col in 0..d {
            let factor: f64 = digits.iter().map(|&p| features[[p, col]]).product();
            if factor != 0.0 {
                for row in 0..n {
                    slice[[row, col]] = features[[row, col]] * factor;
                }
            }
        }
        slices.push(slice);
    }
    Ok(SignalSpec { dim: n, feature_dim: d, order: m, slices })
}

/// Prepend a zero slice, reflect, and halve: `N_f` slices become
/// `2 * N_f + 1` with the reflection structure the t-shifting relies on.
pub fn symmetrize(t: &Tensor3) -> SymTensor3 {
    let n_f = t.n_slices();
    let mut slices = Vec::with_capacity(2 * n_f + 1);
    slices.push(Array2::zeros((t.n_rows(), t.n_cols())));
    for s in t.slices() {
        slices.push(s * 0.5);
    }
    for s in t.slices().iter().rev() {
        slices.push(s * 0.5);
    }
    let mut out = SymTensor3::new(slices, false).expect("2*N_f+1 is odd");
    out.set_symmetrized(true);
    out
}

/// Normalized Laplacian tensor `L_s = I_s - A_s`.
pub fn laplacian(a_s: &SymTensor3) -> Result<SymTensor3> {
    if a_s.n_rows() != a_s.n_cols() {
        return Err(Error::shape("laplacian", "adjacency tensor must be square per slice"));
    }
    identity_tensor(a_s.n_rows(), a_s.n_slices())?.sub(a_s)
}

/// Build the symmetrized adjacency tensor of a hypergraph in one call.
pub fn symmetrized_adjacency(graph: &Hypergraph) -> Result<SymTensor3> {
    Ok(symmetrize(&build_adjacency(graph)?.flatten_to_slices()))
}

/// Build the symmetrized signal tensor for features at the graph order.
pub fn symmetrized_signal(features: &Array2<f64>, m: usize) -> Result<SymTensor3> {
    Ok(symmetrize(&build_signal(features, m)?.flatten_to_slices()))
}
