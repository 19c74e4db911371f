//! Hypergraph data model and dataset ingestion.
//!
//! File formats:
//! - structure: UTF-8 text, first line `N <num_nodes>`, every following
//!   non-empty non-`#` line is one hyperedge as whitespace-separated ids;
//! - features: CSV, row i = node i, no header;
//! - labels: CSV lines `node_id,class_id`;
//! - splits: CSV lines `node_id,{train|val|test}`.

use crate::error::{Error, Result};
use ndarray::Array2;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

/// A hypergraph over dense node ids `[0, N)`.
///
/// Hyperedges are node sets; duplicate hyperedges are kept because the
/// adjacency normalization counts them in the node degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    num_nodes: usize,
    hyperedges: Vec<Vec<usize>>,
    order: usize,
}

/// Per-node hyperedge membership counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector(pub Vec<usize>);

impl Hypergraph {
    /// Build from raw hyperedges. Duplicate ids inside one edge collapse
    /// with a warning; the order M is always recomputed.
    pub fn new(num_nodes: usize, raw_edges: Vec<Vec<usize>>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidConfig("num_nodes must be positive".into()));
        }
        if raw_edges.is_empty() {
            return Err(Error::InvalidConfig("no hyperedges".into()));
        }
        let mut hyperedges: Vec<Vec<usize>> = Vec::with_capacity(raw_edges.len());
        for (idx, edge) in raw_edges.into_iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::InvalidConfig(format!("hyperedge {idx} is empty")));
            }
            if let Some(&bad) = edge.iter().find(|&&v| v >= num_nodes) {
                return Err(Error::InvalidConfig(format!(
                    "hyperedge {idx}: node id {bad} out of range [0, {num_nodes})"
                )));
            }
            let set: BTreeSet<usize> = edge.iter().copied().collect();
            if set.len() < edge.len() {
                log::warn!("hyperedge {idx}: duplicate node ids collapsed");
            }
            hyperedges.push(set.into_iter().collect());
        }
        let order = hyperedges.iter().map(|e| e.len()).max().unwrap_or(0);
        Ok(Hypergraph { num_nodes, hyperedges, order })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn hyperedges(&self) -> &[Vec<usize>] {
        &self.hyperedges
    }

    /// Maximum hyperedge cardinality.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of hyperedges containing each node.
    pub fn degrees(&self) -> DegreeVector {
        let mut d = vec![0usize; self.num_nodes];
        for edge in &self.hyperedges {
            for &v in edge {
                d[v] += 1;
            }
        }
        DegreeVector(d)
    }

    /// Pairwise reduction: entry (i, j) is 1 iff i != j share a hyperedge.
    pub fn clique_expansion(&self) -> Array2<f64> {
        let n = self.num_nodes;
        let mut m = Array2::zeros((n, n));
        for edge in &self.hyperedges {
            for &i in edge {
                for &j in edge {
                    if i != j {
                        m[[i, j]] = 1.0;
                    }
                }
            }
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "N {}", self.num_nodes);
        for edge in &self.hyperedges {
            let ids: Vec<String> = edge.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", ids.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut num_nodes: Option<usize> = None;
        let mut edges: Vec<Vec<usize>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if num_nodes.is_none() {
                let mut parts = line.split_whitespace();
                match (parts.next(), parts.next(), parts.next()) {
                    (Some("N"), Some(n), None) => {
                        let n: usize = n
                            .parse()
                            .map_err(|_| Error::parse(line_no, format!("bad node count `{n}`")))?;
                        num_nodes = Some(n);
                        continue;
                    }
                    _ => return Err(Error::parse(line_no, "expected header `N <num_nodes>`")),
                }
            }
            let n = num_nodes.unwrap();
            let mut edge = Vec::new();
            for tok in line.split_whitespace() {
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad node id `{tok}`")))?;
                if v >= n {
                    return Err(Error::parse(
                        line_no,
                        format!("node id {v} out of range [0, {n})"),
                    ));
                }
                edge.push(v);
            }
            if edge.is_empty() {
                return Err(Error::parse(line_no, "empty hyperedge"));
            }
            let set: BTreeSet<usize> = edge.iter().copied().collect();
            if set.len() < edge.len() {
                log::warn!("line {line_no}: duplicate node ids in hyperedge collapsed");
            }
            edges.push(set.into_iter().collect());
        }
        let num_nodes =
            num_nodes.ok_or_else(|| Error::parse(0, "missing header `N <num_nodes>`"))?;
        if edges.is_empty() {
            return Err(Error::parse(0, "no hyperedges"));
        }
        let order = edges.iter().map(|e| e.len()).max().unwrap();
        Ok(Hypergraph { num_nodes, hyperedges: edges, order })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Validated Hypergraph from a structure file; hyperedge order in the
/// file is preserved.
pub fn load_hypergraph(path: &Path) -> Result<Hypergraph> {
    let text = std::fs::read_to_string(path)?;
    Hypergraph::parse(&text)
}

/// Hypergraph structure plus node features, labels, and split masks.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Hypergraph,
    /// N x D feature matrix, row i = node i.
    pub features: Array2<f64>,
    /// Per-node class id; `None` for unlabeled nodes.
    pub labels: Vec<Option<usize>>,
    pub train_mask: Vec<bool>,
    pub val_mask: Vec<bool>,
    pub test_mask: Vec<bool>,
}

impl Dataset {
    pub fn new(
        graph: Hypergraph,
        features: Array2<f64>,
        labels: Vec<Option<usize>>,
        train_mask: Vec<bool>,
        val_mask: Vec<bool>,
        test_mask: Vec<bool>,
    ) -> Result<Self> {
        let n = graph.num_nodes();
        if features.nrows() != n {
            return Err(Error::InvalidConfig(format!(
                "feature matrix has {} rows for {n} nodes",
                features.nrows()
            )));
        }
        for (name, mask) in [
            ("labels", labels.len()),
            ("train mask", train_mask.len()),
            ("val mask", val_mask.len()),
            ("test mask", test_mask.len()),
        ] {
            if mask != n {
                return Err(Error::InvalidConfig(format!("{name} length {mask} != {n}")));
            }
        }
        for v in 0..n {
            let masked = [train_mask[v], val_mask[v], test_mask[v]];
            if masked.iter().filter(|&&b| b).count() > 1 {
                return Err(Error::InvalidConfig(format!("node {v} appears in multiple splits")));
            }
            if masked.iter().any(|&b| b) && labels[v].is_none() {
                return Err(Error::InvalidConfig(format!("masked node {v} has no label")));
            }
        }
        Ok(Dataset { graph, features, labels, train_mask, val_mask, test_mask })
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().flatten().map(|&c| c + 1).max().unwrap_or(0)
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }
}

/// Parse a no-header CSV of N rows into an N x D matrix.
pub fn load_features(path: &Path, num_nodes: usize) -> Result<Array2<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_features(&text, num_nodes)
}

pub fn parse_features(text: &str, num_nodes: usize) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("bad value `{tok}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(line_no, "inconsistent column count"));
            }
        }
        rows.push(row);
    }
    if rows.len() != num_nodes {
        return Err(Error::parse(
            0,
            format!("{} feature rows for {num_nodes} nodes", rows.len()),
        ));
    }
    let d = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((num_nodes, d), flat)
        .map_err(|e| Error::parse(0, e.to_string()))
}

/// Parse `node_id,class_id` lines into a per-node label vector.
pub fn load_labels(path: &Path, num_nodes: usize) -> Result<Vec<Option<usize>>> {
    let text = std::fs::read_to_string(path)?;
    parse_labels(&text, num_nodes)
}

pub fn parse_labels(text: &str, num_nodes: usize) -> Result<Vec<Option<usize>>> {
    let mut labels = vec![None; num_nodes];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (node, class) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(line_no, "expected `node_id,class_id`"))?;
        let node: usize = node
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad node id `{node}`")))?;
        if node >= num_nodes {
            return Err(Error::parse(line_no, format!("node id {node} out of range")));
        }
        let class: usize = class
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad class id `{class}`")))?;
        labels[node] = Some(class);
    }
    Ok(labels)
}

/// Parse `node_id,{train|val|test}` lines into the three split masks.
pub fn load_splits(path: &Path, num_nodes: usize) -> Result<(Vec<bool>, Vec<bool>, Vec<bool>)> {
    let text = std::fs::read_to_string(path)?;
    parse_splits(&text, num_nodes)
}

pub fn parse_splits(text: &str, num_nodes: usize) -> Result<(Vec<bool>, Vec<bool>, Vec<bool>)> {
    let mut train = vec![false; num_nodes];
    let mut val = vec![false; num_nodes];
    let mut test = vec![false; num_nodes];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (node, split) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(line_no, "expected `node_id,{train|val|test}`"))?;
        let node: usize = node
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad node id `{node}`")))?;
        if node >= num_nodes {
            return Err(Error::parse(line_no, format!("node id {node} out of range")));
        }
        match split.trim() {
            "train" => train[node] = true,
            "val" => val[node] = true,
            "test" => test[node] = true,
            other => return Err(Error::parse(line_no, format!("unknown split `{other}`"))),
        }
    }
    Ok((train, val, test))
}
