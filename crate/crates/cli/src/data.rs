//! Dataset loading shared by the train/eval/grid subcommands: either
//! the four on-disk files or the seeded synthetic two-community
//! benchmark.

use crate::manifest::RunManifest;
use crate::{CliError, CliResult};
use clap::Args;
use std::path::PathBuf;
use thg_core::hypergraph::{load_features, load_hypergraph, load_labels, load_splits};
use thg_core::synth::two_community;
use thg_core::Dataset;

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Hypergraph structure file (`N <num_nodes>` header, one edge per line).
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Node feature CSV (N rows, D columns, no header).
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Label CSV (`node,class`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Split CSV (`node,{train|val|test}`).
    #[arg(long)]
    pub splits: Option<PathBuf>,
    /// Use the seeded synthetic two-community dataset instead of files.
    #[arg(long, conflicts_with_all = ["graph", "features", "labels", "splits"])]
    pub synthetic: bool,
}

pub fn load_dataset(args: &DataArgs, seed: u64, manifest: &mut RunManifest) -> CliResult<Dataset> {
    if args.synthetic {
        return Ok(two_community(seed));
    }
    let (Some(graph), Some(features), Some(labels), Some(splits)) =
        (&args.graph, &args.features, &args.labels, &args.splits)
    else {
        return Err(CliError::usage(
            "provide --graph, --features, --labels and --splits, or --synthetic",
        ));
    };
    for path in [graph, features, labels, splits] {
        manifest.add_input(path)?;
    }
    let g = load_hypergraph(graph)?;
    let n = g.num_nodes();
    let x = load_features(features, n)?;
    let y = load_labels(labels, n)?;
    let (train, val, test) = load_splits(splits, n)?;
    Ok(Dataset::new(g, x, y, train, val, test)?)
}
