//! `thg build`: normalized adjacency tensor of a hypergraph, dumped as
//! JSON, with an optional exact row-sum report.

use crate::config;
use crate::manifest::RunManifest;
use crate::{CliResult, Common};
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;
use thg_core::builder::{build_adjacency_with_order, symmetrize};
use thg_core::hypergraph::load_hypergraph;
use thg_core::talg::TensorDump;

#[derive(Args, Debug, Clone)]
pub struct BuildArgs {
    /// Hypergraph structure file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Tensor order M (default: the hypergraph's own order, min 2).
    #[arg(long)]
    pub order: Option<usize>,
    /// Print the max deviation of non-isolated row sums from 1.
    #[arg(long)]
    pub check_rowsum: bool,
    /// Dump the symmetrized (2 N^(M-2) + 1 slice) tensor instead of the
    /// raw flattened one.
    #[arg(long)]
    pub symmetrize: bool,
    /// Output file (default: <out-dir>/adjacency.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ResolvedBuild {
    graph: String,
    order: usize,
    symmetrize: bool,
    check_rowsum: bool,
    out: String,
}

pub fn run(common: &Common, args: BuildArgs) -> CliResult {
    let file_cfg = config::load(common.config.as_deref())?;
    let seed = config::resolve(common.seed, file_cfg.seed, 0);
    let mut manifest = RunManifest::new("build", seed);
    manifest.add_input(&args.graph)?;

    let graph = load_hypergraph(&args.graph)?;
    let order = config::resolve(args.order, file_cfg.order, graph.order().max(2));
    let out_path = args.out.clone().unwrap_or_else(|| common.out_dir.join("adjacency.json"));
    manifest.set_config(ResolvedBuild {
        graph: args.graph.display().to_string(),
        order,
        symmetrize: args.symmetrize,
        check_rowsum: args.check_rowsum,
        out: out_path.display().to_string(),
    })?;

    let spec = manifest.time("build_adjacency", || build_adjacency_with_order(&graph, order))?;
    let dump = if args.symmetrize {
        symmetrize(&spec.flatten_to_slices()).to_dump()
    } else {
        let t = spec.flatten_to_slices();
        TensorDump {
            n_rows: t.n_rows(),
            n_cols: t.n_cols(),
            n_slices: t.n_slices(),
            symmetrized: false,
            slices: t
                .slices()
                .iter()
                .map(|s| s.outer_iter().map(|r| r.to_vec()).collect())
                .collect(),
        }
    };
    std::fs::create_dir_all(&common.out_dir)?;
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&out_path, serde_json::to_string(&dump)? + "\n")?;

    let deviation = spec.max_rowsum_deviation(&graph);
    if common.json {
        println!(
            "{}",
            serde_json::json!({
                "nodes": graph.num_nodes(),
                "order": order,
                "n_slices": dump.n_slices,
                "entries": spec.entries().len(),
                "max_rowsum_deviation": deviation,
                "out": out_path.display().to_string(),
            })
        );
    } else {
        println!(
            "built order-{order} adjacency tensor: {} nodes, {} sparse entries, {} slices -> {}",
            graph.num_nodes(),
            spec.entries().len(),
            dump.n_slices,
            out_path.display()
        );
        if args.check_rowsum {
            println!("max row-sum deviation: {deviation:.3e}");
        }
    }
    manifest.write(&common.out_dir)?;
    Ok(())
}
