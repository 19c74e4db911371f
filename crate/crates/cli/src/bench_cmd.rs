//! `thg bench`: wall-clock comparison of the direct and Fourier
//! t-product paths, with a hard agreement check.

use crate::manifest::RunManifest;
use crate::{CliError, CliResult, Common};
use clap::Args;
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use thg_core::talg::{t_product, t_product_fft, SymTensor3};

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Comma-separated matrix sizes N; each runs at N_s = 2N + 1.
    #[arg(long, default_value = "16,32,64,128", value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Columns of the right operand.
    #[arg(long, default_value_t = 1)]
    pub cols: usize,
    /// Timed repetitions per (size, path); min and median are reported.
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    /// Output CSV (default: <out-dir>/bench.csv).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

fn random_tensor(rng: &mut ChaCha8Rng, n: usize, c: usize, ns: usize) -> SymTensor3 {
    SymTensor3::new(
        (0..ns)
            .map(|_| Array2::from_shape_fn((n, c), |_| rng.random_range(-1.0..1.0)))
            .collect(),
        false,
    )
    .expect("odd slice count")
}

fn stats(mut times: Vec<f64>) -> (f64, f64) {
    times.sort_by(f64::total_cmp);
    (times[0], times[times.len() / 2])
}

pub fn run(common: &Common, args: BenchArgs) -> CliResult {
    if args.repeat == 0 || args.sizes.is_empty() {
        return Err(CliError::usage("bench needs --repeat >= 1 and at least one size"));
    }
    let seed = common.seed.unwrap_or(0);
    let mut manifest = RunManifest::new("bench", seed);
    manifest.set_config(serde_json::json!({
        "sizes": args.sizes, "cols": args.cols, "repeat": args.repeat,
    }))?;

    let mut csv = String::from("n,n_slices,path,seconds_min,seconds_median\n");
    for &n in &args.sizes {
        let ns = 2 * n + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let a = random_tensor(&mut rng, n, n, ns);
        let b = random_tensor(&mut rng, n, args.cols, ns);

        let mut direct_times = Vec::with_capacity(args.repeat);
        let mut fft_times = Vec::with_capacity(args.repeat);
        let mut direct_out = None;
        let mut fft_out = None;
        for _ in 0..args.repeat {
            let t0 = Instant::now();
            direct_out = Some(t_product(&a, &b)?);
            direct_times.push(t0.elapsed().as_secs_f64());
            let t1 = Instant::now();
            fft_out = Some(t_product_fft(&a, &b)?);
            fft_times.push(t1.elapsed().as_secs_f64());
        }
        let diff = direct_out
            .unwrap()
            .sub(&fft_out.unwrap())?
            .max_abs();
        let scale = a.max_abs() * b.max_abs() * ns as f64;
        if diff > 1e-10 * (1.0 + scale) {
            return Err(CliError::failure(format!(
                "path disagreement at N={n}: max-abs diff {diff:.3e}"
            )));
        }
        let (dmin, dmed) = stats(direct_times);
        let (fmin, fmed) = stats(fft_times);
        csv.push_str(&format!("{n},{ns},direct,{dmin},{dmed}\n"));
        csv.push_str(&format!("{n},{ns},fft,{fmin},{fmed}\n"));
        if !common.json {
            println!(
                "N={n:4} N_s={ns:4}: direct {dmin:.6}s, fft {fmin:.6}s (min of {}; agree {diff:.2e})",
                args.repeat
            );
        }
    }

    std::fs::create_dir_all(&common.out_dir)?;
    let out_path = args.out.clone().unwrap_or_else(|| common.out_dir.join("bench.csv"));
    std::fs::write(&out_path, &csv)?;
    if common.json {
        println!("{}", serde_json::json!({ "out": out_path.display().to_string() }));
    }
    manifest.write(&common.out_dir)?;
    Ok(())
}
