//! Item- and user-based autoencoders with k = 600 on a MovieLens directory,
//! reporting test RMSE and wall time.
//!
//! cargo run --release --example movielens_benchmark -- [movielens-dir] [seed]

use std::path::PathBuf;
use std::time::Instant;

use cfn::config::ExperimentConfig;
use cfn::experiment::{cmd_evaluate, cmd_split, cmd_train};

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map_or("data/ml-1m", String::as_str));
    let seed: u64 = args.get(1).map_or(1, |s| s.parse().expect("seed"));

    for orientation in ["item", "user"] {
        let mut cfg = ExperimentConfig::default();
        cfg.data.ratings = dir.join("ratings.dat");
        cfg.model.orientation = orientation.into();
        cfg.seed = seed;
        cfg.output = PathBuf::from(format!("runs/benchmark_{orientation}"));
        let start = Instant::now();
        cmd_split(&cfg)?;
        cmd_train(&cfg)?;
        let report = cmd_evaluate(&cfg, None)?;
        println!(
            "{orientation}-based k={}: test rmse {:.4} in {:.0}s",
            cfg.model.bottleneck,
            report.global_rmse,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
