//! Parses a rating file, writes a seeded train/test split and prints what the
//! network will see after normalization and unbiasing.
//!
//! cargo run --release --example preprocess_split -- [ratings] [output-dir] [seed]

use std::path::PathBuf;

use cfn::config::ExperimentConfig;
use cfn::experiment::{cmd_split, preprocess};
use cfn::Orientation;

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = ExperimentConfig::default();
    cfg.data.ratings = PathBuf::from(args.first().map_or("data/ml-1m/ratings.dat", String::as_str));
    cfg.output = PathBuf::from(args.get(1).map_or("runs/split", String::as_str));
    cfg.seed = args.get(2).map_or(1, |s| s.parse().expect("seed"));

    let data = cmd_split(&cfg)?;
    let (u, i) = (data.users.len(), data.items.len());
    println!("users {u}  items {i}  scale {}-{}", data.scale.min_rating, data.scale.max_rating);
    println!(
        "train {}  test {}  density {:.4}",
        data.train.nnz(),
        data.test.nnz(),
        (data.train.nnz() + data.test.nnz()) as f64 / (u * i) as f64
    );

    for orientation in [Orientation::ItemRows, Orientation::UserRows] {
        let pre = preprocess(&data.train, orientation, &data.scale)?;
        let counts = pre.rows.row_counts();
        let cold = counts.iter().filter(|&&c| c == 0).count();
        let vals = pre.rows.values();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        println!(
            "{orientation:?}: {} rows of width {}, {cold} cold rows, unbiased inputs in [{lo:.3}, {hi:.3}]",
            pre.rows.n_rows(),
            pre.rows.n_cols()
        );
    }
    println!("wrote {}", cfg.output.display());
    Ok(())
}
