//! ALS-WR matrix factorization on a 90/10 split of a rating file.
//!
//! cargo run --release --example als_baseline -- [ratings] [rank] [lambda] [iterations]

use std::path::PathBuf;

use cfn::als::{als_wr, MfEstimator};
use cfn::eval::rmse;
use cfn::ingest::{parse_ratings, FileFormat};
use cfn::ratings::{split, SplitSpec};
use cfn::Orientation;

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = PathBuf::from(args.first().map_or("data/ml-1m/ratings.dat", String::as_str));
    let rank: usize = args.get(1).map_or(20, |s| s.parse().expect("rank"));
    let lambda: f64 = args.get(2).map_or(0.05, |s| s.parse().expect("lambda"));
    let iterations: usize = args.get(3).map_or(15, |s| s.parse().expect("iterations"));

    let data = parse_ratings(&path, FileFormat::from_path(&path), None)?;
    let (train, test) = split(&data.ratings, &SplitSpec::new(0.9, 1)?);
    let mean = train.values().iter().sum::<f64>() / train.nnz() as f64;
    let centered = train.map_values(|_, _, v| v - mean);

    let (model, report) = als_wr(&centered, rank, lambda, iterations, 1)?;
    for (i, obj) in report.objective.iter().enumerate().filter(|(i, _)| i % 2 == 1) {
        println!("iteration {:>2}  objective {obj:.2}", i / 2 + 1);
    }
    let est = MfEstimator {
        model,
        orientation: Orientation::UserRows,
        offset: mean,
        clip: Some(data.scale),
    };
    println!("rank {rank}  lambda {lambda}  test rmse {:.4}", rmse(&est, &test)?);
    Ok(())
}
