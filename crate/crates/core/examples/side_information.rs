//! Compares an autoencoder with and without side information, bucketed by how
//! many training ratings each item has (sparsest fifth first).
//!
//! Item mode uses genres from `movies.dat`; user mode uses `users.dat`.
//!
//! cargo run --release --example side_information -- [movielens-dir] [item|user] [epochs]

use std::path::PathBuf;

use cfn::config::ExperimentConfig;
use cfn::experiment::{cmd_evaluate, cmd_split, cmd_train};

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map_or("data/ml-1m", String::as_str));
    let orientation = args.get(1).map_or("item", String::as_str).to_string();
    let epochs: usize = args.get(2).map_or(30, |s| s.parse().expect("epochs"));

    let mut plain = ExperimentConfig::default();
    plain.data.ratings = dir.join("ratings.dat");
    plain.model.orientation = orientation.clone();
    plain.train.epochs = epochs;
    plain.output = PathBuf::from("runs/side_plain");
    plain.seed = 1;
    let mut side = plain.clone();
    side.output = PathBuf::from("runs/side_info");
    if orientation == "user" {
        side.side.demographics = Some(dir.join("users.dat"));
    } else {
        side.side.categories = Some(dir.join("movies.dat"));
    }

    let mut rows = Vec::new();
    for cfg in [&plain, &side] {
        cmd_split(cfg)?;
        cmd_train(cfg)?;
        rows.push(cmd_evaluate(cfg, None)?);
    }
    println!("{:<10} {:>10} {:>10}", "bucket", "plain", "side info");
    let (a, b) = (rows[0].quintiles.as_ref().unwrap(), rows[1].quintiles.as_ref().unwrap());
    for (qa, qb) in a.iter().zip(b) {
        println!("{:.1}-{:.1}    {:>10.4} {:>10.4}", qa.lower, qa.upper, qa.rmse, qb.rmse);
    }
    println!("{:<10} {:>10.4} {:>10.4}", "all", rows[0].global_rmse, rows[1].global_rmse);
    Ok(())
}
