//! Trains an item-based (or user-based) autoencoder and reports the loss and
//! held-out RMSE after every epoch.
//!
//! cargo run --release --example train_vcfn -- [ratings] [item|user] [bottleneck] [epochs]

use std::path::PathBuf;

use cfn::eval::rmse;
use cfn::experiment::{fit_cfn, CfnSettings};
use cfn::ingest::{parse_ratings, FileFormat};
use cfn::ratings::{split, SplitSpec};
use cfn::train::TrainConfig;
use cfn::{Orientation, Transfer};

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = PathBuf::from(args.first().map_or("data/ml-1m/ratings.dat", String::as_str));
    let orientation = match args.get(1).map_or("item", String::as_str) {
        "user" => Orientation::UserRows,
        _ => Orientation::ItemRows,
    };
    let bottleneck: usize = args.get(2).map_or(600, |s| s.parse().expect("bottleneck"));
    let epochs: usize = args.get(3).map_or(30, |s| s.parse().expect("epochs"));

    let data = parse_ratings(&path, FileFormat::from_path(&path), None)?;
    let (train, test) = split(&data.ratings, &SplitSpec::new(0.9, 1)?);
    let settings = CfnSettings {
        orientation,
        bottleneck,
        hidden: Transfer::Tanh,
        output: Transfer::Identity,
        init_seed: 1,
        train: TrainConfig {
            epochs,
            rng_seed: 1,
            ..TrainConfig::default()
        },
    };
    let (est, report) = fit_cfn(&train, &data.scale, None, &settings, None, Some(&test))?;
    for e in &report.epochs {
        println!(
            "epoch {:>3}  loss {:.5}  test rmse {:.4}  {:.1}s",
            e.epoch,
            e.loss,
            e.val_rmse.unwrap_or(f64::NAN),
            e.seconds
        );
    }
    println!("{orientation:?} k={bottleneck}: final test rmse {:.4}", rmse(&est, &test)?);
    Ok(())
}
