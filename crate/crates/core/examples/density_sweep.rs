//! Test RMSE as the share of ratings used for training grows, with every
//! hyperparameter held fixed.
//!
//! cargo run --release --example density_sweep -- [ratings] [bottleneck] [epochs]

use std::path::PathBuf;

use cfn::eval::{density_sweep, rmse};
use cfn::experiment::{fit_cfn, CfnSettings};
use cfn::ingest::{parse_ratings, FileFormat};
use cfn::train::TrainConfig;
use cfn::{Orientation, Transfer};

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = PathBuf::from(args.first().map_or("data/ml-1m/ratings.dat", String::as_str));
    let bottleneck: usize = args.get(1).map_or(600, |s| s.parse().expect("bottleneck"));
    let epochs: usize = args.get(2).map_or(20, |s| s.parse().expect("epochs"));

    let data = parse_ratings(&path, FileFormat::from_path(&path), None)?;
    let settings = CfnSettings {
        orientation: Orientation::ItemRows,
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
    let ratios = [0.2, 0.4, 0.6, 0.8, 0.9];
    let report = density_sweep(&data.ratings, &ratios, 1, |train, test| {
        let (est, _) = fit_cfn(train, &data.scale, None, &settings, None, None)?;
        rmse(&est, test)
    })?;
    for p in report.sweep.iter().flatten() {
        println!("train fraction {:.1}  rmse {:.4}", p.train_fraction, p.rmse);
    }
    Ok(())
}
