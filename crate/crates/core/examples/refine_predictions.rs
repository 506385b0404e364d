//! A user-based model answers for new ratings without retraining: each rating
//! a user adds is fed back through the network.
//!
//! cargo run --release --example refine_predictions -- [ratings] [epochs]

use std::path::PathBuf;

use cfn::experiment::{fit_cfn, CfnSettings};
use cfn::ingest::{parse_ratings, FileFormat};
use cfn::train::TrainConfig;
use cfn::{Orientation, RatingEstimator, Transfer};

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = PathBuf::from(args.first().map_or("data/ml-1m/ratings.dat", String::as_str));
    let epochs: usize = args.get(1).map_or(20, |s| s.parse().expect("epochs"));

    let data = parse_ratings(&path, FileFormat::from_path(&path), None)?;
    let settings = CfnSettings {
        orientation: Orientation::UserRows,
        bottleneck: 500,
        hidden: Transfer::Tanh,
        output: Transfer::Identity,
        init_seed: 1,
        train: TrainConfig {
            epochs,
            rng_seed: 1,
            ..TrainConfig::default()
        },
    };
    let (mut est, _) = fit_cfn(&data.ratings, &data.scale, None, &settings, None, None)?;

    // the user with the fewest ratings
    let counts = data.ratings.row_counts();
    let user = (0..counts.len()).min_by_key(|&u| counts[u]).unwrap();
    let popular = data.ratings.col_counts();
    let mut items: Vec<usize> = (0..popular.len()).filter(|&i| data.ratings.get(user, i).is_none()).collect();
    items.sort_by_key(|&i| std::cmp::Reverse(popular[i]));
    let (probe, feed) = (items[0], &items[1..4]);
    let name = |i: usize| data.items.id(i).unwrap_or("?").to_string();

    println!("user {} has {} ratings", data.users.id(user).unwrap_or("?"), counts[user]);
    println!("prediction for item {}: {:.3}", name(probe), est.predict(user, probe)?);
    for (&item, rating) in feed.iter().zip([5.0, 4.0, 1.0]) {
        est = est.with_rating(user, item, rating)?;
        println!(
            "after rating item {} {rating}: prediction for item {} is {:.3}",
            name(item),
            name(probe),
            est.predict(user, probe)?
        );
    }
    Ok(())
}
