//! The whole command pipeline driven by one TOML file: split, train, evaluate,
//! reload the checkpoint and predict.
//!
//! cargo run --release --example experiment_workflow -- [config.toml]
//!
//! Without an argument a small configuration is written to
//! `runs/workflow/config.toml` and used.

use std::path::PathBuf;

use cfn::checkpoint::load_model;
use cfn::config::ExperimentConfig;
use cfn::experiment::{cmd_evaluate, cmd_predict, cmd_split, cmd_train};

const DEFAULT: &str = r#"
output = "runs/workflow"
seed = 3

[data]
ratings = "data/ml-1m/ratings.dat"
train_fraction = 0.9

[model]
orientation = "item"
bottleneck = 300

[train]
epochs = 10
validation_fraction = 0.05

[evaluate]
quintiles = true
"#;

fn main() -> cfn::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(p) => ExperimentConfig::load(&PathBuf::from(p))?,
        None => ExperimentConfig::from_toml(DEFAULT)?,
    };
    println!("{}", cfg.to_toml());

    let split = cmd_split(&cfg)?;
    println!("split: {} train, {} test", split.train.nnz(), split.test.nnz());

    let trained = cmd_train(&cfg)?;
    for e in &trained.report.epochs {
        println!("epoch {:>3}  loss {:.5}  validation {:.4}", e.epoch, e.loss, e.val_rmse.unwrap_or(f64::NAN));
    }
    let model = load_model(&trained.checkpoint)?;
    println!("checkpoint after {} epochs: {}", model.epochs_completed(), trained.checkpoint.display());

    let eval = cmd_evaluate(&cfg, None)?;
    println!("test rmse {:.4}", eval.global_rmse);
    for q in eval.quintiles.iter().flatten() {
        println!("  items {:.1}-{:.1}: rmse {:.4} over {} ratings", q.lower, q.upper, q.rmse, q.n_ratings);
    }

    let (user, item) = (split.users.id(0).unwrap(), split.items.id(0).unwrap());
    println!("predict({user}, {item}) = {:.3}", cmd_predict(&cfg, None, user, item, &[])?);
    Ok(())
}
