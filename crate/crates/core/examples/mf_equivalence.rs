//! A linear autoencoder is a matrix factorization: this trains one on a
//! synthetic low-rank matrix, extracts the factors and compares with ALS-WR.
//!
//! cargo run --release --example mf_equivalence -- [rank] [seed]

use cfn::als::{als_wr, equivalence_check, MfEstimator};
use cfn::eval::rmse;
use cfn::loss::LossConfig;
use cfn::net::decompose_linear;
use cfn::synthetic::low_rank;
use cfn::train::{train, TrainConfig};
use cfn::{AutoencoderModel, ModelSpec, Orientation, Transfer};

fn main() -> cfn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rank: usize = args.first().map_or(5, |s| s.parse().expect("rank"));
    let seed: u64 = args.get(1).map_or(1, |s| s.parse().expect("seed"));

    let data = low_rank(200, 150, rank, 0.3, 0.0, seed)?;
    let spec = ModelSpec::new(data.n_cols, rank, 0).with_transfers(Transfer::Identity, Transfer::Identity);
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 10,
        learning_rate: 0.003,
        momentum: 0.9,
        rng_seed: seed,
        loss: LossConfig {
            alpha: 1.0,
            beta: 1.0,
            mask_ratio: 0.0,
            lambda: 0.0,
            normalize_per_row: false,
        },
        ..TrainConfig::default()
    };
    let (model, _) = train(AutoencoderModel::init(spec, seed)?, &data.observed, None, &cfg, None)?;

    let report = equivalence_check(&model, &data.observed, 1e-10, 1e-8)?;
    println!(
        "max |nn(x) - U V| = {:.2e}, sigma_(k+2)/sigma_1 = {:.2e}, passed {}",
        report.max_deviation, report.singular_ratio, report.passed
    );
    let dec = decompose_linear(&model, &data.observed)?;
    println!("factor width {} (k + input dim)", dec.factor[0].len());

    let hidden_err = |pred: &dyn Fn(usize, usize) -> f64| {
        let se: f64 = data.hidden.iter().map(|(r, c, v)| (pred(r, c) - v).powi(2)).sum();
        (se / data.hidden.nnz() as f64).sqrt()
    };
    let recon = dec.reconstruct();
    println!("linear autoencoder rmse on hidden entries {:.4}", hidden_err(&|r, c| recon[r][c]));

    let (mf, _) = als_wr(&data.observed, rank, 0.01, 25, seed)?;
    let est = MfEstimator {
        model: mf,
        orientation: Orientation::UserRows,
        offset: 0.0,
        clip: None,
    };
    println!("ALS-WR rmse on hidden entries {:.4}", rmse(&est, &data.hidden)?);
    Ok(())
}
