mod common;

use cfn::eval::{density_sweep, rmse};
use cfn::experiment::{fit_cfn, CfnSettings};
use cfn::loss::LossConfig;
use cfn::synthetic::{low_rank, rescale};
use cfn::train::TrainConfig;
use cfn::{Orientation, RatingScale, SparseRatings, Transfer};
use proptest::prelude::*;

fn settings(epochs: usize, k: usize, mask: f64) -> CfnSettings {
    CfnSettings {
        orientation: Orientation::ItemRows,
        bottleneck: k,
        hidden: Transfer::Tanh,
        output: Transfer::Identity,
        init_seed: 1,
        train: TrainConfig {
            epochs,
            batch_size: 5,
            learning_rate: 0.2,
            rng_seed: 1,
            threads: Some(1),
            loss: LossConfig {
                alpha: 1.0,
                beta: 1.0,
                mask_ratio: mask,
                lambda: 0.0,
                normalize_per_row: false,
            },
            ..TrainConfig::default()
        },
    }
}

#[test]
fn fits_a_fully_observed_low_rank_matrix() {
    let data = rescale(&low_rank(50, 40, 3, 1.0, 0.0, 2).unwrap(), 1.0, 5.0);
    let scale = RatingScale::new(1.0, 5.0).unwrap();
    let (est, report) = fit_cfn(&data.observed, &scale, None, &settings(200, 10, 0.0), None, None).unwrap();
    let first = report.epochs[0].loss;
    let last = report.epochs.last().unwrap().loss;
    assert!(last < 0.1 * first, "{first} -> {last}");
    let e = rmse(&est, &data.observed).unwrap();
    assert!(e < 0.1 * scale.range(), "{e}");
}

#[test]
fn more_training_data_helps() {
    let data = rescale(&low_rank(120, 80, 3, 0.5, 0.05, 3).unwrap(), 1.0, 5.0);
    let scale = RatingScale::new(1.0, 5.0).unwrap();
    let s = settings(40, 10, 0.25);
    let report = density_sweep(&data.observed, &[0.1, 0.9], 4, |tr, te| {
        let (est, _) = fit_cfn(tr, &scale, None, &s, None, None)?;
        rmse(&est, te)
    })
    .unwrap();
    let sweep = report.sweep.unwrap();
    assert!(sweep[1].rmse <= sweep[0].rmse, "{sweep:?}");
}

proptest! {
    #[test]
    fn rmse_ignores_the_order_of_test_pairs(
        entries in prop::collection::vec((0usize..8, 0usize..6, 1.0f64..5.0), 1..30),
        seed in any::<u64>(),
    ) {
        let est = |u: usize, i: usize| (u * 7 + i * 3) as f64 % 5.0;
        let entries: Vec<_> = entries
            .into_iter()
            .map(|(u, i, v)| ((u, i), v))
            .collect::<std::collections::BTreeMap<_, _>>()
            .into_iter()
            .map(|((u, i), v)| (u, i, v))
            .collect();
        let a = SparseRatings::from_triplets(8, 6, Orientation::UserRows, &entries).unwrap();
        let mut shuffled = entries.clone();
        let mut r = common::rng(seed);
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut r);
        let b = SparseRatings::from_triplets(8, 6, Orientation::UserRows, &shuffled).unwrap();
        let (ra, rb) = (rmse(&est, &a).unwrap(), rmse(&est, &b).unwrap());
        prop_assert!((ra - rb).abs() <= 1e-12 * (1.0 + ra));
    }
}
