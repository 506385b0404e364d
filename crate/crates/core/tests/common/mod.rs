#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use cfn::als::{als_wr, equivalence_check, EquivalenceReport, MfEstimator};
use cfn::eval::rmse;
use cfn::experiment::{fit_cfn, CfnSettings};
use cfn::ingest::TagMatrix;
use cfn::loss::{corrupt, loss, loss_gradient, CorruptionMask, LossConfig};
use cfn::net::Params;
use cfn::ratings::SparseVec;
use cfn::sideinfo::{pca_compress_with, PcaSolver};
use cfn::synthetic::low_rank;
use cfn::train::{train, TrainConfig};
use cfn::tune::{self, quadratic_fitness, GaConfig, GeneSpace};
use cfn::{AutoencoderModel, ModelSpec, Orientation, RatingScale, SparseRatings, Transfer};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Model with every parameter uniform in ±0.5 so that no gradient is trivially zero.
pub fn random_model(spec: ModelSpec, seed: u64) -> AutoencoderModel {
    let mut m = AutoencoderModel::init(spec, seed).unwrap();
    let mut r = rng(seed ^ 0xABCD);
    for s in m.params_mut().slices_mut() {
        for v in s.iter_mut() {
            *v = r.random_range(-0.5..0.5);
        }
    }
    m
}

pub fn random_sparse(n: usize, density: f64, r: &mut ChaCha8Rng) -> SparseVec {
    let mut entries = Vec::new();
    for j in 0..n {
        if r.random::<f64>() < density {
            entries.push((j, r.random_range(-1.0..1.0)));
        }
    }
    if entries.is_empty() {
        entries.push((r.random_range(0..n), 0.3));
    }
    SparseVec::from_entries(entries)
}

pub fn random_side(p: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..p).map(|_| r.random_range(-1.0..1.0)).collect()
}

/// Loss of the forward pass + masked α/β loss + λ‖W‖².
pub fn pipeline_loss(
    m: &AutoencoderModel,
    input: &SparseVec,
    side: Option<&[f64]>,
    target: &SparseVec,
    mask: &CorruptionMask,
    cfg: &LossConfig,
) -> f64 {
    let (out, _) = m.forward(input.as_row(), side).unwrap();
    loss(&out, target.as_row(), mask, cfg, m.weight_sq_norm()).unwrap()
}

pub fn pipeline_gradient(
    m: &AutoencoderModel,
    input: &SparseVec,
    side: Option<&[f64]>,
    target: &SparseVec,
    mask: &CorruptionMask,
    cfg: &LossConfig,
) -> Params {
    let (out, trace) = m.forward(input.as_row(), side).unwrap();
    let g = loss_gradient(&out, target.as_row(), mask, cfg).unwrap();
    let mut grads = m.backward(&trace, g.as_row()).unwrap();
    grads.add_weight_decay(m.params(), cfg.lambda);
    grads
}

/// Max relative error between analytic and central-difference gradients over all parameters.
///
/// The denominator is floored at 1e-4 so that entries whose true gradient is ~0
/// are judged on absolute error.
pub fn gradient_check(seed: u64, n: usize, k: usize, p: usize, hidden: Transfer, output: Transfer) -> f64 {
    let mut r = rng(seed);
    let spec = ModelSpec::new(n, k, p).with_transfers(hidden, output);
    let mut m = random_model(spec, seed);
    let target = random_sparse(n, 0.6, &mut r);
    let (input, mask) = corrupt(target.as_row(), 0.3, &mut r);
    let side = (p > 0).then(|| random_side(p, &mut r));
    let cfg = LossConfig {
        alpha: r.random_range(0.5..1.5),
        beta: r.random_range(0.1..1.0),
        mask_ratio: 0.3,
        lambda: r.random_range(0.0..0.1),
        normalize_per_row: false,
    };
    let analytic = pipeline_gradient(&m, &input, side.as_deref(), &target, &mask, &cfg);
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for block in 0..4 {
        let len = m.params().slices()[block].len();
        for i in 0..len {
            let orig = m.params().slices()[block][i];
            m.params_mut().slices_mut()[block][i] = orig + eps;
            let up = pipeline_loss(&m, &input, side.as_deref(), &target, &mask, &cfg);
            m.params_mut().slices_mut()[block][i] = orig - eps;
            let down = pipeline_loss(&m, &input, side.as_deref(), &target, &mask, &cfg);
            m.params_mut().slices_mut()[block][i] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic.slices()[block][i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
            worst = worst.max(rel);
        }
    }
    worst
}

/// Checks that values at unknown indices have no influence at all.
///
/// Returns a description of the first violation.
pub fn masking_instance(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let n = r.random_range(4..16);
    let k = r.random_range(2..8);
    let p = if r.random::<bool>() { r.random_range(0..k.min(n - 1).max(1)) } else { 0 };
    let p = if p > 0 && p < k && k < n { p } else { 0 };
    let spec = ModelSpec::new(n, k, p);
    let m = random_model(spec, seed);
    let side = (p > 0).then(|| random_side(p, &mut r));
    let dense: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let known: Vec<bool> = (0..n).map(|_| r.random::<f64>() < 0.5).collect();
    let perturbed: Vec<f64> = dense
        .iter()
        .zip(&known)
        .map(|(&v, &kn)| if kn { v } else { v + r.random_range(-50.0..50.0) })
        .collect();
    let restrict = |x: &[f64]| {
        SparseVec::from_entries((0..n).filter(|&j| known[j]).map(|j| (j, x[j])).collect())
    };
    let (t1, t2) = (restrict(&dense), restrict(&perturbed));
    let cfg = LossConfig {
        alpha: 0.9,
        beta: 0.4,
        mask_ratio: 0.3,
        lambda: 0.01,
        normalize_per_row: false,
    };
    let mask_seed = r.random::<u64>();
    let (in1, m1) = corrupt(t1.as_row(), cfg.mask_ratio, &mut rng(mask_seed));
    let (in2, m2) = corrupt(t2.as_row(), cfg.mask_ratio, &mut rng(mask_seed));
    if m1 != m2 {
        return Err("corruption mask depends on unknown entries".into());
    }
    let (o1, tr1) = m.forward(in1.as_row(), side.as_deref()).unwrap();
    let (o2, tr2) = m.forward(in2.as_row(), side.as_deref()).unwrap();
    if o1 != o2 {
        return Err("predictions depend on unknown inputs".into());
    }
    // predictions at unknown outputs are free to be anything
    let mut o_perturbed = o1.clone();
    for j in 0..n {
        if !known[j] {
            o_perturbed[j] += r.random_range(-50.0..50.0);
        }
    }
    let w = m.weight_sq_norm();
    let l1 = loss(&o1, t1.as_row(), &m1, &cfg, w).unwrap();
    let l2 = loss(&o_perturbed, t2.as_row(), &m2, &cfg, w).unwrap();
    if l1 != l2 {
        return Err(format!("loss changed: {l1} vs {l2}"));
    }
    let g1 = loss_gradient(&o1, t1.as_row(), &m1, &cfg).unwrap();
    let g2 = loss_gradient(&o_perturbed, t2.as_row(), &m2, &cfg).unwrap();
    if g1 != g2 {
        return Err("output gradient changed".into());
    }
    let p1 = m.backward(&tr1, g1.as_row()).unwrap();
    let p2 = m.backward(&tr2, g2.as_row()).unwrap();
    if p1 != p2 {
        return Err("parameter gradient changed".into());
    }
    let dw = k + p;
    for j in (0..n).filter(|&j| !known[j]) {
        if p1.decoder[j * dw..(j + 1) * dw].iter().any(|&g| g != 0.0) || p1.decoder_bias[j] != 0.0 {
            return Err(format!("unknown output {j} received a gradient"));
        }
    }
    Ok(())
}

#[derive(Debug)]
pub struct PcaContract {
    pub orthogonality: f64,
    pub eigenvalue_rel: f64,
    pub reconstruction: f64,
}

/// Random sparse count matrix, `entities x tags`.
pub fn random_tags(entities: usize, tags: usize, seed: u64) -> TagMatrix {
    let mut r = rng(seed);
    let mut t = Vec::new();
    for e in 0..entities {
        for g in 0..tags {
            if r.random::<f64>() < 0.3 {
                t.push((e, g, r.random_range(1..6) as f64));
            }
        }
    }
    let counts = SparseRatings::from_triplets(entities, tags, Orientation::ItemRows, &t).unwrap();
    let mut ids = cfn::ingest::IdMap::new();
    for g in 0..tags {
        ids.intern(&format!("tag{g}"));
    }
    TagMatrix { counts, tags: ids }
}

/// PCA contract measured against singular values of T computed independently.
pub fn pca_contract(entities: usize, tags: usize, seed: u64, solver: PcaSolver) -> PcaContract {
    let tm = random_tags(entities, tags, seed);
    let dense = DMatrix::from_row_slice(entities, tags, &tm.to_dense().concat());
    let rank = dense.rank(1e-9);
    let y = pca_compress_with(&tm.counts, rank, solver).unwrap();
    let ym = DMatrix::from_fn(entities, rank, |e, c| y.row(e)[c]);

    let gram = ym.transpose() * &ym;
    let mut sv: Vec<f64> = dense.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let mut orthogonality = 0.0f64;
    let mut eigenvalue_rel = 0.0f64;
    for i in 0..rank {
        let ev = sv[i] * sv[i];
        eigenvalue_rel = eigenvalue_rel.max((gram[(i, i)] - ev).abs() / ev);
        for j in 0..rank {
            if i != j {
                let norm = (gram[(i, i)] * gram[(j, j)]).sqrt();
                orthogonality = orthogonality.max(gram[(i, j)].abs() / norm);
            }
        }
    }
    let ttt = &dense * dense.transpose();
    let yyt = &ym * ym.transpose();
    let scale = ttt.amax().max(1.0);
    PcaContract {
        orthogonality,
        eigenvalue_rel,
        reconstruction: (ttt - yyt).amax() / scale,
    }
}

pub fn linear_spec(n: usize, k: usize) -> ModelSpec {
    ModelSpec::new(n, k, 0).with_transfers(Transfer::Identity, Transfer::Identity)
}

pub fn random_linear_equivalence(seed: u64) -> EquivalenceReport {
    let mut r = rng(seed);
    let n = r.random_range(8..25);
    let k = r.random_range(1..6);
    let m = random_model(linear_spec(n, k), seed);
    let rows_n = r.random_range(k + 3..40);
    let rows: Vec<SparseVec> = (0..rows_n).map(|_| random_sparse(n, 0.4, &mut r)).collect();
    let rows = SparseRatings::from_rows(n, Orientation::ItemRows, rows).unwrap();
    equivalence_check(&m, &rows, 1e-10, 1e-8).unwrap()
}

/// Trains a linear 30x20, k=4 model on synthetic data and checks the factorization.
pub fn trained_linear_equivalence(seed: u64) -> EquivalenceReport {
    let data = low_rank(30, 20, 3, 0.5, 0.05, seed).unwrap();
    let rows = data.observed.map_values(|_, _, v| v * 0.3);
    let m = AutoencoderModel::init(linear_spec(20, 4), seed).unwrap();
    let cfg = TrainConfig {
        epochs: 30,
        learning_rate: 0.05,
        batch_size: 5,
        rng_seed: seed,
        threads: Some(1),
        loss: LossConfig {
            alpha: 1.0,
            beta: 1.0,
            mask_ratio: 0.0,
            lambda: 0.0,
            normalize_per_row: false,
        },
        ..TrainConfig::default()
    };
    let (m, _) = train(m, &rows, None, &cfg, None).unwrap();
    equivalence_check(&m, &rows, 1e-10, 1e-8).unwrap()
}

#[derive(Debug)]
pub struct Parity {
    pub cfn_rmse: f64,
    pub als_rmse: f64,
    pub als_monotone: bool,
    pub cfn_lambda: f64,
}

/// Linear CFN against ALS-WR on a 200x150 rank-5 matrix with 30% of entries observed.
pub fn synthetic_parity(seed: u64) -> Parity {
    let data = low_rank(200, 150, 5, 0.3, 0.0, seed).unwrap();
    let lo = data.dense.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.dense.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = RatingScale::new(lo, hi).unwrap();

    let mut als_best = (f64::INFINITY, true);
    for lambda in [0.001, 0.01, 0.1] {
        let (model, rep) = als_wr(&data.observed, 5, lambda, 25, seed).unwrap();
        let est = MfEstimator {
            model,
            orientation: Orientation::UserRows,
            offset: 0.0,
            clip: None,
        };
        let e = rmse(&est, &data.hidden).unwrap();
        als_best.1 &= rep.is_monotone(1e-12);
        if e < als_best.0 {
            als_best.0 = e;
        }
    }

    let mut cfn_best = (f64::INFINITY, 0.0);
    for lambda in [0.0, 1e-4, 1e-3] {
        let settings = CfnSettings {
            orientation: Orientation::ItemRows,
            bottleneck: 5,
            hidden: Transfer::Identity,
            output: Transfer::Identity,
            init_seed: seed,
            train: TrainConfig {
                epochs: 400,
                batch_size: 10,
                learning_rate: 0.06,
                momentum: 0.9,
                rng_seed: seed,
                threads: Some(1),
                loss: LossConfig {
                    alpha: 1.0,
                    beta: 1.0,
                    mask_ratio: 0.0,
                    lambda,
                    normalize_per_row: false,
                },
                ..TrainConfig::default()
            },
        };
        let (est, _) = fit_cfn(&data.observed, &scale, None, &settings, None, None).unwrap();
        let e = rmse(&est, &data.hidden).unwrap();
        if e < cfn_best.0 {
            cfn_best = (e, lambda);
        }
    }
    Parity {
        cfn_rmse: cfn_best.0,
        als_rmse: als_best.0,
        als_monotone: als_best.1,
        cfn_lambda: cfn_best.1,
    }
}

/// Best fitness after 50 generations with the default GA settings and whether
/// the best-so-far curve never increased.
pub fn ga_quadratic(seed: u64) -> (f64, bool) {
    let space = GeneSpace::default();
    let mut r = rng(seed);
    let mut unit = [0.0; 7];
    for u in unit.iter_mut() {
        *u = r.random_range(0.1..0.9);
    }
    let target = space.from_unit(&unit);
    let f = quadratic_fitness(&space, &target);
    let cfg = GaConfig {
        population: 20,
        sigma: 0.08,
        lambdas: [0.1, 0.2, 0.3, 0.4],
        generations: 50,
        seed,
        workers: Some(1),
    };
    let out = tune::run(&cfg, &space, &f, None, false).unwrap();
    let monotone = out.best_so_far.windows(2).all(|w| w[1] <= w[0]);
    (out.best.fitness, monotone)
}

/// Integer 1..5 ratings with low-rank structure, written as `user<TAB>item<TAB>rating`.
pub fn write_synthetic_ratings(path: &Path, users: usize, items: usize, density: f64, seed: u64) {
    let data = cfn::synthetic::rescale(&low_rank(users, items, 4, density, 0.0, seed).unwrap(), 1.0, 5.0);
    let mut text = String::new();
    for (u, i, v) in data.observed.iter() {
        writeln!(text, "u{u}\ti{i}\t{}", v.round()).unwrap();
    }
    std::fs::write(path, text).unwrap();
}

/// Small single-threaded experiment over synthetic ratings in `dir`.
pub fn small_experiment(dir: &Path, seed: u64) -> cfn::config::ExperimentConfig {
    let ratings = dir.join("ratings.tsv");
    if !ratings.exists() {
        write_synthetic_ratings(&ratings, 60, 40, 0.4, seed);
    }
    let mut cfg = cfn::config::ExperimentConfig::default();
    cfg.output = dir.join("run");
    cfg.seed = seed;
    cfg.threads = Some(1);
    cfg.data.ratings = ratings;
    cfg.data.scale = Some([1.0, 5.0]);
    cfg.model.bottleneck = 8;
    cfg.train.epochs = 5;
    cfg.train.batch_size = 8;
    cfg.train.learning_rate = 0.5;
    cfg.tune.epochs = 2;
    cfg
}
