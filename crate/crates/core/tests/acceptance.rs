//! One PASS/FAIL line per acceptance criterion.
//!
//! Criteria 1-3 need the MovieLens-1M files (`ratings.dat`, `movies.dat`) in
//! `$CFN_ML1M_DIR` or `data/ml-1m` at the workspace root. Set
//! `CFN_ACCEPTANCE_STRICT=1` to exit non-zero when any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use cfn::config::ExperimentConfig;
use cfn::experiment::{cmd_evaluate, cmd_split, cmd_train};
use cfn::sideinfo::PcaSolver;
use cfn::Transfer;
use common::*;
use rand::Rng;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ml1m_dir() -> PathBuf {
    std::env::var_os("CFN_ML1M_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ml-1m"))
}

fn require_ml1m() -> Result<PathBuf, String> {
    let dir = ml1m_dir();
    if dir.join("ratings.dat").exists() {
        Ok(dir)
    } else {
        Err(format!("MovieLens-1M not found at {} (set CFN_ML1M_DIR)", dir.display()))
    }
}

fn ml_config(data: &Path, out: &Path, seed: u64, orientation: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.data.ratings = data.join("ratings.dat");
    cfg.data.scale = Some([1.0, 5.0]);
    cfg.output = out.to_path_buf();
    cfg.seed = seed;
    cfg.model.orientation = orientation.into();
    cfg.model.bottleneck = 600;
    cfg
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let data = require_ml1m()?;
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut rmse = Vec::new();
    let start = Instant::now();
    for o in ["item", "user"] {
        let cfg = ml_config(&data, &tmp.path().join(o), 1, o);
        cmd_split(&cfg).map_err(err)?;
        cmd_train(&cfg).map_err(err)?;
        rmse.push(cmd_evaluate(&cfg, None).map_err(err)?.global_rmse);
    }
    let pass = rmse[0] <= 0.86 && rmse[1] <= 0.88;
    Ok((
        pass,
        format!(
            "V-CFN {:.4} (<= 0.86), U-CFN {:.4} (<= 0.88), {:.0}s",
            rmse[0],
            rmse[1],
            start.elapsed().as_secs_f64()
        ),
    ))
}

fn final_val_rmse(cfg: &ExperimentConfig) -> Result<f64, String> {
    let out = cmd_train(cfg).map_err(err)?;
    out.report
        .epochs
        .last()
        .and_then(|e| e.val_rmse)
        .ok_or_else(|| "no validation RMSE recorded".to_string())
}

fn criterion_2() -> Outcome {
    let data = require_ml1m()?;
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut wins = 0;
    let mut detail = Vec::new();
    for seed in 1..=3 {
        let mut mixed = ml_config(&data, &tmp.path().join(format!("mixed{seed}")), seed, "item");
        mixed.train.validation_fraction = 0.1;
        cmd_split(&mixed).map_err(err)?;
        let mut supervised = mixed.clone();
        supervised.loss.beta = 0.0;
        let m = final_val_rmse(&mixed)?;
        let s = final_val_rmse(&supervised)?;
        wins += usize::from(m <= s);
        detail.push(format!("seed {seed}: mixed {m:.4} vs supervised {s:.4}"));
    }
    Ok((wins >= 2, detail.join("; ")))
}

fn criterion_3() -> Outcome {
    let data = require_ml1m()?;
    if !data.join("movies.dat").exists() {
        return Err(format!("movies.dat missing in {}", data.display()));
    }
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut wins = 0;
    let mut detail = Vec::new();
    for seed in 1..=3 {
        let plain = ml_config(&data, &tmp.path().join(format!("plain{seed}")), seed, "item");
        cmd_split(&plain).map_err(err)?;
        let mut side = plain.clone();
        side.side.categories = Some(data.join("movies.dat"));
        let bottom = |cfg: &ExperimentConfig| -> Result<f64, String> {
            cmd_train(cfg).map_err(err)?;
            let q = cmd_evaluate(cfg, None).map_err(err)?.quintiles.ok_or("no quintiles")?;
            Ok(q[0].rmse)
        };
        let b = bottom(&plain)?;
        let bs = bottom(&side)?;
        wins += usize::from(bs <= b + 0.002);
        detail.push(format!("seed {seed}: V-CFN {b:.4} vs V-CFN++ {bs:.4}"));
    }
    Ok((wins >= 2, detail.join("; ")))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let mut r = rng(1000 + i);
        let n = r.random_range(6..=12);
        let k = r.random_range(3..n);
        let p = if i % 2 == 0 { 0 } else { r.random_range(1..k) };
        let output = if i % 4 == 3 { Transfer::Tanh } else { Transfer::Identity };
        worst = worst.max(gradient_check(i, n, k, p, Transfer::Tanh, output));
    }
    Ok((worst < 1e-5, format!("max relative error {worst:.2e} over 20 instances")))
}

fn criterion_5() -> Outcome {
    for seed in 0..1000 {
        if let Err(e) = masking_instance(seed) {
            return Ok((false, format!("instance {seed}: {e}")));
        }
    }
    Ok((true, "1000 instances, exact equality".into()))
}

fn criterion_6() -> Outcome {
    let mut reports: Vec<_> = (0..10).map(random_linear_equivalence).collect();
    reports.extend((0..3).map(trained_linear_equivalence));
    let dev = reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let ratio = reports.iter().map(|r| r.singular_ratio).fold(0.0, f64::max);
    let pass = reports.iter().all(|r| r.passed);
    Ok((pass, format!("13 models, max deviation {dev:.2e}, max singular ratio {ratio:.2e}")))
}

fn criterion_7() -> Outcome {
    let p = synthetic_parity(1);
    let pass = p.als_monotone && p.cfn_rmse <= 1.15 * p.als_rmse;
    Ok((
        pass,
        format!(
            "linear CFN {:.4} (lambda {}) vs ALS-WR {:.4}, ALS monotone {}",
            p.cfn_rmse, p.cfn_lambda, p.als_rmse, p.als_monotone
        ),
    ))
}

fn criterion_8() -> Outcome {
    let cs: Vec<_> = (0..10).map(|s| pca_contract(40, 25, s, PcaSolver::Auto)).collect();
    let o = cs.iter().map(|c| c.orthogonality).fold(0.0, f64::max);
    let e = cs.iter().map(|c| c.eigenvalue_rel).fold(0.0, f64::max);
    let r = cs.iter().map(|c| c.reconstruction).fold(0.0, f64::max);
    Ok((
        o < 1e-8 && e < 1e-6 && r < 1e-8,
        format!("orthogonality {o:.1e}, eigenvalues {e:.1e}, reconstruction {r:.1e}"),
    ))
}

fn criterion_9() -> Outcome {
    let runs: Vec<_> = (1..=5).map(ga_quadratic).collect();
    let worst = runs.iter().map(|r| r.0).fold(0.0, f64::max);
    let monotone = runs.iter().all(|r| r.1);
    Ok((
        worst < 1e-2 && monotone,
        format!("worst best-fitness {worst:.2e} over 5 runs, monotone {monotone}"),
    ))
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        std::fs::create_dir_all(&dir).map_err(err)?;
        let cfg = small_experiment(&dir, 11);
        cmd_split(&cfg).map_err(err)?;
        let out = cmd_train(&cfg).map_err(err)?;
        bytes.push(std::fs::read(out.checkpoint).map_err(err)?);
    }
    Ok((bytes[0] == bytes[1], format!("{} checkpoint bytes", bytes[0].len())))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("ML-1M reproduction", criterion_1),
        ("loss ablation ordering", criterion_2),
        ("side information cold start", criterion_3),
        ("gradient correctness", criterion_4),
        ("masking semantics", criterion_5),
        ("MF correspondence", criterion_6),
        ("synthetic parity with ALS-WR", criterion_7),
        ("PCA contract", criterion_8),
        ("GA convergence", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, e),
        };
        failed += usize::from(!pass);
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var_os("CFN_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
