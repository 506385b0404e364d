//! Matrix factorization baseline (ALS with weighted-λ) and the linear-autoencoder check.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CfnError, Result};
use crate::eval::RatingEstimator;
use crate::net::{decompose_linear, AutoencoderModel};
use crate::ratings::{transpose, Orientation, RatingScale, SparseRatings};

/// `R ≈ U Vᵀ`, with `U` over the rows and `V` over the columns of the training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MFModel {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub rank: usize,
    pub lambda: f64,
}

impl MFModel {
    pub fn zeros(n_rows: usize, n_cols: usize, rank: usize, lambda: f64) -> Self {
        MFModel {
            u: vec![0.0; n_rows * rank],
            v: vec![0.0; n_cols * rank],
            n_rows,
            n_cols,
            rank,
            lambda,
        }
    }

    pub fn u_row(&self, i: usize) -> &[f64] {
        &self.u[i * self.rank..(i + 1) * self.rank]
    }

    pub fn v_row(&self, j: usize) -> &[f64] {
        &self.v[j * self.rank..(j + 1) * self.rank]
    }

    pub fn all_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlsReport {
    /// Objective after every half-step (U update, then V update, per iteration).
    pub objective: Vec<f64>,
}

impl AlsReport {
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.objective
            .windows(2)
            .all(|w| w[1] <= w[0] + slack * w[0].abs().max(1.0))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ (r - u·v)² + λ (Σ_i n_i ‖u_i‖² + Σ_j n_j ‖v_j‖²)` over the stored entries.
pub fn als_objective(model: &MFModel, train: &SparseRatings) -> f64 {
    let mut sq = 0.0;
    for (i, j, r) in train.iter() {
        let e = r - dot(model.u_row(i), model.v_row(j));
        sq += e * e;
    }
    let reg_u: f64 = train
        .row_counts()
        .iter()
        .enumerate()
        .map(|(i, &n)| n as f64 * dot(model.u_row(i), model.u_row(i)))
        .sum();
    let reg_v: f64 = train
        .col_counts()
        .iter()
        .enumerate()
        .map(|(j, &n)| n as f64 * dot(model.v_row(j), model.v_row(j)))
        .sum();
    sq + model.lambda * (reg_u + reg_v)
}

/// Exact ridge solve for every row of `rows` against the fixed factor `fixed`.
fn solve_half(rows: &SparseRatings, fixed: &[f64], k: usize, lambda: f64) -> Vec<f64> {
    let solved: Vec<Vec<f64>> = (0..rows.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = rows.row(i);
            if row.is_empty() {
                return vec![0.0; k];
            }
            let mut a = DMatrix::<f64>::zeros(k, k);
            let mut b = DVector::<f64>::zeros(k);
            for (j, r) in row.iter() {
                let f = &fixed[j * k..(j + 1) * k];
                for p in 0..k {
                    b[p] += r * f[p];
                    for q in 0..=p {
                        a[(p, q)] += f[p] * f[q];
                    }
                }
            }
            let reg = lambda * row.len() as f64;
            for p in 0..k {
                a[(p, p)] += reg;
                for q in 0..p {
                    a[(q, p)] = a[(p, q)];
                }
            }
            ridge_solve(a, b, i)
        })
        .collect();
    solved.concat()
}

fn ridge_solve(a: DMatrix<f64>, b: DVector<f64>, row: usize) -> Vec<f64> {
    if let Some(ch) = a.clone().cholesky() {
        return ch.solve(&b).as_slice().to_vec();
    }
    warn!("singular {0}x{0} system for row {row}; adding 1e-10 jitter", a.nrows());
    let k = a.nrows();
    let jittered = a + DMatrix::<f64>::identity(k, k) * 1e-10;
    match jittered.clone().cholesky() {
        Some(ch) => ch.solve(&b).as_slice().to_vec(),
        None => jittered
            .lu()
            .solve(&b)
            .map(|x| x.as_slice().to_vec())
            .unwrap_or_else(|| vec![0.0; k]),
    }
}

/// Alternating least squares with the ridge term of each row scaled by its rating count.
///
/// `V` starts uniform in `[-0.01, 0.01]`; each iteration solves for `U` then `V`.
pub fn als_wr(
    train: &SparseRatings,
    rank: usize,
    lambda: f64,
    iterations: usize,
    seed: u64,
) -> Result<(MFModel, AlsReport)> {
    if rank == 0 {
        return Err(CfnError::Config("rank must be at least 1".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(CfnError::Config(format!("lambda must be >= 0, got {lambda}")));
    }
    let mut model = MFModel::zeros(train.n_rows(), train.n_cols(), rank, lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in model.v.iter_mut() {
        *x = rng.random_range(-0.01..=0.01);
    }
    let by_col = transpose(train);
    let mut report = AlsReport::default();
    for _ in 0..iterations {
        model.u = solve_half(train, &model.v, rank, lambda);
        report.objective.push(als_objective(&model, train));
        model.v = solve_half(&by_col, &model.u, rank, lambda);
        report.objective.push(als_objective(&model, train));
        if !model.all_finite() {
            return Err(CfnError::NonFinite("ALS factors".into()));
        }
    }
    Ok((model, report))
}

/// `u_i · v_j` in the coordinates of the training matrix.
pub fn mf_predict(model: &MFModel, i: usize, j: usize) -> Result<f64> {
    if i >= model.n_rows || j >= model.n_cols {
        return Err(CfnError::OutOfRange(format!(
            "({i}, {j}) outside the {}x{} factorization",
            model.n_rows, model.n_cols
        )));
    }
    Ok(dot(model.u_row(i), model.v_row(j)))
}

/// Estimator over a factorization trained on `orientation`-major data, with optional
/// per-row offsets added back and clipping to a rating scale.
#[derive(Debug, Clone)]
pub struct MfEstimator {
    pub model: MFModel,
    pub orientation: Orientation,
    pub offset: f64,
    pub clip: Option<RatingScale>,
}

impl RatingEstimator for MfEstimator {
    fn predict(&self, user: usize, item: usize) -> Result<f64> {
        let (i, j) = match self.orientation {
            Orientation::UserRows => (user, item),
            Orientation::ItemRows => (item, user),
        };
        let v = mf_predict(&self.model, i, j)? + self.offset;
        Ok(match &self.clip {
            Some(s) => v.clamp(s.min_rating, s.max_rating),
            None => v,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub max_deviation: f64,
    /// σ_{k+2} / σ_1 of the stacked predictions (0 when there are fewer singular values).
    pub singular_ratio: f64,
    pub bottleneck: usize,
    pub passed: bool,
}

/// Verifies that a linear autoencoder is a rank-(k+1) factorization over `rows`.
///
/// Refuses models with side information or non-identity transfers.
pub fn equivalence_check(
    model: &AutoencoderModel,
    rows: &SparseRatings,
    deviation_tol: f64,
    ratio_tol: f64,
) -> Result<EquivalenceReport> {
    let dec = decompose_linear(model, rows)?;
    let recon = dec.reconstruct();
    let n = model.input_dim();
    let m = rows.n_rows();
    let mut stacked = DMatrix::<f64>::zeros(m, n);
    let mut max_deviation = 0.0f64;
    for r in 0..m {
        let (out, _) = model.forward(rows.row(r), None)?;
        for j in 0..n {
            stacked[(r, j)] = out[j];
            max_deviation = max_deviation.max((out[j] - recon[r][j]).abs());
        }
    }
    let k = model.bottleneck();
    let mut sv: Vec<f64> = stacked.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let singular_ratio = match (sv.first(), sv.get(k + 1)) {
        (Some(&s1), Some(&sk2)) if s1 > 0.0 => sk2 / s1,
        _ => 0.0,
    };
    Ok(EquivalenceReport {
        max_deviation,
        singular_ratio,
        bottleneck: k,
        passed: max_deviation < deviation_tol && singular_ratio < ratio_tol,
    })
}
