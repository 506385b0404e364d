//! Seeded synthetic rating matrices with known structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::ratings::{Orientation, SparseRatings};

/// A dense low-rank matrix `A Bᵀ` and a random subset of its entries.
#[derive(Debug, Clone)]
pub struct LowRank {
    /// Row-major `n_rows x n_cols`.
    pub dense: Vec<f64>,
    pub n_rows: usize,
    pub n_cols: usize,
    /// The observed entries (user-row layout).
    pub observed: SparseRatings,
    /// The remaining entries.
    pub hidden: SparseRatings,
}

impl LowRank {
    pub fn value(&self, r: usize, c: usize) -> f64 {
        self.dense[r * self.n_cols + c]
    }
}

/// Rank-`rank` matrix with standard normal factors scaled by `1/√rank`; each
/// entry is observed with probability `density`, plus optional Gaussian noise.
pub fn low_rank(n_rows: usize, n_cols: usize, rank: usize, density: f64, noise: f64, seed: u64) -> Result<LowRank> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let scale = 1.0 / (rank.max(1) as f64).sqrt();
    let a: Vec<f64> = (0..n_rows * rank).map(|_| normal.sample(&mut rng) * scale).collect();
    let b: Vec<f64> = (0..n_cols * rank).map(|_| normal.sample(&mut rng)).collect();
    let mut dense = vec![0.0; n_rows * n_cols];
    for r in 0..n_rows {
        for c in 0..n_cols {
            dense[r * n_cols + c] = (0..rank).map(|f| a[r * rank + f] * b[c * rank + f]).sum();
        }
    }
    let mut observed = Vec::new();
    let mut hidden = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            let v = dense[r * n_cols + c];
            if rng.random::<f64>() < density {
                let eps = if noise > 0.0 { noise * normal.sample(&mut rng) } else { 0.0 };
                observed.push((r, c, v + eps));
            } else {
                hidden.push((r, c, v));
            }
        }
    }
    Ok(LowRank {
        dense,
        n_rows,
        n_cols,
        observed: SparseRatings::from_triplets(n_rows, n_cols, Orientation::UserRows, &observed)?,
        hidden: SparseRatings::from_triplets(n_rows, n_cols, Orientation::UserRows, &hidden)?,
    })
}

/// Maps every value affinely into `[lo, hi]` using the dense matrix's range.
pub fn rescale(m: &LowRank, lo: f64, hi: f64) -> LowRank {
    let min = m.dense.iter().copied().fold(f64::INFINITY, f64::min);
    let max = m.dense.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f = |v: f64| lo + (v - min) / (max - min).max(f64::MIN_POSITIVE) * (hi - lo);
    LowRank {
        dense: m.dense.iter().map(|&v| f(v)).collect(),
        n_rows: m.n_rows,
        n_cols: m.n_cols,
        observed: m.observed.map_values(|_, _, v| f(v).clamp(lo, hi)),
        hidden: m.hidden.map_values(|_, _, v| f(v)),
    }
}
