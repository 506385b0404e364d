//! Sparse rating storage and the preprocessing applied before training.
//!
//! Ratings live in a compressed-sparse-row matrix whose rows are either users
//! (U-CFN inputs) or items (V-CFN inputs). Missing entries are *unknown*, not
//! zero: every operation iterates only stored entries.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CfnError, Result};

/// Source interval of the affine map onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingScale {
    pub min_rating: f64,
    pub max_rating: f64,
}

impl RatingScale {
    pub fn new(min_rating: f64, max_rating: f64) -> Result<Self> {
        if !(min_rating.is_finite() && max_rating.is_finite() && min_rating < max_rating) {
            return Err(CfnError::Config(format!(
                "rating scale requires min < max, got [{min_rating}, {max_rating}]"
            )));
        }
        Ok(RatingScale {
            min_rating,
            max_rating,
        })
    }

    /// MovieLens-1M stars.
    pub fn one_to_five() -> Self {
        RatingScale {
            min_rating: 1.0,
            max_rating: 5.0,
        }
    }

    /// MovieLens-10M/20M half stars.
    pub fn half_to_five() -> Self {
        RatingScale {
            min_rating: 0.5,
            max_rating: 5.0,
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.min_rating && r <= self.max_rating
    }

    pub fn normalize(&self, r: f64) -> f64 {
        2.0 * (r - self.min_rating) / (self.max_rating - self.min_rating) - 1.0
    }

    pub fn denormalize(&self, v: f64) -> f64 {
        (v + 1.0) * 0.5 * (self.max_rating - self.min_rating) + self.min_rating
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min_rating + self.max_rating)
    }

    pub fn range(&self) -> f64 {
        self.max_rating - self.min_rating
    }
}

/// Which entity the rows of a [`SparseRatings`] represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Rows are users, columns are items (U-CFN inputs).
    UserRows,
    /// Rows are items, columns are users (V-CFN inputs).
    ItemRows,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::UserRows => Orientation::ItemRows,
            Orientation::ItemRows => Orientation::UserRows,
        }
    }
}

/// Borrowed view of one sparse row: strictly increasing column indices and their values.
#[derive(Debug, Clone, Copy)]
pub struct SparseRow<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl<'a> SparseRow<'a> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, col: usize) -> Option<f64> {
        self.indices
            .binary_search(&col)
            .ok()
            .map(|pos| self.values[pos])
    }

    /// Zero-filled dense copy of length `dim`.
    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (c, v) in self.iter() {
            out[c] = v;
        }
        out
    }
}

/// Owned sparse vector, used for corrupted inputs and ad-hoc rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn as_row(&self) -> SparseRow<'_> {
        SparseRow {
            indices: &self.indices,
            values: &self.values,
        }
    }

    /// Builds a vector from unordered entries; later duplicates win.
    pub fn from_entries(mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|&(c, _)| c);
        let mut out = SparseVec::default();
        for (c, v) in entries {
            if out.indices.last() == Some(&c) {
                *out.values.last_mut().unwrap() = v;
            } else {
                out.indices.push(c);
                out.values.push(v);
            }
        }
        out
    }
}

impl From<SparseRow<'_>> for SparseVec {
    fn from(row: SparseRow<'_>) -> Self {
        SparseVec {
            indices: row.indices.to_vec(),
            values: row.values.to_vec(),
        }
    }
}

/// Compressed sparse rows. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRatings {
    n_rows: usize,
    n_cols: usize,
    orientation: Orientation,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRatings {
    pub fn empty(n_rows: usize, n_cols: usize, orientation: Orientation) -> Self {
        SparseRatings {
            n_rows,
            n_cols,
            orientation,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds the matrix from `(row, col, value)` triplets in any order.
    ///
    /// A repeated `(row, col)` keeps the last occurrence in input order.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        orientation: Orientation,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(CfnError::OutOfRange(format!(
                    "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
        }
        // stable sort keeps input order among duplicates
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));

        let mut indptr = vec![0usize; n_rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut duplicates = 0usize;
        for t in order {
            let (r, c, v) = triplets[t];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() = v;
                duplicates += 1;
                continue;
            }
            last = Some((r, c));
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
        }
        if duplicates > 0 {
            warn!("{duplicates} duplicate (row, col) entries; kept the last occurrence of each");
        }
        for r in 0..n_rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(SparseRatings {
            n_rows,
            n_cols,
            orientation,
            indptr,
            indices,
            values,
        })
    }

    /// Builds a matrix from already-sorted rows.
    pub fn from_rows(n_cols: usize, orientation: Orientation, rows: Vec<SparseVec>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.indices.len() != row.values.len() {
                return Err(CfnError::Dimension(format!("row {r} has mismatched index/value lengths")));
            }
            for w in row.indices.windows(2) {
                if w[0] >= w[1] {
                    return Err(CfnError::Precondition(format!(
                        "row {r} column indices are not strictly increasing"
                    )));
                }
            }
            if let Some(&c) = row.indices.last() {
                if c >= n_cols {
                    return Err(CfnError::OutOfRange(format!("row {r} column {c} >= {n_cols}")));
                }
            }
            indices.extend_from_slice(&row.indices);
            values.extend_from_slice(&row.values);
            indptr.push(indices.len());
        }
        Ok(SparseRatings {
            n_rows: rows.len(),
            n_cols,
            orientation,
            indptr,
            indices,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> SparseRow<'_> {
        let (s, e) = (self.indptr[r], self.indptr[r + 1]);
        SparseRow {
            indices: &self.indices[s..e],
            values: &self.values[s..e],
        }
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        self.row(r).get(c)
    }

    /// All entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).iter().map(move |(c, v)| (r, c, v)))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_counts(&self) -> Vec<usize> {
        (0..self.n_rows).map(|r| self.row_nnz(r)).collect()
    }

    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_cols];
        for &c in &self.indices {
            counts[c] += 1;
        }
        counts
    }

    /// Same sparsity pattern, values mapped entrywise.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for r in 0..self.n_rows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                out.values[p] = f(r, self.indices[p], self.values[p]);
            }
        }
        out
    }

    /// Returns a copy with extra rows/cols so that it is at least `n_rows x n_cols`.
    pub fn resized(&self, n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_rows < self.n_rows || n_cols < self.n_cols {
            return Err(CfnError::Dimension(format!(
                "cannot shrink a {}x{} matrix to {n_rows}x{n_cols}",
                self.n_rows, self.n_cols
            )));
        }
        let mut out = self.clone();
        out.n_cols = n_cols;
        let nnz = self.nnz();
        out.indptr.resize(n_rows + 1, nnz);
        out.n_rows = n_rows;
        Ok(out)
    }

    /// Returns a copy with one row replaced.
    pub fn with_row(&self, r: usize, row: &SparseVec) -> Result<Self> {
        if r >= self.n_rows {
            return Err(CfnError::OutOfRange(format!("row {r} >= {}", self.n_rows)));
        }
        let rows: Vec<SparseVec> = (0..self.n_rows)
            .map(|i| if i == r { row.clone() } else { self.row(i).into() })
            .collect();
        SparseRatings::from_rows(self.n_cols, self.orientation, rows)
    }
}

/// Per-row means subtracted by [`unbias`], kept for re-addition at prediction time.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasModel {
    pub global_mean: f64,
    pub row_means: Vec<f64>,
    pub row_counts: Vec<usize>,
}

impl BiasModel {
    /// Bias for a row; rows without training entries fall back to zero.
    pub fn row_bias(&self, r: usize) -> f64 {
        match self.row_counts.get(r) {
            Some(&n) if n > 0 => self.row_means[r],
            _ => 0.0,
        }
    }

    pub fn is_cold(&self, r: usize) -> bool {
        self.row_counts.get(r).copied().unwrap_or(0) == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub rng_seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, rng_seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction <= 1.0) {
            return Err(CfnError::Config(format!(
                "train_fraction must lie in (0, 1], got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            rng_seed,
        })
    }
}

/// Maps every stored rating onto `[-1, 1]`.
pub fn normalize(ratings: &SparseRatings, scale: &RatingScale) -> Result<SparseRatings> {
    for (r, c, v) in ratings.iter() {
        if !scale.contains(v) {
            return Err(CfnError::OutOfScale {
                row: r,
                col: c,
                value: v,
                min: scale.min_rating,
                max: scale.max_rating,
            });
        }
    }
    Ok(ratings.map_values(|_, _, v| scale.normalize(v)))
}

pub fn denormalize(ratings: &SparseRatings, scale: &RatingScale) -> SparseRatings {
    ratings.map_values(|_, _, v| scale.denormalize(v))
}

/// Subtracts each row's mean over its known entries.
pub fn unbias(train: &SparseRatings) -> (SparseRatings, BiasModel) {
    let row_counts = train.row_counts();
    let row_means: Vec<f64> = (0..train.n_rows())
        .map(|r| {
            let row = train.row(r);
            if row.is_empty() {
                0.0
            } else {
                row.values.iter().sum::<f64>() / row.len() as f64
            }
        })
        .collect();
    let global_mean = if train.nnz() == 0 {
        0.0
    } else {
        train.values().iter().sum::<f64>() / train.nnz() as f64
    };
    let centered = train.map_values(|r, _, v| v - row_means[r]);
    (
        centered,
        BiasModel {
            global_mean,
            row_means,
            row_counts,
        },
    )
}

/// Independent Bernoulli(train_fraction) assignment of every stored rating.
pub fn split(ratings: &SparseRatings, spec: &SplitSpec) -> (SparseRatings, SparseRatings) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut train = Vec::with_capacity(ratings.n_rows());
    let mut test = Vec::with_capacity(ratings.n_rows());
    for r in 0..ratings.n_rows() {
        let mut tr = SparseVec::default();
        let mut te = SparseVec::default();
        for (c, v) in ratings.row(r).iter() {
            let u: f64 = rng.random();
            let dst = if u < spec.train_fraction { &mut tr } else { &mut te };
            dst.indices.push(c);
            dst.values.push(v);
        }
        train.push(tr);
        test.push(te);
    }
    let build = |rows| {
        SparseRatings::from_rows(ratings.n_cols(), ratings.orientation(), rows)
            .expect("rows of a valid matrix stay valid")
    };
    (build(train), build(test))
}

/// `(i, j, r) -> (j, i, r)` with the orientation flag flipped.
pub fn transpose(ratings: &SparseRatings) -> SparseRatings {
    let n_rows = ratings.n_cols();
    let mut indptr = vec![0usize; n_rows + 1];
    for &c in &ratings.indices {
        indptr[c + 1] += 1;
    }
    for r in 0..n_rows {
        indptr[r + 1] += indptr[r];
    }
    let mut next = indptr.clone();
    let mut indices = vec![0usize; ratings.nnz()];
    let mut values = vec![0.0; ratings.nnz()];
    // row-major traversal of the source keeps each target row sorted
    for (r, c, v) in ratings.iter() {
        let p = next[c];
        indices[p] = r;
        values[p] = v;
        next[c] += 1;
    }
    SparseRatings {
        n_rows,
        n_cols: ratings.n_rows(),
        orientation: ratings.orientation().flipped(),
        indptr,
        indices,
        values,
    }
}
