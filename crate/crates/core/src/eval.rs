//! RMSE and the stratified analyses built on it.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{CfnError, Result};
use crate::ratings::{split, Orientation, SparseRatings, SplitSpec};

/// Anything that can score a `(user, item)` pair in original rating units.
pub trait RatingEstimator {
    fn predict(&self, user: usize, item: usize) -> Result<f64>;

    /// Batched prediction; implementations may share work across pairs.
    fn predict_many(&self, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        pairs.iter().map(|&(u, i)| self.predict(u, i)).collect()
    }
}

impl<F> RatingEstimator for F
where
    F: Fn(usize, usize) -> f64,
{
    fn predict(&self, user: usize, item: usize) -> Result<f64> {
        Ok(self(user, item))
    }
}

/// `(user, item, rating)` for every entry regardless of the matrix orientation.
fn user_item_entries(test: &SparseRatings) -> Vec<(usize, usize, f64)> {
    test.iter()
        .map(|(r, c, v)| match test.orientation() {
            Orientation::UserRows => (r, c, v),
            Orientation::ItemRows => (c, r, v),
        })
        .collect()
}

fn squared_errors(est: &(impl RatingEstimator + ?Sized), entries: &[(usize, usize, f64)]) -> Result<Vec<f64>> {
    let pairs: Vec<(usize, usize)> = entries.iter().map(|&(u, i, _)| (u, i)).collect();
    let preds = est.predict_many(&pairs)?;
    Ok(entries
        .iter()
        .zip(preds)
        .map(|(&(_, _, r), p)| (r - p) * (r - p))
        .collect())
}

/// Root mean square error over every stored test rating (original units).
pub fn rmse(est: &(impl RatingEstimator + ?Sized), test: &SparseRatings) -> Result<f64> {
    if test.nnz() == 0 {
        return Err(CfnError::EmptyInput("test set".into()));
    }
    let entries = user_item_entries(test);
    let se = squared_errors(est, &entries)?;
    Ok((se.iter().sum::<f64>() / se.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketRmse {
    /// Fraction interval of the item ranking, e.g. 0.0-0.2 for the sparsest fifth.
    pub lower: f64,
    pub upper: f64,
    pub n_items: usize,
    pub n_ratings: usize,
    /// NaN when the bucket has no test ratings.
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub train_fraction: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub global_rmse: f64,
    pub quintiles: Option<Vec<BucketRmse>>,
    pub sweep: Option<Vec<SweepPoint>>,
}

impl EvalReport {
    /// `section<TAB>key<TAB>n_items<TAB>n_ratings<TAB>rmse` rows.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| CfnError::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| CfnError::io(path, e);
        writeln!(w, "section\tkey\tn_items\tn_ratings\trmse").map_err(io)?;
        writeln!(w, "global\tall\t\t\t{}", self.global_rmse).map_err(io)?;
        if let Some(q) = &self.quintiles {
            for b in q {
                writeln!(
                    w,
                    "quintile\t{:.1}-{:.1}\t{}\t{}\t{}",
                    b.lower, b.upper, b.n_items, b.n_ratings, b.rmse
                )
                .map_err(io)?;
            }
        }
        if let Some(s) = &self.sweep {
            for p in s {
                writeln!(w, "density\t{}\t\t\t{}", p.train_fraction, p.rmse).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }
}

/// Assigns each item to one of five equal-cardinality buckets by ascending train count.
///
/// Ties are broken by item index. Returns the bucket of every item.
pub fn quintile_buckets(train_counts_per_item: &[usize]) -> Vec<usize> {
    let n = train_counts_per_item.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (train_counts_per_item[i], i));
    let mut bucket = vec![0; n];
    for (rank, &item) in order.iter().enumerate() {
        bucket[item] = rank * 5 / n.max(1);
    }
    bucket
}

/// Global RMSE plus RMSE per item quintile (sparsest items first).
pub fn quintile_report(
    est: &(impl RatingEstimator + ?Sized),
    test: &SparseRatings,
    train_counts_per_item: &[usize],
) -> Result<EvalReport> {
    if test.nnz() == 0 {
        return Err(CfnError::EmptyInput("test set".into()));
    }
    let bucket = quintile_buckets(train_counts_per_item);
    let entries = user_item_entries(test);
    if let Some(&(_, i, _)) = entries.iter().find(|e| e.1 >= bucket.len()) {
        return Err(CfnError::OutOfRange(format!(
            "test item {i} has no train count ({} items known)",
            bucket.len()
        )));
    }
    let se = squared_errors(est, &entries)?;
    let mut sums = [0.0f64; 5];
    let mut counts = [0usize; 5];
    for (&(_, i, _), e) in entries.iter().zip(&se) {
        sums[bucket[i]] += e;
        counts[bucket[i]] += 1;
    }
    let mut items_per = [0usize; 5];
    for &b in &bucket {
        items_per[b] += 1;
    }
    let quintiles = (0..5)
        .map(|b| BucketRmse {
            lower: b as f64 / 5.0,
            upper: (b + 1) as f64 / 5.0,
            n_items: items_per[b],
            n_ratings: counts[b],
            rmse: if counts[b] > 0 {
                (sums[b] / counts[b] as f64).sqrt()
            } else {
                f64::NAN
            },
        })
        .collect();
    Ok(EvalReport {
        global_rmse: (se.iter().sum::<f64>() / se.len() as f64).sqrt(),
        quintiles: Some(quintiles),
        sweep: None,
    })
}

/// Re-splits `ratings` at every train fraction and records the RMSE returned by `pipeline(train, test)`.
///
/// Hyperparameters are whatever `pipeline` closes over; they stay fixed across ratios.
pub fn density_sweep<F>(ratings: &SparseRatings, ratios: &[f64], seed: u64, mut pipeline: F) -> Result<EvalReport>
where
    F: FnMut(&SparseRatings, &SparseRatings) -> Result<f64>,
{
    let mut points = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(CfnError::Config(format!("density ratio {ratio} outside (0, 1)")));
        }
        let (train, test) = split(ratings, &SplitSpec::new(ratio, seed)?);
        points.push(SweepPoint {
            train_fraction: ratio,
            rmse: pipeline(&train, &test)?,
        });
    }
    let global_rmse = points.last().map_or(f64::NAN, |p| p.rmse);
    Ok(EvalReport {
        global_rmse,
        quintiles: None,
        sweep: Some(points),
    })
}
