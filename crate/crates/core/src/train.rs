//! Minibatch SGD for the autoencoder and the estimator built from a trained model.
//!
//! Every source of randomness is derived from `(rng_seed, epoch[, row])`, so a
//! run resumed from a checkpoint after epoch `e` continues exactly as the
//! uninterrupted run would, and the per-sample work can be spread over threads
//! without changing a single bit of the result: samples are computed
//! independently and their gradients are applied in row order by one writer.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CfnError, Result};
use crate::eval::RatingEstimator;
use crate::loss::{corrupt, data_loss_at_known, gradient_at_known, LossConfig};
use crate::net::{AutoencoderModel, Params, SampleGradient};
use crate::ratings::{BiasModel, Orientation, RatingScale, SparseRatings, SparseRow, SparseVec};
use crate::sideinfo::SideFeatures;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// η_t = learning_rate / (1 + lr_decay · t)
    pub lr_decay: f64,
    pub rng_seed: u64,
    pub loss: LossConfig,
    pub shuffle: bool,
    /// Zero for plain SGD.
    pub momentum: f64,
    /// Stop after this many epochs without validation improvement and keep the best model.
    pub patience: Option<usize>,
    /// `Some(1)` runs on the calling thread; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 30,
            learning_rate: 1.0,
            lr_decay: 0.0,
            rng_seed: 0,
            loss: LossConfig::default(),
            shuffle: true,
            momentum: 0.0,
            patience: None,
            threads: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(CfnError::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CfnError::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return Err(CfnError::Config(format!("lr_decay must be >= 0, got {}", self.lr_decay)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(CfnError::Config(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if self.threads == Some(0) {
            return Err(CfnError::Config("threads must be at least 1".into()));
        }
        self.loss.validate()
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate / (1.0 + self.lr_decay * epoch as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub val_rmse: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub stopped_early: bool,
}

impl TrainReport {
    /// `epoch<TAB>loss<TAB>val_rmse<TAB>seconds`, one row per completed epoch.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| CfnError::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| CfnError::io(path, e);
        writeln!(w, "epoch\tloss\tval_rmse\tseconds").map_err(io)?;
        for r in &self.epochs {
            let val = r.val_rmse.map_or(String::new(), |v| v.to_string());
            writeln!(w, "{}\t{}\t{}\t{:.3}", r.epoch, r.loss, val, r.seconds).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    mix(seed ^ mix(epoch as u64 + 1))
}

fn sample_seed(seed: u64, epoch: usize, row: usize) -> u64 {
    mix(epoch_seed(seed, epoch) ^ mix((row as u64) << 1 | 1))
}

/// Validation hook called after every epoch; returns an RMSE.
pub type Validation<'a> = &'a (dyn Fn(&AutoencoderModel) -> Result<f64> + Sync);

struct SampleOutcome {
    loss: f64,
    gradient: SampleGradient,
}

fn run_sample(
    model: &AutoencoderModel,
    target: SparseRow<'_>,
    side: Option<&[f64]>,
    loss_cfg: &LossConfig,
    seed: u64,
    scale: f64,
) -> Result<SampleOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (input, mask) = corrupt(target, loss_cfg.mask_ratio, &mut rng);
    let (pred, hidden) = model.forward_at(input.as_row(), side, target.indices)?;
    let row_scale = if loss_cfg.normalize_per_row {
        1.0 / target.len() as f64
    } else {
        1.0
    };
    let loss = data_loss_at_known(&pred, target, &mask, loss_cfg) * row_scale;
    let mut grad = gradient_at_known(&pred, target, &mask, loss_cfg);
    for g in grad.iter_mut() {
        *g *= row_scale * scale;
    }
    let out_grad = SparseRow {
        indices: target.indices,
        values: &grad,
    };
    let gradient = model.sample_gradient(input, side.unwrap_or(&[]), hidden, &pred, out_grad);
    Ok(SampleOutcome { loss, gradient })
}

/// Trains `cfg.epochs` further epochs starting from `model.epochs_completed()`.
///
/// `rows` are the unbiased, normalized training rows (one per model input row);
/// `side`, when given, has one feature row per training row.
pub fn train(
    mut model: AutoencoderModel,
    rows: &SparseRatings,
    side: Option<&SideFeatures>,
    cfg: &TrainConfig,
    validation: Option<Validation<'_>>,
) -> Result<(AutoencoderModel, TrainReport)> {
    cfg.validate()?;
    if rows.n_cols() != model.input_dim() {
        return Err(CfnError::Dimension(format!(
            "training rows have {} columns, model input_dim is {}",
            rows.n_cols(),
            model.input_dim()
        )));
    }
    match side {
        Some(s) if s.n_entities() != rows.n_rows() || s.dim() != model.side_dim() => {
            return Err(CfnError::Dimension(format!(
                "side features are {}x{}, expected {}x{}",
                s.n_entities(),
                s.dim(),
                rows.n_rows(),
                model.side_dim()
            )));
        }
        None if model.side_dim() > 0 => {
            return Err(CfnError::Dimension("model expects side features".into()));
        }
        _ => {}
    }

    let pool = match cfg.threads {
        Some(n) if n > 1 => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CfnError::Config(format!("thread pool: {e}")))?,
        ),
        _ => None,
    };
    let sequential = cfg.threads == Some(1);

    let active: Vec<usize> = (0..rows.n_rows()).filter(|&r| rows.row_nnz(r) > 0).collect();
    let spec = *model.spec();
    let mut velocity = (cfg.momentum > 0.0).then(|| Params::zeros(&spec));
    let mut report = TrainReport::default();
    let mut best: Option<(f64, AutoencoderModel)> = None;
    let mut since_best = 0usize;
    let first_epoch = model.epochs_completed();

    for epoch in first_epoch..first_epoch + cfg.epochs {
        let start = Instant::now();
        let lr = cfg.learning_rate_at(epoch);
        let mut order = active.clone();
        if cfg.shuffle {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(epoch_seed(cfg.rng_seed, epoch)));
        }
        let mut epoch_loss = 0.0;

        for (batch_no, batch) in order.chunks(cfg.batch_size).enumerate() {
            let scale = 1.0 / batch.len() as f64;
            let compute = |&r: &usize| {
                run_sample(
                    &model,
                    rows.row(r),
                    side.map(|s| s.row(r)),
                    &cfg.loss,
                    sample_seed(cfg.rng_seed, epoch, r),
                    scale,
                )
            };
            let outcomes: Vec<Result<SampleOutcome>> = if sequential {
                batch.iter().map(compute).collect()
            } else if let Some(pool) = &pool {
                pool.install(|| batch.par_iter().map(compute).collect())
            } else {
                batch.par_iter().map(compute).collect()
            };
            let mut outcomes_ok = Vec::with_capacity(outcomes.len());
            for o in outcomes {
                match o {
                    Ok(o) => outcomes_ok.push(o),
                    Err(CfnError::NonFinite(_)) => {
                        return Err(CfnError::Diverged {
                            epoch,
                            batch: batch_no,
                            loss: f64::NAN,
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
            let batch_loss: f64 = outcomes_ok.iter().map(|o| o.loss).sum();
            if !batch_loss.is_finite() {
                return Err(CfnError::Diverged {
                    epoch,
                    batch: batch_no,
                    loss: batch_loss,
                });
            }
            epoch_loss += batch_loss;
            apply_update(&mut model, &outcomes_ok, cfg, lr, velocity.as_mut());
        }

        if !model.params().all_finite() {
            return Err(CfnError::Diverged {
                epoch,
                batch: order.len().div_ceil(cfg.batch_size),
                loss: f64::NAN,
            });
        }
        model.set_epochs_completed(epoch + 1);
        let loss = epoch_loss / active.len().max(1) as f64 + cfg.loss.lambda * model.weight_sq_norm();
        let val_rmse = validation.map(|v| v(&model)).transpose()?;
        let seconds = start.elapsed().as_secs_f64();
        info!(
            "epoch {epoch}: loss {loss:.6}{} ({seconds:.2}s)",
            val_rmse.map_or(String::new(), |v| format!(", val rmse {v:.4}"))
        );
        report.epochs.push(EpochRecord {
            epoch,
            loss,
            val_rmse,
            seconds,
        });

        if let (Some(patience), Some(v)) = (cfg.patience, val_rmse) {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, model.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    debug!("early stop after epoch {epoch}");
                    report.stopped_early = true;
                    break;
                }
            }
        }
    }

    if report.stopped_early {
        if let Some((_, m)) = best {
            model = m;
        }
    }
    Ok((model, report))
}

fn apply_update(
    model: &mut AutoencoderModel,
    outcomes: &[SampleOutcome],
    cfg: &TrainConfig,
    lr: f64,
    velocity: Option<&mut Params>,
) {
    let spec = *model.spec();
    let lambda = cfg.loss.lambda;
    match velocity {
        None => {
            if lambda > 0.0 {
                let shrink = 1.0 - 2.0 * lr * lambda;
                let p = model.params_mut();
                p.encoder.iter_mut().for_each(|w| *w *= shrink);
                p.decoder.iter_mut().for_each(|w| *w *= shrink);
            }
            let params = model.params_mut();
            for o in outcomes {
                o.gradient.scatter(&spec, params, -lr);
            }
        }
        Some(v) => {
            let mut grads = Params::zeros(&spec);
            for o in outcomes {
                o.gradient.scatter(&spec, &mut grads, 1.0);
            }
            grads.add_weight_decay(model.params(), lambda);
            let params = model.params_mut();
            for ((vs, gs), ps) in v
                .slices_mut()
                .into_iter()
                .zip(grads.slices())
                .zip(params.slices_mut())
            {
                for ((vi, gi), pi) in vs.iter_mut().zip(gs.iter()).zip(ps.iter_mut()) {
                    *vi = cfg.momentum * *vi + gi;
                    *pi -= lr * *vi;
                }
            }
        }
    }
}

/// Rating estimator backed by a trained autoencoder fed with training rows.
///
/// For entity row `r` and output `o` the estimate is
/// `denormalize(clip(nn(train row r)_o + bias_r))`. Rows without training
/// ratings fall back to the scale midpoint unless side features are available,
/// in which case the network is fed the empty row plus the features.
#[derive(Debug, Clone)]
pub struct CfnEstimator {
    model: AutoencoderModel,
    rows: SparseRatings,
    side: Option<SideFeatures>,
    bias: BiasModel,
    scale: RatingScale,
}

impl CfnEstimator {
    pub fn new(
        model: AutoencoderModel,
        rows: SparseRatings,
        side: Option<SideFeatures>,
        bias: BiasModel,
        scale: RatingScale,
    ) -> Result<Self> {
        if rows.n_cols() != model.input_dim() {
            return Err(CfnError::Dimension(format!(
                "rows have {} columns, model input_dim is {}",
                rows.n_cols(),
                model.input_dim()
            )));
        }
        if let Some(s) = &side {
            if s.n_entities() != rows.n_rows() || s.dim() != model.side_dim() {
                return Err(CfnError::Dimension("side features do not match rows/model".into()));
            }
        } else if model.side_dim() > 0 {
            return Err(CfnError::Dimension("model expects side features".into()));
        }
        Ok(CfnEstimator {
            model,
            rows,
            side,
            bias,
            scale,
        })
    }

    pub fn model(&self) -> &AutoencoderModel {
        &self.model
    }

    pub fn rows(&self) -> &SparseRatings {
        &self.rows
    }

    pub fn bias(&self) -> &BiasModel {
        &self.bias
    }

    pub fn scale(&self) -> &RatingScale {
        &self.scale
    }

    fn to_model_coords(&self, user: usize, item: usize) -> Result<(usize, usize)> {
        let (r, o) = match self.rows.orientation() {
            Orientation::UserRows => (user, item),
            Orientation::ItemRows => (item, user),
        };
        if r >= self.rows.n_rows() || o >= self.rows.n_cols() {
            return Err(CfnError::OutOfRange(format!(
                "(user {user}, item {item}) outside the {}x{} model space",
                self.rows.n_rows(),
                self.rows.n_cols()
            )));
        }
        Ok((r, o))
    }

    fn finish(&self, r: usize, raw: f64) -> f64 {
        let v = (raw + self.bias.row_bias(r)).clamp(-1.0, 1.0);
        self.scale.denormalize(v)
    }

    fn uses_fallback(&self, r: usize) -> bool {
        self.side.is_none() && self.bias.is_cold(r) && self.rows.row_nnz(r) == 0
    }

    /// Estimates for one entity row at the given outputs.
    fn predict_row(&self, r: usize, outputs: &[usize]) -> Result<Vec<f64>> {
        if self.uses_fallback(r) {
            return Ok(vec![self.finish(r, 0.0); outputs.len()]);
        }
        let side = self.side.as_ref().map(|s| s.row(r));
        let (raw, _) = self.model.forward_at(self.rows.row(r), side, outputs)?;
        Ok(raw.into_iter().map(|v| self.finish(r, v)).collect())
    }

    /// Dense estimates (original units) for every output of entity row `r`.
    pub fn predict_entity(&self, r: usize) -> Result<Vec<f64>> {
        if r >= self.rows.n_rows() {
            return Err(CfnError::OutOfRange(format!("row {r} >= {}", self.rows.n_rows())));
        }
        let all: Vec<usize> = (0..self.rows.n_cols()).collect();
        self.predict_row(r, &all)
    }

    /// Adds (or replaces) a rating in the input rows without retraining.
    ///
    /// The rating is normalized and unbiased with the row's stored bias; the
    /// network output for that row changes on the next query.
    pub fn with_rating(&self, user: usize, item: usize, rating: f64) -> Result<Self> {
        if !self.scale.contains(rating) {
            return Err(CfnError::OutOfScale {
                row: user,
                col: item,
                value: rating,
                min: self.scale.min_rating,
                max: self.scale.max_rating,
            });
        }
        let (r, o) = self.to_model_coords(user, item)?;
        let value = self.scale.normalize(rating) - self.bias.row_bias(r);
        let mut entries: Vec<(usize, f64)> = self.rows.row(r).iter().collect();
        entries.push((o, value));
        let rows = self.rows.with_row(r, &SparseVec::from_entries(entries))?;
        Ok(CfnEstimator {
            rows,
            ..self.clone()
        })
    }
}

impl RatingEstimator for CfnEstimator {
    fn predict(&self, user: usize, item: usize) -> Result<f64> {
        let (r, o) = self.to_model_coords(user, item)?;
        Ok(self.predict_row(r, &[o])?[0])
    }

    fn predict_many(&self, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        let coords = pairs
            .iter()
            .map(|&(u, i)| self.to_model_coords(u, i))
            .collect::<Result<Vec<_>>>()?;
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.sort_by_key(|&p| coords[p]);
        let groups: Vec<&[usize]> = order
            .chunk_by(|&a, &b| coords[a].0 == coords[b].0)
            .collect();
        let results = groups
            .par_iter()
            .map(|g| {
                let r = coords[g[0]].0;
                let outs: Vec<usize> = g.iter().map(|&p| coords[p].1).collect();
                self.predict_row(r, &outs)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = vec![0.0; pairs.len()];
        for (g, vals) in groups.iter().zip(results) {
            for (&p, v) in g.iter().zip(vals) {
                out[p] = v;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::ModelSpec;
    use crate::ratings::{normalize, unbias};

    fn small_rows() -> SparseRatings {
        let t: Vec<_> = (0..40)
            .map(|i| (i % 8, (i * 7) % 10, ((i * 13) % 9) as f64 / 4.5 - 1.0))
            .collect();
        SparseRatings::from_triplets(8, 10, Orientation::ItemRows, &t).unwrap()
    }

    fn cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 3,
            learning_rate: 0.05,
            threads: Some(1),
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_epochs_leave_model_unchanged() {
        let rows = small_rows();
        let m = AutoencoderModel::init(ModelSpec::new(10, 4, 0), 1).unwrap();
        let (out, report) = train(m.clone(), &rows, None, &cfg(0), None).unwrap();
        assert_eq!(out, m);
        assert!(report.epochs.is_empty());
    }

    #[test]
    fn tiny_learning_rate_barely_moves() {
        let rows = small_rows();
        let m = AutoencoderModel::init(ModelSpec::new(10, 4, 0), 1).unwrap();
        let mut prev = f64::INFINITY;
        for lr in [1e-2, 1e-4, 1e-6, 1e-8] {
            let c = TrainConfig { learning_rate: lr, ..cfg(2) };
            let (out, _) = train(m.clone(), &rows, None, &c, None).unwrap();
            let change: f64 = out
                .params()
                .slices()
                .iter()
                .zip(m.params().slices())
                .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            assert!(change < prev);
            prev = change;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn schedule_is_non_increasing() {
        let c = TrainConfig { lr_decay: 0.3, ..cfg(1) };
        for t in 0..50 {
            assert!(c.learning_rate_at(t + 1) <= c.learning_rate_at(t));
        }
        assert_eq!(c.learning_rate_at(0), c.learning_rate);
    }

    #[test]
    fn threads_do_not_change_the_result() {
        let rows = small_rows();
        let m = AutoencoderModel::init(ModelSpec::new(10, 4, 0), 1).unwrap();
        let (a, _) = train(m.clone(), &rows, None, &cfg(3), None).unwrap();
        let c4 = TrainConfig { threads: Some(4), ..cfg(3) };
        let (b, _) = train(m, &rows, None, &c4, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let rows = small_rows();
        let m = AutoencoderModel::init(ModelSpec::new(10, 4, 0), 1).unwrap();
        let (full, rep_full) = train(m.clone(), &rows, None, &cfg(4), None).unwrap();
        let (half, _) = train(m, &rows, None, &cfg(2), None).unwrap();
        let (resumed, rep_rest) = train(half, &rows, None, &cfg(2), None).unwrap();
        assert_eq!(full, resumed);
        assert_eq!(rep_full.epochs[2].loss, rep_rest.epochs[0].loss);
        assert_eq!(rep_rest.epochs[0].epoch, 2);
    }

    #[test]
    fn momentum_path_runs_and_matches_plain_sgd_at_zero_lambda_one_batch() {
        // with a single batch and one epoch, momentum has no history to use
        let rows = small_rows();
        let m = AutoencoderModel::init(ModelSpec::new(10, 4, 0), 1).unwrap();
        let base = TrainConfig { batch_size: 100, loss: LossConfig { lambda: 0.0, ..LossConfig::default() }, ..cfg(1) };
        let (a, _) = train(m.clone(), &rows, None, &base, None).unwrap();
        let (b, _) = train(m, &rows, None, &TrainConfig { momentum: 0.9, ..base }, None).unwrap();
        for (x, y) in a.params().slices().iter().zip(b.params().slices()) {
            for (p, q) in x.iter().zip(y.iter()) {
                assert!((p - q).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn divergence_is_reported_with_location() {
        let rows = small_rows();
        let m = AutoencoderModel::init(ModelSpec::new(10, 4, 0), 1).unwrap();
        let c = TrainConfig { learning_rate: 1e6, loss: LossConfig { mask_ratio: 0.0, ..LossConfig::default() }, ..cfg(50) };
        match train(m, &rows, None, &c, None) {
            Err(CfnError::Diverged { .. }) => {}
            other => panic!("expected divergence, got {:?}", other.map(|r| r.1)),
        }
    }

    #[test]
    fn early_stopping_restores_best() {
        let rows = small_rows();
        let m = AutoencoderModel::init(ModelSpec::new(10, 4, 0), 1).unwrap();
        let counter = std::sync::atomic::AtomicUsize::new(0);
        // validation gets worse after the second epoch
        let val = |_: &AutoencoderModel| {
            let n = counter.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok([0.9, 0.8, 0.85, 0.86, 0.87, 0.88][n.min(5)])
        };
        let c = TrainConfig { patience: Some(2), ..cfg(10) };
        let (out, rep) = train(m, &rows, None, &c, Some(&val)).unwrap();
        assert!(rep.stopped_early);
        assert_eq!(rep.epochs.len(), 4);
        assert_eq!(out.epochs_completed(), 2);
    }

    #[test]
    fn estimator_cold_rows_and_scale() {
        let scale = RatingScale::one_to_five();
        let t = vec![(0, 0, 4.0), (0, 2, 5.0), (1, 1, 2.0)];
        let raw = SparseRatings::from_triplets(3, 4, Orientation::UserRows, &t).unwrap();
        let (rows, bias) = unbias(&normalize(&raw, &scale).unwrap());
        let m = AutoencoderModel::init(ModelSpec::new(4, 2, 0), 3).unwrap();
        let est = CfnEstimator::new(m, rows, None, bias, scale).unwrap();
        let known = est.predict(0, 0).unwrap();
        assert!(known.is_finite() && scale.contains(known));
        // user 2 has no training ratings
        assert_eq!(est.predict(2, 3).unwrap(), scale.midpoint());
        assert!(matches!(est.predict(3, 0), Err(CfnError::OutOfRange(_))));
        assert!(matches!(est.predict(0, 4), Err(CfnError::OutOfRange(_))));
    }

    #[test]
    fn predict_many_matches_predict() {
        let scale = RatingScale::one_to_five();
        let raw = SparseRatings::from_triplets(
            3,
            4,
            Orientation::ItemRows,
            &[(0, 0, 4.0), (0, 2, 5.0), (1, 1, 2.0), (2, 3, 1.0)],
        )
        .unwrap();
        let (rows, bias) = unbias(&normalize(&raw, &scale).unwrap());
        let m = AutoencoderModel::init(ModelSpec::new(4, 2, 0), 3).unwrap();
        let est = CfnEstimator::new(m, rows, None, bias, scale).unwrap();
        let pairs = vec![(3, 2), (0, 0), (1, 0), (2, 1), (0, 2)];
        let many = est.predict_many(&pairs).unwrap();
        for (p, v) in pairs.iter().zip(many) {
            assert_eq!(est.predict(p.0, p.1).unwrap(), v);
        }
    }
}
