//! End-to-end commands over an experiment directory.
//!
//! `cmd_split` writes the split; the other commands read it back, so every
//! command is a function of the config file (and its seed) alone.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{load_model, save_model};
use crate::config::ExperimentConfig;
use crate::error::{CfnError, Result};
use crate::eval::{density_sweep, quintile_report, rmse, EvalReport, RatingEstimator};
use crate::ingest::{
    parse_categories, parse_demographics, parse_rating_triplets, parse_ratings, parse_relations, parse_tags,
    write_canonical, FileFormat, IdMap,
};
use crate::net::{AutoencoderModel, ModelSpec, Transfer};
use crate::ratings::{
    normalize, split, transpose, unbias, BiasModel, Orientation, RatingScale, SparseRatings, SplitSpec,
};
use crate::sideinfo::{assemble, category_block, demographic_block, pca_compress, SideFeatures};
use crate::train::{train, CfnEstimator, TrainConfig, TrainReport, Validation};
use crate::tune::{self, GaOutcome, Genome};

pub const TRAIN_FILE: &str = "train.tsv";
pub const TEST_FILE: &str = "test.tsv";
pub const USERS_MAP: &str = "users.map";
pub const ITEMS_MAP: &str = "items.map";
pub const SPLIT_META: &str = "split.toml";
pub const CONFIG_COPY: &str = "config.toml";
pub const MODEL_FILE: &str = "model.ckpt";
pub const TRAIN_REPORT: &str = "train_report.tsv";
pub const EVAL_REPORT: &str = "eval.tsv";
pub const TUNE_LOG: &str = "tune_log.tsv";
pub const BEST_GENOME: &str = "best_genome.toml";

/// A train/test split in user-row layout and original rating units.
#[derive(Debug, Clone)]
pub struct SplitData {
    pub train: SparseRatings,
    pub test: SparseRatings,
    pub users: IdMap,
    pub items: IdMap,
    pub scale: RatingScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SplitMeta {
    scale: [f64; 2],
    train_fraction: f64,
    seed: u64,
    n_train: usize,
    n_test: usize,
}

/// Normalized, unbiased training rows in model orientation.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub rows: SparseRatings,
    pub bias: BiasModel,
}

/// Everything needed to train one CFN apart from the data.
#[derive(Debug, Clone, PartialEq)]
pub struct CfnSettings {
    pub orientation: Orientation,
    pub bottleneck: usize,
    pub hidden: Transfer,
    pub output: Transfer,
    pub init_seed: u64,
    pub train: TrainConfig,
}

impl CfnSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let (hidden, output) = cfg.transfers()?;
        Ok(CfnSettings {
            orientation: cfg.orientation()?,
            bottleneck: cfg.model.bottleneck,
            hidden,
            output,
            init_seed: cfg.seed,
            train: cfg.train_config()?,
        })
    }

    /// Copy with the genome's hyperparameters applied.
    pub fn with_genome(&self, g: &Genome) -> Self {
        let mut s = self.clone();
        s.bottleneck = g.bottleneck();
        s.train.learning_rate = g.learning_rate();
        s.train.lr_decay = g.lr_decay();
        s.train.loss.alpha = g.alpha();
        s.train.loss.beta = g.beta();
        s.train.loss.mask_ratio = g.mask_ratio();
        s.train.loss.lambda = g.weight_decay();
        s
    }
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.output.join(name)
}

fn ensure_output(cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output).map_err(|e| CfnError::io(&cfg.output, e))?;
    let p = out_path(cfg, CONFIG_COPY);
    fs::write(&p, cfg.to_toml()).map_err(|e| CfnError::io(&p, e))
}

/// Splits the ratings file and writes `train.tsv`, `test.tsv` and the id sidecars.
pub fn cmd_split(cfg: &ExperimentConfig) -> Result<SplitData> {
    cfg.validate()?;
    let data = parse_ratings(&cfg.data.ratings, cfg.format()?, cfg.scale()?)?;
    // validates every rating against the scale
    normalize(&data.ratings, &data.scale)?;
    info!(
        "split {} ratings ({} users, {} items) with seed {}",
        data.ratings.nnz(),
        data.users.len(),
        data.items.len(),
        cfg.seed
    );
    let (train, test) = split(&data.ratings, &SplitSpec::new(cfg.data.train_fraction, cfg.seed)?);
    ensure_output(cfg)?;
    write_canonical(&out_path(cfg, TRAIN_FILE), &train, &data.users, &data.items)?;
    write_canonical(&out_path(cfg, TEST_FILE), &test, &data.users, &data.items)?;
    data.users.write(&out_path(cfg, USERS_MAP))?;
    data.items.write(&out_path(cfg, ITEMS_MAP))?;
    let meta = SplitMeta {
        scale: [data.scale.min_rating, data.scale.max_rating],
        train_fraction: cfg.data.train_fraction,
        seed: cfg.seed,
        n_train: train.nnz(),
        n_test: test.nnz(),
    };
    let p = out_path(cfg, SPLIT_META);
    fs::write(&p, toml::to_string(&meta).expect("split metadata serializes")).map_err(|e| CfnError::io(&p, e))?;
    Ok(SplitData {
        train,
        test,
        users: data.users,
        items: data.items,
        scale: data.scale,
    })
}

fn read_split_file(path: &Path, users: &IdMap, items: &IdMap) -> Result<SparseRatings> {
    let empty = fs::metadata(path).map_err(|e| CfnError::io(path, e))?.len() == 0;
    if empty {
        return Ok(SparseRatings::empty(users.len(), items.len(), Orientation::UserRows));
    }
    let (mut u, mut i) = (users.clone(), items.clone());
    let triplets = parse_rating_triplets(path, FileFormat::Canonical, &mut u, &mut i)?;
    if u.len() != users.len() || i.len() != items.len() {
        return Err(CfnError::parse(path, 0, "ids missing from the id sidecars"));
    }
    SparseRatings::from_triplets(users.len(), items.len(), Orientation::UserRows, &triplets)
}

/// Reads the split written by [`cmd_split`].
pub fn load_split(cfg: &ExperimentConfig) -> Result<SplitData> {
    let meta_path = out_path(cfg, SPLIT_META);
    if !meta_path.exists() {
        return Err(CfnError::Precondition(format!(
            "no split in {}; run the split command first",
            cfg.output.display()
        )));
    }
    let text = fs::read_to_string(&meta_path).map_err(|e| CfnError::io(&meta_path, e))?;
    let meta: SplitMeta = toml::from_str(&text).map_err(|e| CfnError::parse(&meta_path, 0, e.to_string()))?;
    let users = IdMap::read(&out_path(cfg, USERS_MAP))?;
    let items = IdMap::read(&out_path(cfg, ITEMS_MAP))?;
    let train = read_split_file(&out_path(cfg, TRAIN_FILE), &users, &items)?;
    let test = read_split_file(&out_path(cfg, TEST_FILE), &users, &items)?;
    Ok(SplitData {
        train,
        test,
        users,
        items,
        scale: RatingScale::new(meta.scale[0], meta.scale[1])?,
    })
}

/// Side features for the model's input rows, assembled from the configured blocks.
pub fn build_side(cfg: &ExperimentConfig, users: &IdMap, items: &IdMap) -> Result<Option<SideFeatures>> {
    let mut blocks = Vec::new();
    let s = &cfg.side;
    let n_items = items.len();
    let n_users = users.len();
    if let Some(p) = &s.categories {
        let cats = parse_categories(p, FileFormat::from_path(p), &mut items.clone())?;
        blocks.push(category_block(&cats)?.fitted_to(n_items));
    }
    if let Some(p) = &s.tags {
        let tags = parse_tags(p, FileFormat::from_path(p), &mut items.clone())?;
        blocks.push(pca_compress(&tags, s.tag_dim)?.fitted_to(n_items));
    }
    if let Some(p) = &s.demographics {
        let demo = parse_demographics(p, FileFormat::from_path(p), &mut users.clone())?;
        blocks.push(demographic_block(&demo)?.fitted_to(n_users));
    }
    if let Some(p) = &s.relations {
        let rel = parse_relations(p, &mut users.clone())?;
        blocks.push(pca_compress(&rel, s.relation_dim)?.fitted_to(n_users));
    }
    if blocks.is_empty() {
        return Ok(None);
    }
    Ok(Some(assemble(&blocks)?))
}

/// Orients, normalizes and unbiases a user-row training matrix.
pub fn preprocess(train: &SparseRatings, orientation: Orientation, scale: &RatingScale) -> Result<Preprocessed> {
    let oriented = if train.orientation() == orientation {
        train.clone()
    } else {
        transpose(train)
    };
    let (rows, bias) = unbias(&normalize(&oriented, scale)?);
    Ok(Preprocessed { rows, bias })
}

/// Trains a CFN on `train` (any orientation, original units) and wraps it as an estimator.
///
/// `init` continues from an existing model; `validation` is scored after every epoch.
pub fn fit_cfn(
    train_ratings: &SparseRatings,
    scale: &RatingScale,
    side: Option<&SideFeatures>,
    settings: &CfnSettings,
    init: Option<AutoencoderModel>,
    validation: Option<&SparseRatings>,
) -> Result<(CfnEstimator, TrainReport)> {
    let pre = preprocess(train_ratings, settings.orientation, scale)?;
    let side_dim = side.map_or(0, SideFeatures::dim);
    let spec = ModelSpec::new(pre.rows.n_cols(), settings.bottleneck, side_dim)
        .with_transfers(settings.hidden, settings.output);
    let model = match init {
        Some(m) => {
            if *m.spec() != spec {
                return Err(CfnError::Checkpoint(format!(
                    "checkpoint shape {:?} does not match the configured {:?}",
                    m.spec(),
                    spec
                )));
            }
            m
        }
        None => AutoencoderModel::init(spec, settings.init_seed)?,
    };
    let side = side.cloned();
    let validate = |m: &AutoencoderModel| -> Result<f64> {
        let est = CfnEstimator::new(m.clone(), pre.rows.clone(), side.clone(), pre.bias.clone(), *scale)?;
        rmse(&est, validation.expect("only called with validation data"))
    };
    let hook: Option<Validation<'_>> = match validation {
        Some(v) if v.nnz() > 0 => Some(&validate),
        _ => None,
    };
    let (model, report) = train(model, &pre.rows, side.as_ref(), &settings.train, hook)?;
    let est = CfnEstimator::new(model, pre.rows, side, pre.bias, *scale)?;
    Ok((est, report))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub estimator: CfnEstimator,
    pub report: TrainReport,
    pub checkpoint: PathBuf,
}

fn holdout(train: &SparseRatings, fraction: f64, seed: u64) -> Result<(SparseRatings, Option<SparseRatings>)> {
    if fraction <= 0.0 {
        return Ok((train.clone(), None));
    }
    let (fit, val) = split(train, &SplitSpec::new(1.0 - fraction, seed.wrapping_add(1))?);
    Ok((fit, Some(val)))
}

/// Trains on the split and writes `model.ckpt` and `train_report.tsv`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let data = load_split(cfg)?;
    ensure_output(cfg)?;
    let side = build_side(cfg, &data.users, &data.items)?;
    let mut settings = CfnSettings::from_config(cfg)?;
    let (fit, val) = holdout(&data.train, cfg.train.validation_fraction, cfg.seed)?;
    let ckpt = out_path(cfg, MODEL_FILE);
    let init = if cfg.train.resume && ckpt.exists() {
        let m = load_model(&ckpt)?;
        info!("resuming from {} after {} epochs", ckpt.display(), m.epochs_completed());
        Some(m)
    } else {
        None
    };
    let done = init.as_ref().map_or(0, AutoencoderModel::epochs_completed);
    settings.train.epochs = cfg.train.epochs.saturating_sub(done);
    info!(
        "training {:?} k={} for {} epochs, seed {}",
        settings.orientation, settings.bottleneck, settings.train.epochs, cfg.seed
    );
    let (estimator, report) = fit_cfn(&fit, &data.scale, side.as_ref(), &settings, init, val.as_ref())?;
    save_model(&ckpt, estimator.model())?;
    let report_path = out_path(cfg, TRAIN_REPORT);
    if done > 0 && report_path.exists() {
        let tmp = cfg.output.join(".train_report.tmp");
        report.write_tsv(&tmp)?;
        let rows = fs::read_to_string(&tmp).map_err(|e| CfnError::io(&tmp, e))?;
        let _ = fs::remove_file(&tmp);
        let mut f = OpenOptions::new()
            .append(true)
            .open(&report_path)
            .map_err(|e| CfnError::io(&report_path, e))?;
        for line in rows.lines().skip(1) {
            writeln!(f, "{line}").map_err(|e| CfnError::io(&report_path, e))?;
        }
    } else {
        report.write_tsv(&report_path)?;
    }
    Ok(TrainOutcome {
        estimator,
        report,
        checkpoint: ckpt,
    })
}

/// Estimator for a saved checkpoint over the split's training data.
pub fn load_estimator(cfg: &ExperimentConfig, checkpoint: Option<&Path>) -> Result<(CfnEstimator, SplitData)> {
    let data = load_split(cfg)?;
    let side = build_side(cfg, &data.users, &data.items)?;
    let path = checkpoint.map_or_else(|| out_path(cfg, MODEL_FILE), Path::to_path_buf);
    let model = load_model(&path)?;
    let pre = preprocess(&data.train, cfg.orientation()?, &data.scale)?;
    let est = CfnEstimator::new(model, pre.rows, side, pre.bias, data.scale)?;
    Ok((est, data))
}

/// Test RMSE, optional item-quintile breakdown and density sweep; writes `eval.tsv`.
pub fn cmd_evaluate(cfg: &ExperimentConfig, checkpoint: Option<&Path>) -> Result<EvalReport> {
    cfg.validate()?;
    let (est, data) = load_estimator(cfg, checkpoint)?;
    let mut report = if cfg.evaluate.quintiles {
        quintile_report(&est, &data.test, &data.train.col_counts())?
    } else {
        EvalReport {
            global_rmse: rmse(&est, &data.test)?,
            ..EvalReport::default()
        }
    };
    info!("test rmse {:.4}", report.global_rmse);
    if !cfg.evaluate.density_ratios.is_empty() {
        let all = parse_ratings(&cfg.data.ratings, cfg.format()?, Some(data.scale))?;
        let side = build_side(cfg, &all.users, &all.items)?;
        let settings = CfnSettings::from_config(cfg)?;
        let sweep = density_sweep(&all.ratings, &cfg.evaluate.density_ratios, cfg.seed, |tr, te| {
            let (est, _) = fit_cfn(tr, &all.scale, side.as_ref(), &settings, None, None)?;
            let r = rmse(&est, te)?;
            info!("density {:.2}: rmse {r:.4}", tr.nnz() as f64 / all.ratings.nnz() as f64);
            Ok(r)
        })?;
        report.sweep = sweep.sweep;
    }
    ensure_output(cfg)?;
    report.write_tsv(&out_path(cfg, EVAL_REPORT))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BestGenome {
    alpha: f64,
    beta: f64,
    mask_ratio: f64,
    bottleneck: usize,
    learning_rate: f64,
    lr_decay: f64,
    weight_decay: f64,
    fitness: f64,
}

/// Genetic search; fitness is the RMSE on a held-out share of the training split.
pub fn cmd_tune(cfg: &ExperimentConfig) -> Result<GaOutcome> {
    cfg.validate()?;
    let data = load_split(cfg)?;
    ensure_output(cfg)?;
    let side = build_side(cfg, &data.users, &data.items)?;
    if cfg.tune.validation_fraction <= 0.0 {
        return Err(CfnError::Config("tune.validation_fraction must be positive".into()));
    }
    let (fit, val) = holdout(&data.train, cfg.tune.validation_fraction, cfg.seed)?;
    let val = val.expect("holdout fraction is positive");
    let mut base = CfnSettings::from_config(cfg)?;
    base.train.epochs = cfg.tune.epochs;
    base.train.patience = None;
    if cfg.tune.workers.is_some_and(|w| w > 1) {
        base.train.threads = Some(1);
    }
    let fitness = |g: &Genome| -> Result<f64> {
        let settings = base.with_genome(g);
        let (est, _) = fit_cfn(&fit, &data.scale, side.as_ref(), &settings, None, None)?;
        rmse(&est, &val)
    };
    let out = tune::run(
        &cfg.ga_config(),
        &cfg.gene_space()?,
        &fitness,
        Some(&out_path(cfg, TUNE_LOG)),
        cfg.tune.resume,
    )?;
    let g = &out.best.genome;
    let best = BestGenome {
        alpha: g.alpha(),
        beta: g.beta(),
        mask_ratio: g.mask_ratio(),
        bottleneck: g.bottleneck(),
        learning_rate: g.learning_rate(),
        lr_decay: g.lr_decay(),
        weight_decay: g.weight_decay(),
        fitness: out.best.fitness,
    };
    let p = out_path(cfg, BEST_GENOME);
    fs::write(&p, toml::to_string(&best).expect("genome serializes")).map_err(|e| CfnError::io(&p, e))?;
    Ok(out)
}

/// One extra rating fed into the input rows before predicting.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraRating {
    pub user: String,
    pub item: String,
    pub rating: f64,
}

/// Predicted rating for `(user, item)` given as external ids.
///
/// Unknown ids fall back to the known entity's bias, or to the scale midpoint.
pub fn cmd_predict(
    cfg: &ExperimentConfig,
    checkpoint: Option<&Path>,
    user: &str,
    item: &str,
    extra: &[ExtraRating],
) -> Result<f64> {
    cfg.validate()?;
    let (mut est, data) = load_estimator(cfg, checkpoint)?;
    for e in extra {
        let (u, i) = match (data.users.get(&e.user), data.items.get(&e.item)) {
            (Some(u), Some(i)) => (u, i),
            _ => {
                return Err(CfnError::OutOfRange(format!(
                    "extra rating for unknown pair ({}, {})",
                    e.user, e.item
                )))
            }
        };
        est = est.with_rating(u, i, e.rating)?;
    }
    let (u, i) = (data.users.get(user), data.items.get(item));
    if let (Some(u), Some(i)) = (u, i) {
        return est.predict(u, i);
    }
    let row = match cfg.orientation()? {
        Orientation::UserRows => u,
        Orientation::ItemRows => i,
    };
    let scale = data.scale;
    Ok(match row {
        Some(r) => scale.denormalize(est.bias().row_bias(r).clamp(-1.0, 1.0)),
        None => scale.midpoint(),
    })
}
