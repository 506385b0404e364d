//! Experiment configuration, read from a TOML file of `key = value` lines.
//!
//! Relative paths are taken relative to the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CfnError, Result};
use crate::ingest::FileFormat;
use crate::loss::LossConfig;
use crate::net::Transfer;
use crate::ratings::{Orientation, RatingScale};
use crate::train::TrainConfig;
use crate::tune::{GaConfig, GeneSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment directory; split files, checkpoints and reports go here.
    pub output: PathBuf,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub data: DataSection,
    pub model: ModelSection,
    pub side: SideSection,
    pub train: TrainSection,
    pub loss: LossSection,
    pub tune: TuneSection,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub ratings: PathBuf,
    /// `dat`, `csv` or `tsv`; guessed from the extension when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// `[min, max]`; inferred from the ratings when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<[f64; 2]>,
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// `item` feeds item rows (one input per user), `user` feeds user rows.
    pub orientation: String,
    pub bottleneck: usize,
    pub hidden: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SideSection {
    /// Item categories (e.g. `movies.dat`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub categories: Option<PathBuf>,
    /// Item tag assignments, compressed to `tag_dim` principal components.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tags: Option<PathBuf>,
    pub tag_dim: usize,
    /// User demographics (e.g. `users.dat`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demographics: Option<PathBuf>,
    /// Symmetric user relations, compressed to `relation_dim` components.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relations: Option<PathBuf>,
    pub relation_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    /// Total epochs; a resumed run only trains the missing ones.
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub shuffle: bool,
    pub momentum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
    /// Share of the training split held out for per-epoch validation (0 disables).
    pub validation_fraction: f64,
    /// Continue from `model.ckpt` in the output directory when present.
    pub resume: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossSection {
    pub alpha: f64,
    pub beta: f64,
    pub mask_ratio: f64,
    pub lambda: f64,
    pub normalize_per_row: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSection {
    pub population: usize,
    pub sigma: f64,
    pub lambdas: [f64; 4],
    pub generations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Epochs per fitness evaluation.
    pub epochs: usize,
    /// Share of the training split used as the fitness data.
    pub validation_fraction: f64,
    pub resume: bool,
    /// Seven `[lo, hi]` gene intervals, in genome order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub quintiles: bool,
    /// Train fractions for a density sweep; empty skips it.
    pub density_ratios: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            output: PathBuf::from("runs/default"),
            seed: 0,
            threads: None,
            data: DataSection::default(),
            model: ModelSection::default(),
            side: SideSection::default(),
            train: TrainSection::default(),
            loss: LossSection::default(),
            tune: TuneSection::default(),
            evaluate: EvaluateSection::default(),
        }
    }
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            ratings: PathBuf::from("data/ml-1m/ratings.dat"),
            format: None,
            scale: None,
            train_fraction: 0.9,
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            orientation: "item".into(),
            bottleneck: 600,
            hidden: "tanh".into(),
            output: "identity".into(),
        }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            lr_decay: t.lr_decay,
            shuffle: t.shuffle,
            momentum: t.momentum,
            patience: t.patience,
            validation_fraction: 0.0,
            resume: false,
        }
    }
}

impl Default for LossSection {
    fn default() -> Self {
        let l = LossConfig::default();
        LossSection {
            alpha: l.alpha,
            beta: l.beta,
            mask_ratio: l.mask_ratio,
            lambda: l.lambda,
            normalize_per_row: l.normalize_per_row,
        }
    }
}

impl Default for TuneSection {
    fn default() -> Self {
        let g = GaConfig::default();
        TuneSection {
            population: g.population,
            sigma: g.sigma,
            lambdas: g.lambdas,
            generations: g.generations,
            workers: None,
            epochs: 10,
            validation_fraction: 0.1,
            resume: false,
            bounds: None,
        }
    }
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            quintiles: true,
            density_ratios: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CfnError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CfnError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CfnError::Config(m) => CfnError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.orientation()?;
        self.transfers()?;
        self.format()?;
        self.scale()?;
        if !(self.data.train_fraction > 0.0 && self.data.train_fraction <= 1.0) {
            return Err(CfnError::Config(format!(
                "data.train_fraction must lie in (0, 1], got {}",
                self.data.train_fraction
            )));
        }
        if self.model.bottleneck == 0 {
            return Err(CfnError::Config("model.bottleneck must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(CfnError::Config("threads must be at least 1".into()));
        }
        for (name, f) in [
            ("train.validation_fraction", self.train.validation_fraction),
            ("tune.validation_fraction", self.tune.validation_fraction),
        ] {
            if !(0.0..1.0).contains(&f) {
                return Err(CfnError::Config(format!("{name} must lie in [0, 1), got {f}")));
            }
        }
        if self.side.tags.is_some() && self.side.tag_dim == 0 {
            return Err(CfnError::Config("side.tag_dim must be set when side.tags is".into()));
        }
        if self.side.relations.is_some() && self.side.relation_dim == 0 {
            return Err(CfnError::Config("side.relation_dim must be set when side.relations is".into()));
        }
        let item_side = self.side.categories.is_some() || self.side.tags.is_some();
        let user_side = self.side.demographics.is_some() || self.side.relations.is_some();
        match self.orientation()? {
            Orientation::ItemRows if user_side => {
                return Err(CfnError::Config(
                    "user side information needs model.orientation = \"user\"".into(),
                ))
            }
            Orientation::UserRows if item_side => {
                return Err(CfnError::Config(
                    "item side information needs model.orientation = \"item\"".into(),
                ))
            }
            _ => {}
        }
        self.train_config()?.validate()?;
        self.ga_config().validate()?;
        self.gene_space()?.validate()
    }

    pub fn orientation(&self) -> Result<Orientation> {
        match self.model.orientation.to_ascii_lowercase().as_str() {
            "item" | "items" | "v" | "v-cfn" => Ok(Orientation::ItemRows),
            "user" | "users" | "u" | "u-cfn" => Ok(Orientation::UserRows),
            other => Err(CfnError::Config(format!("unknown orientation {other:?}"))),
        }
    }

    pub fn transfers(&self) -> Result<(Transfer, Transfer)> {
        Ok((self.model.hidden.parse()?, self.model.output.parse()?))
    }

    pub fn format(&self) -> Result<FileFormat> {
        match &self.data.format {
            Some(f) => f.parse(),
            None => Ok(FileFormat::from_path(&self.data.ratings)),
        }
    }

    pub fn scale(&self) -> Result<Option<RatingScale>> {
        self.data.scale.map(|[lo, hi]| RatingScale::new(lo, hi)).transpose()
    }

    pub fn has_side_info(&self) -> bool {
        let s = &self.side;
        s.categories.is_some() || s.tags.is_some() || s.demographics.is_some() || s.relations.is_some()
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            alpha: self.loss.alpha,
            beta: self.loss.beta,
            mask_ratio: self.loss.mask_ratio,
            lambda: self.loss.lambda,
            normalize_per_row: self.loss.normalize_per_row,
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            learning_rate: self.train.learning_rate,
            lr_decay: self.train.lr_decay,
            rng_seed: self.seed,
            loss: self.loss_config(),
            shuffle: self.train.shuffle,
            momentum: self.train.momentum,
            patience: self.train.patience,
            threads: self.threads,
        })
    }

    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            population: self.tune.population,
            sigma: self.tune.sigma,
            lambdas: self.tune.lambdas,
            generations: self.tune.generations,
            seed: self.seed,
            workers: self.tune.workers,
        }
    }

    pub fn gene_space(&self) -> Result<GeneSpace> {
        match &self.tune.bounds {
            None => Ok(GeneSpace::default()),
            Some(b) if b.len() == 7 => {
                let mut space = GeneSpace::default();
                for (dst, src) in space.bounds.iter_mut().zip(b) {
                    *dst = (src[0], src[1]);
                }
                Ok(space)
            }
            Some(b) => Err(CfnError::Config(format!("tune.bounds needs 7 intervals, got {}", b.len()))),
        }
    }
}
