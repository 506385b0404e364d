//! Masked denoising loss.
//!
//! For a target row `x` with known set 𝒦 and corrupted subset 𝒞 ⊆ 𝒦:
//!
//! ```text
//! L = α Σ_{j ∈ 𝒞} (ŷ_j − x_j)² + β Σ_{j ∈ 𝒦∖𝒞} (ŷ_j − x_j)² + λ‖W‖²_F
//! ```
//!
//! Indices outside 𝒦 never contribute, neither to the loss nor to its gradient.

use rand::Rng;

use crate::error::{CfnError, Result};
use crate::ratings::{SparseRow, SparseVec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Weight of the prediction error on corrupted entries.
    pub alpha: f64,
    /// Weight of the reconstruction error on uncorrupted entries.
    pub beta: f64,
    pub mask_ratio: f64,
    /// L2 coefficient on weight matrices.
    pub lambda: f64,
    /// Divide each row's data term by its number of known entries.
    pub normalize_per_row: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            alpha: 0.91,
            beta: 0.54,
            mask_ratio: 0.25,
            lambda: 1e-4,
            normalize_per_row: true,
        }
    }
}

impl LossConfig {
    pub fn new(alpha: f64, beta: f64, mask_ratio: f64, lambda: f64) -> Result<Self> {
        let cfg = LossConfig {
            alpha,
            beta,
            mask_ratio,
            lambda,
            normalize_per_row: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.beta, self.mask_ratio, self.lambda]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.alpha < 0.0 || self.beta < 0.0 || self.lambda < 0.0 {
            return Err(CfnError::Config(format!(
                "alpha, beta and lambda must be finite and non-negative: {self:?}"
            )));
        }
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err(CfnError::Config("alpha and beta cannot both be zero".into()));
        }
        if !(0.0..=1.0).contains(&self.mask_ratio) {
            return Err(CfnError::Config(format!(
                "mask_ratio must lie in [0, 1], got {}",
                self.mask_ratio
            )));
        }
        Ok(())
    }
}

/// Sorted set of corrupted known indices of one sample.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorruptionMask {
    pub corrupted: Vec<usize>,
}

impl CorruptionMask {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_indices(mut corrupted: Vec<usize>) -> Self {
        corrupted.sort_unstable();
        corrupted.dedup();
        CorruptionMask { corrupted }
    }

    pub fn len(&self) -> usize {
        self.corrupted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corrupted.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.corrupted.binary_search(&j).is_ok()
    }

    /// Flags aligned with the known indices of `target`.
    fn flags_for(&self, target: &SparseRow<'_>) -> Vec<bool> {
        let mut flags = vec![false; target.len()];
        let mut m = 0;
        for (pos, &j) in target.indices.iter().enumerate() {
            while m < self.corrupted.len() && self.corrupted[m] < j {
                m += 1;
            }
            flags[pos] = m < self.corrupted.len() && self.corrupted[m] == j;
        }
        flags
    }
}

/// Zeroes each known entry independently with probability `mask_ratio`.
///
/// Zeroed entries are dropped from the returned sparse input, which is the same
/// thing for the network since unknown inputs are zero.
pub fn corrupt<R: Rng + ?Sized>(x: SparseRow<'_>, mask_ratio: f64, rng: &mut R) -> (SparseVec, CorruptionMask) {
    if mask_ratio <= 0.0 {
        return (x.into(), CorruptionMask::none());
    }
    let mut kept = SparseVec::default();
    let mut corrupted = Vec::new();
    for (j, v) in x.iter() {
        if rng.random::<f64>() < mask_ratio {
            corrupted.push(j);
        } else {
            kept.indices.push(j);
            kept.values.push(v);
        }
    }
    (kept, CorruptionMask { corrupted })
}

/// Data term with predictions aligned to `target`'s known entries.
pub fn data_loss_at_known(predicted: &[f64], target: SparseRow<'_>, mask: &CorruptionMask, cfg: &LossConfig) -> f64 {
    debug_assert_eq!(predicted.len(), target.len());
    let flags = mask.flags_for(&target);
    let (mut corrupted, mut kept) = (0.0, 0.0);
    for ((&p, &x), &c) in predicted.iter().zip(target.values).zip(&flags) {
        let e = (p - x) * (p - x);
        if c {
            corrupted += e;
        } else {
            kept += e;
        }
    }
    cfg.alpha * corrupted + cfg.beta * kept
}

/// `dL/dŷ_j` aligned to `target`'s known entries (data term only).
pub fn gradient_at_known(predicted: &[f64], target: SparseRow<'_>, mask: &CorruptionMask, cfg: &LossConfig) -> Vec<f64> {
    debug_assert_eq!(predicted.len(), target.len());
    let flags = mask.flags_for(&target);
    predicted
        .iter()
        .zip(target.values)
        .zip(&flags)
        .map(|((&p, &x), &c)| {
            let w = if c { cfg.alpha } else { cfg.beta };
            2.0 * w * (p - x)
        })
        .collect()
}

fn gather(prediction: &[f64], target: &SparseRow<'_>) -> Result<Vec<f64>> {
    target
        .indices
        .iter()
        .map(|&j| {
            prediction.get(j).copied().ok_or_else(|| {
                CfnError::Dimension(format!(
                    "target index {j} beyond prediction of length {}",
                    prediction.len()
                ))
            })
        })
        .collect()
}

/// Full loss for a dense prediction, including `λ · weight_sq_norm`.
pub fn loss(
    prediction: &[f64],
    target: SparseRow<'_>,
    mask: &CorruptionMask,
    cfg: &LossConfig,
    weight_sq_norm: f64,
) -> Result<f64> {
    let predicted = gather(prediction, &target)?;
    Ok(data_loss_at_known(&predicted, target, mask, cfg) + cfg.lambda * weight_sq_norm)
}

/// Sparse output gradient of the data term; the `2λW` part is added at parameter level.
pub fn loss_gradient(
    prediction: &[f64],
    target: SparseRow<'_>,
    mask: &CorruptionMask,
    cfg: &LossConfig,
) -> Result<SparseVec> {
    let predicted = gather(prediction, &target)?;
    Ok(SparseVec {
        indices: target.indices.to_vec(),
        values: gradient_at_known(&predicted, target, mask, cfg),
    })
}
