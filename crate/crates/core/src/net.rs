//! Single-bottleneck autoencoder over sparse rating rows with optional side
//! information wired into both the encoder and the decoder inputs.
//!
//! ```text
//! hidden = σ(W₁ · {u, x} + b₁)            W₁ : k × (N + P)
//! output = τ(V′ · {hidden, x} + b₂)       V′ : N × (k + P)
//! ```
//!
//! Unknown entries of `u` are never read: the encoder pre-activation is
//! accumulated over stored entries only, which is exactly the zero-filled
//! dense product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::str::FromStr;

use crate::error::{CfnError, Result};
use crate::ratings::{SparseRatings, SparseRow, SparseVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    Tanh,
    Identity,
}

impl Transfer {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transfer::Tanh => x.tanh(),
            Transfer::Identity => x,
        }
    }

    /// Derivative expressed through the activation value `y = apply(x)`.
    #[inline]
    pub fn derivative_at_output(self, y: f64) -> f64 {
        match self {
            Transfer::Tanh => 1.0 - y * y,
            Transfer::Identity => 1.0,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Transfer::Tanh => 0,
            Transfer::Identity => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Transfer::Tanh),
            1 => Some(Transfer::Identity),
            _ => None,
        }
    }
}

impl FromStr for Transfer {
    type Err = CfnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Transfer::Tanh),
            "identity" | "linear" | "none" => Ok(Transfer::Identity),
            other => Err(CfnError::Config(format!("unknown transfer function `{other}`"))),
        }
    }
}

/// Shape and transfer functions of an autoencoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    /// N (U-CFN: number of items; V-CFN: number of users).
    pub input_dim: usize,
    /// k
    pub bottleneck: usize,
    /// P or Q, zero without side information.
    pub side_dim: usize,
    pub hidden_transfer: Transfer,
    pub output_transfer: Transfer,
}

impl ModelSpec {
    pub fn new(input_dim: usize, bottleneck: usize, side_dim: usize) -> Self {
        ModelSpec {
            input_dim,
            bottleneck,
            side_dim,
            hidden_transfer: Transfer::Tanh,
            output_transfer: Transfer::Identity,
        }
    }

    pub fn with_transfers(mut self, hidden: Transfer, output: Transfer) -> Self {
        self.hidden_transfer = hidden;
        self.output_transfer = output;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.bottleneck == 0 {
            return Err(CfnError::Config(format!(
                "input_dim and bottleneck must be positive (N={}, k={})",
                self.input_dim, self.bottleneck
            )));
        }
        if self.side_dim > 0
            && !(self.side_dim < self.bottleneck && self.bottleneck < self.input_dim)
        {
            return Err(CfnError::SideConstraint {
                side_dim: self.side_dim,
                bottleneck: self.bottleneck,
                input_dim: self.input_dim,
            });
        }
        Ok(())
    }

    fn encoder_width(&self) -> usize {
        self.input_dim + self.side_dim
    }

    fn decoder_width(&self) -> usize {
        self.bottleneck + self.side_dim
    }
}

/// Parameter storage shared by models and their gradients.
///
/// The encoder is stored input-major: the k weights fed by input `c` are
/// contiguous at `encoder[c*k .. (c+1)*k]`. The decoder is row-major, one
/// contiguous row of length `k + P` per output.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub encoder: Vec<f64>,
    pub encoder_bias: Vec<f64>,
    pub decoder: Vec<f64>,
    pub decoder_bias: Vec<f64>,
}

impl Params {
    pub fn zeros(spec: &ModelSpec) -> Self {
        Params {
            encoder: vec![0.0; spec.encoder_width() * spec.bottleneck],
            encoder_bias: vec![0.0; spec.bottleneck],
            decoder: vec![0.0; spec.input_dim * spec.decoder_width()],
            decoder_bias: vec![0.0; spec.input_dim],
        }
    }

    /// Squared Frobenius norm of the weight matrices (biases excluded).
    pub fn weight_sq_norm(&self) -> f64 {
        self.encoder.iter().chain(&self.decoder).map(|w| w * w).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|&v| v == 0.0))
    }

    pub fn slices(&self) -> [&[f64]; 4] {
        [
            &self.encoder,
            &self.encoder_bias,
            &self.decoder,
            &self.decoder_bias,
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [
            &mut self.encoder,
            &mut self.encoder_bias,
            &mut self.decoder,
            &mut self.decoder_bias,
        ]
    }

    /// Adds the gradient of `λ‖W‖²_F`.
    pub fn add_weight_decay(&mut self, weights: &Params, lambda: f64) {
        for (g, w) in self.encoder.iter_mut().zip(&weights.encoder) {
            *g += 2.0 * lambda * w;
        }
        for (g, w) in self.decoder.iter_mut().zip(&weights.decoder) {
            *g += 2.0 * lambda * w;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

pub type Gradients = Params;

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    spec: ModelSpec,
    params: Params,
    init_seed: u64,
    epochs_completed: usize,
}

/// Activations cached by [`forward`] for [`backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// The (possibly corrupted) input that was fed; its indices are the known set.
    pub input: SparseVec,
    pub side: Vec<f64>,
    pub pre_hidden: Vec<f64>,
    pub hidden: Vec<f64>,
    /// Outputs after the output transfer.
    pub output: Vec<f64>,
}

impl AutoencoderModel {
    /// Fan-in initialization: weights uniform in ±1/√fan_in, biases zero.
    pub fn init(spec: ModelSpec, rng_seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut params = Params::zeros(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let enc_bound = 1.0 / (spec.encoder_width() as f64).sqrt();
        for w in params.encoder.iter_mut() {
            *w = rng.random_range(-enc_bound..=enc_bound);
        }
        let dec_bound = 1.0 / (spec.decoder_width() as f64).sqrt();
        for w in params.decoder.iter_mut() {
            *w = rng.random_range(-dec_bound..=dec_bound);
        }
        Ok(AutoencoderModel {
            spec,
            params,
            init_seed: rng_seed,
            epochs_completed: 0,
        })
    }

    pub fn from_parts(
        spec: ModelSpec,
        params: Params,
        init_seed: u64,
        epochs_completed: usize,
    ) -> Result<Self> {
        spec.validate()?;
        let expected = Params::zeros(&spec);
        for (a, b) in params.slices().iter().zip(expected.slices()) {
            if a.len() != b.len() {
                return Err(CfnError::Dimension(format!(
                    "parameter block of length {} where {} was expected",
                    a.len(),
                    b.len()
                )));
            }
        }
        if !params.all_finite() {
            return Err(CfnError::NonFinite("model parameters".into()));
        }
        Ok(AutoencoderModel {
            spec,
            params,
            init_seed,
            epochs_completed,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn bottleneck(&self) -> usize {
        self.spec.bottleneck
    }

    pub fn side_dim(&self) -> usize {
        self.spec.side_dim
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn epochs_completed(&self) -> usize {
        self.epochs_completed
    }

    pub(crate) fn set_epochs_completed(&mut self, epochs: usize) {
        self.epochs_completed = epochs;
    }

    /// `W₁[h, c]` for `c < N + P`.
    pub fn encoder_weight(&self, h: usize, c: usize) -> f64 {
        self.params.encoder[c * self.spec.bottleneck + h]
    }

    /// `V′[j, c]` for `c < k + P`.
    pub fn decoder_weight(&self, j: usize, c: usize) -> f64 {
        self.params.decoder[j * self.spec.decoder_width() + c]
    }

    fn encoder_column(&self, c: usize) -> &[f64] {
        let k = self.spec.bottleneck;
        &self.params.encoder[c * k..(c + 1) * k]
    }

    fn decoder_row(&self, j: usize) -> &[f64] {
        let w = self.spec.decoder_width();
        &self.params.decoder[j * w..(j + 1) * w]
    }

    pub fn weight_sq_norm(&self) -> f64 {
        self.params.weight_sq_norm()
    }

    fn check_inputs(&self, input: &SparseRow<'_>, side: Option<&[f64]>) -> Result<()> {
        if let Some(&last) = input.indices.last() {
            if last >= self.spec.input_dim {
                return Err(CfnError::Dimension(format!(
                    "input index {last} >= input_dim {}",
                    self.spec.input_dim
                )));
            }
        }
        let got = side.map_or(0, <[f64]>::len);
        if got != self.spec.side_dim {
            return Err(CfnError::Dimension(format!(
                "side vector of length {got}, model expects {}",
                self.spec.side_dim
            )));
        }
        Ok(())
    }

    /// Hidden pre-activation and activation.
    fn encode(&self, input: &SparseRow<'_>, side: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut z = self.params.encoder_bias.clone();
        for (c, x) in input.iter() {
            axpy(x, self.encoder_column(c), &mut z);
        }
        for (p, &s) in side.iter().enumerate() {
            axpy(s, self.encoder_column(self.spec.input_dim + p), &mut z);
        }
        let h = z.iter().map(|&v| self.spec.hidden_transfer.apply(v)).collect();
        (z, h)
    }

    #[inline]
    fn decode_one(&self, j: usize, hidden: &[f64], side: &[f64]) -> f64 {
        let row = self.decoder_row(j);
        let k = self.spec.bottleneck;
        let pre = self.params.decoder_bias[j] + dot(&row[..k], hidden) + dot(&row[k..], side);
        self.spec.output_transfer.apply(pre)
    }

    /// Dense prediction for one sparse row.
    pub fn forward(&self, input: SparseRow<'_>, side: Option<&[f64]>) -> Result<(Vec<f64>, ForwardTrace)> {
        self.check_inputs(&input, side)?;
        let side = side.unwrap_or(&[]);
        let (pre_hidden, hidden) = self.encode(&input, side);
        let output: Vec<f64> = (0..self.spec.input_dim)
            .map(|j| self.decode_one(j, &hidden, side))
            .collect();
        if let Some(j) = output.iter().position(|v| !v.is_finite()) {
            return Err(CfnError::NonFinite(format!("output {j} of forward pass")));
        }
        let trace = ForwardTrace {
            input: input.into(),
            side: side.to_vec(),
            pre_hidden,
            hidden,
            output: output.clone(),
        };
        Ok((output, trace))
    }

    /// Outputs at the requested indices only, plus the hidden activation.
    ///
    /// Same values as the matching entries of [`forward`](Self::forward).
    pub fn forward_at(
        &self,
        input: SparseRow<'_>,
        side: Option<&[f64]>,
        outputs: &[usize],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_inputs(&input, side)?;
        let side = side.unwrap_or(&[]);
        let (_, hidden) = self.encode(&input, side);
        let mut out = Vec::with_capacity(outputs.len());
        for &j in outputs {
            if j >= self.spec.input_dim {
                return Err(CfnError::OutOfRange(format!(
                    "output {j} >= input_dim {}",
                    self.spec.input_dim
                )));
            }
            let y = self.decode_one(j, &hidden, side);
            if !y.is_finite() {
                return Err(CfnError::NonFinite(format!("output {j} of forward pass")));
            }
            out.push(y);
        }
        Ok((out, hidden))
    }

    /// Back-propagates `dL/d output` given at a sparse set of output indices.
    pub fn backward(&self, trace: &ForwardTrace, output_gradient: SparseRow<'_>) -> Result<Gradients> {
        if trace.hidden.len() != self.spec.bottleneck || trace.output.len() != self.spec.input_dim {
            return Err(CfnError::Dimension("trace does not match the model".into()));
        }
        if let Some(&last) = output_gradient.indices.last() {
            if last >= self.spec.input_dim {
                return Err(CfnError::Dimension(format!(
                    "gradient index {last} >= input_dim {}",
                    self.spec.input_dim
                )));
            }
        }
        let outputs: Vec<f64> = output_gradient
            .indices
            .iter()
            .map(|&j| trace.output[j])
            .collect();
        let contrib = self.sample_gradient(
            trace.input.clone(),
            &trace.side,
            trace.hidden.clone(),
            &outputs,
            output_gradient,
        );
        let mut grads = Params::zeros(&self.spec);
        contrib.scatter(&self.spec, &mut grads, 1.0);
        Ok(grads)
    }

    /// Per-sample gradient in compact form: only touched rows/columns are represented.
    ///
    /// `outputs[i]` is the activation at `output_gradient.indices[i]`.
    pub(crate) fn sample_gradient(
        &self,
        input: SparseVec,
        side: &[f64],
        hidden: Vec<f64>,
        outputs: &[f64],
        output_gradient: SparseRow<'_>,
    ) -> SampleGradient {
        let k = self.spec.bottleneck;
        let mut delta_hidden = vec![0.0; k];
        let mut out = Vec::with_capacity(output_gradient.len());
        for (i, (j, g)) in output_gradient.iter().enumerate() {
            let d = g * self.spec.output_transfer.derivative_at_output(outputs[i]);
            if d != 0.0 {
                axpy(d, &self.decoder_row(j)[..k], &mut delta_hidden);
            }
            out.push((j, d));
        }
        for (dz, &h) in delta_hidden.iter_mut().zip(&hidden) {
            *dz *= self.spec.hidden_transfer.derivative_at_output(h);
        }
        SampleGradient {
            input,
            side: side.to_vec(),
            hidden,
            delta_hidden,
            delta_output: out,
        }
    }
}

/// Gradient of one sample restricted to the parameters it touches.
#[derive(Debug, Clone)]
pub(crate) struct SampleGradient {
    pub input: SparseVec,
    pub side: Vec<f64>,
    pub hidden: Vec<f64>,
    /// dL/d(hidden pre-activation)
    pub delta_hidden: Vec<f64>,
    /// dL/d(output pre-activation) at each touched output
    pub delta_output: Vec<(usize, f64)>,
}

impl SampleGradient {
    /// `target += scale * gradient`
    pub fn scatter(&self, spec: &ModelSpec, target: &mut Params, scale: f64) {
        let k = spec.bottleneck;
        let dw = spec.decoder_width();
        for (c, x) in self.input.as_row().iter() {
            axpy(scale * x, &self.delta_hidden, &mut target.encoder[c * k..(c + 1) * k]);
        }
        for (p, &s) in self.side.iter().enumerate() {
            let c = spec.input_dim + p;
            axpy(scale * s, &self.delta_hidden, &mut target.encoder[c * k..(c + 1) * k]);
        }
        axpy(scale, &self.delta_hidden, &mut target.encoder_bias);
        for &(j, d) in &self.delta_output {
            if d == 0.0 {
                continue;
            }
            let row = &mut target.decoder[j * dw..(j + 1) * dw];
            axpy(scale * d, &self.hidden, &mut row[..k]);
            axpy(scale * d, &self.side, &mut row[k..]);
            target.decoder_bias[j] += scale * d;
        }
    }
}

#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `prediction = factor · code` for every row of a linear autoencoder.
#[derive(Debug, Clone)]
pub struct LinearDecomposition {
    /// `[W₂ | I_N]`, `N x (k + N)` row-major.
    pub factor: Vec<Vec<f64>>,
    /// One `[W₁u + b₁ ; b₂]` column per input row, each of length `k + N`.
    pub codes: Vec<Vec<f64>>,
}

impl LinearDecomposition {
    /// Predictions reconstructed from the factorization, one dense vector per input row.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        self.codes
            .iter()
            .map(|code| self.factor.iter().map(|f| dot(f, code)).collect())
            .collect()
    }
}

/// Rewrites a linear autoencoder as a matrix factorization over the given rows.
pub fn decompose_linear(model: &AutoencoderModel, rows: &SparseRatings) -> Result<LinearDecomposition> {
    let spec = model.spec();
    if spec.side_dim > 0 {
        return Err(CfnError::Precondition(
            "linear decomposition is defined for models without side information".into(),
        ));
    }
    if spec.hidden_transfer != Transfer::Identity || spec.output_transfer != Transfer::Identity {
        return Err(CfnError::Precondition(
            "linear decomposition needs identity hidden and output transfers".into(),
        ));
    }
    if rows.n_cols() != spec.input_dim {
        return Err(CfnError::Dimension(format!(
            "rows have {} columns, model input_dim is {}",
            rows.n_cols(),
            spec.input_dim
        )));
    }
    let (n, k) = (spec.input_dim, spec.bottleneck);
    let factor = (0..n)
        .map(|j| {
            let mut f = vec![0.0; k + n];
            f[..k].copy_from_slice(&model.decoder_row(j)[..k]);
            f[k + j] = 1.0;
            f
        })
        .collect();
    let codes = (0..rows.n_rows())
        .map(|r| {
            let (_, hidden) = model.encode(&rows.row(r), &[]);
            let mut code = hidden;
            code.extend_from_slice(&model.params().decoder_bias);
            code
        })
        .collect();
    Ok(LinearDecomposition { factor, codes })
}
