//! Residual convolutional networks with optional channel-wise masked
//! identity connections.
//!
//! A network pads its input `x in [-1,1]^D` to a `D x C0` signal (the input
//! occupies channel 0, all other channels are zero), pushes it through `M`
//! residual blocks,
//!
//! ```text
//! state_m = mask_m (.) state_{m-1} + ConvStack_m(state_{m-1}),
//! ```
//!
//! and reads out a scalar through an identity-activation dense layer. Every
//! block's convolution stack uses rectifier layers except its last layer,
//! which is linear, and starts and ends at the trunk channel count so the
//! identity connection adds. Without masks the identity term is the plain
//! trunk state.

use serde::{Deserialize, Serialize};

use crate::complexity::ArchSummary;
use crate::error::{CoreError, CoreResult};
use crate::fnn::DomainPolicy;
use crate::tensor::{
    conv_apply, fc_layer, sup_norm_vec, Activation, ConvFilter, DenseAffine, Signal,
};

/// One convolution layer of a residual block: filter, bias, activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvLayer {
    filter: ConvFilter,
    bias: Vec<f64>,
    activation: Activation,
}

impl ConvLayer {
    /// Builds a layer; the bias length must match the filter's output
    /// channels.
    pub fn new(filter: ConvFilter, bias: Vec<f64>, activation: Activation) -> CoreResult<Self> {
        if bias.len() != filter.c_out() {
            return Err(CoreError::ShapeMismatch(format!(
                "bias length {} does not match filter output channels {}",
                bias.len(),
                filter.c_out()
            )));
        }
        if bias.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NumericGuard("conv layer bias has a non-finite entry".into()));
        }
        Ok(Self { filter, bias, activation })
    }

    /// The convolution filter.
    #[must_use]
    pub fn filter(&self) -> &ConvFilter {
        &self.filter
    }

    /// Mutable access to the filter (training updates).
    pub fn filter_mut(&mut self) -> &mut ConvFilter {
        &mut self.filter
    }

    /// The bias vector (subtracted before the activation).
    #[must_use]
    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Mutable access to the bias (training updates).
    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// The activation applied entrywise.
    #[must_use]
    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Sup norm over filter taps and bias entries.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.filter.sup_norm().max(sup_norm_vec(&self.bias))
    }

    /// `sigma(L_w(x) - bias)`, one-sided padding.
    fn forward(&self, x: &Signal) -> CoreResult<Signal> {
        let mut y = conv_apply(&self.filter, x)?;
        for beta in 0..y.len() {
            for j in 0..y.channels() {
                let v = y.get(beta, j) - self.bias[j];
                y.set(beta, j, self.activation.apply(v));
            }
        }
        Ok(y)
    }
}

/// A stack of convolution layers forming the residual branch of one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualBlock {
    layers: Vec<ConvLayer>,
}

impl ResidualBlock {
    /// Standard form: every layer rectifies except the last, which is linear.
    pub fn new(layers: Vec<(ConvFilter, Vec<f64>)>) -> CoreResult<Self> {
        let n = layers.len();
        let conv_layers = layers
            .into_iter()
            .enumerate()
            .map(|(i, (w, b))| {
                let act = if i + 1 == n { Activation::Identity } else { Activation::ReLU };
                ConvLayer::new(w, b, act)
            })
            .collect::<CoreResult<Vec<_>>>()?;
        Self::with_activations(conv_layers)
    }

    /// General form with explicit per-layer activations. Needed when a deep
    /// block is split into depth-limited fragments: interior fragments keep
    /// their rectifier on the final layer.
    pub fn with_activations(layers: Vec<ConvLayer>) -> CoreResult<Self> {
        if layers.is_empty() {
            return Err(CoreError::InvalidArgument(
                "residual block needs at least one layer".into(),
            ));
        }
        for pair in layers.windows(2) {
            if pair[1].filter().c_in() != pair[0].filter().c_out() {
                return Err(CoreError::ShapeMismatch(format!(
                    "block layer expects {} input channels, previous layer outputs {}",
                    pair[1].filter().c_in(),
                    pair[0].filter().c_out()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Number of layers.
    #[must_use]
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Input channels of the first layer.
    #[must_use]
    pub fn in_channels(&self) -> usize {
        self.layers[0].filter().c_in()
    }

    /// Output channels of the last layer.
    #[must_use]
    pub fn out_channels(&self) -> usize {
        self.layers.last().unwrap().filter().c_out()
    }

    /// Layers in order.
    #[must_use]
    pub fn layers(&self) -> &[ConvLayer] {
        &self.layers
    }

    /// Mutable layers (training updates).
    pub fn layers_mut(&mut self) -> &mut [ConvLayer] {
        &mut self.layers
    }

    /// Largest filter size over the stack.
    #[must_use]
    pub fn max_filter_size(&self) -> usize {
        self.layers.iter().map(|l| l.filter().k()).max().unwrap_or(0)
    }

    /// Sup norm over all filter taps and biases in the stack.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.layers.iter().fold(0.0, |m, l| m.max(l.sup_norm()))
    }

    /// Applies the convolution stack alone (no identity term).
    pub fn forward(&self, x: &Signal) -> CoreResult<Signal> {
        let mut state = self.layers[0].forward(x)?;
        for layer in &self.layers[1..] {
            state = layer.forward(&state)?;
        }
        Ok(state)
    }

    /// Parameter slots including zeros: per layer
    /// `C_in * C_out * K + C_out`.
    #[must_use]
    pub fn slot_count(&self) -> usize {
        self.layers.iter().map(|l| l.filter().slot_count() + l.bias.len()).sum()
    }
}

/// Channel-wise binary mask applied to the identity connection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskVector {
    bits: Vec<u8>,
}

impl MaskVector {
    /// Builds a mask from 0/1 flags.
    pub fn new(bits: Vec<u8>) -> CoreResult<Self> {
        if bits.is_empty() {
            return Err(CoreError::InvalidArgument("mask must have at least one entry".into()));
        }
        if bits.iter().any(|b| *b > 1) {
            return Err(CoreError::InvalidArgument("mask entries must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    /// All-ones mask (identity connection fully open).
    #[must_use]
    pub fn ones(len: usize) -> Self {
        Self { bits: vec![1; len] }
    }

    /// All-zeros mask (identity connection severed).
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    /// Number of channels covered.
    #[must_use]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// True when the mask has no entries (never for constructed masks).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Raw flags.
    #[must_use]
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// True when every channel passes through.
    #[must_use]
    pub fn is_all_ones(&self) -> bool {
        self.bits.iter().all(|b| *b == 1)
    }

    /// Channel-wise product with a signal.
    #[must_use]
    pub fn apply(&self, x: &Signal) -> Signal {
        let mut y = x.clone();
        for alpha in 0..y.len() {
            for i in 0..y.channels() {
                if self.bits[i] == 0 {
                    y.set(alpha, i, 0.0);
                }
            }
        }
        y
    }
}

/// Residual convolutional network with scalar read-out and declared norm
/// bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResNetCnn {
    input_dim: usize,
    trunk_channels: usize,
    blocks: Vec<ResidualBlock>,
    masks: Option<Vec<MaskVector>>,
    readout: DenseAffine,
    b_conv: f64,
    b_fc: f64,
    #[serde(default)]
    domain_policy: DomainPolicy,
}

impl ResNetCnn {
    /// Builds a network, checking trunk consistency, mask shapes, and the
    /// read-out dimension. Norm compliance against the declared bounds is
    /// checked by [`validate_cnn`], not here.
    pub fn new(
        input_dim: usize,
        trunk_channels: usize,
        blocks: Vec<ResidualBlock>,
        masks: Option<Vec<MaskVector>>,
        readout: DenseAffine,
        b_conv: f64,
        b_fc: f64,
    ) -> CoreResult<Self> {
        if input_dim == 0 || trunk_channels == 0 {
            return Err(CoreError::InvalidArgument(
                "input dimension and trunk channels must be positive".into(),
            ));
        }
        if blocks.is_empty() {
            return Err(CoreError::InvalidArgument("network needs at least one block".into()));
        }
        for (m, block) in blocks.iter().enumerate() {
            if block.in_channels() != trunk_channels || block.out_channels() != trunk_channels {
                return Err(CoreError::ShapeMismatch(format!(
                    "block {} maps {} -> {} channels, trunk has {}",
                    m,
                    block.in_channels(),
                    block.out_channels(),
                    trunk_channels
                )));
            }
        }
        if let Some(ms) = &masks {
            if ms.len() != blocks.len() {
                return Err(CoreError::ShapeMismatch(format!(
                    "{} masks for {} blocks",
                    ms.len(),
                    blocks.len()
                )));
            }
            for (m, mask) in ms.iter().enumerate() {
                if mask.len() != trunk_channels {
                    return Err(CoreError::ShapeMismatch(format!(
                        "mask {} covers {} channels, trunk has {}",
                        m,
                        mask.len(),
                        trunk_channels
                    )));
                }
            }
        }
        if readout.c_out() != 1 || readout.n_in() != input_dim * trunk_channels {
            return Err(CoreError::ShapeMismatch(format!(
                "read-out maps {} -> {}, expected {} -> 1",
                readout.n_in(),
                readout.c_out(),
                input_dim * trunk_channels
            )));
        }
        if !(b_conv > 0.0 && b_conv.is_finite()) || !(b_fc > 0.0 && b_fc.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "declared norm bounds must be positive and finite".into(),
            ));
        }
        Ok(Self {
            input_dim,
            trunk_channels,
            blocks,
            masks,
            readout,
            b_conv,
            b_fc,
            domain_policy: DomainPolicy::Strict,
        })
    }

    /// Replaces the out-of-domain policy.
    #[must_use]
    pub fn with_domain_policy(mut self, policy: DomainPolicy) -> Self {
        self.domain_policy = policy;
        self
    }

    /// Input dimension `D`.
    #[must_use]
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Trunk channel count `C0`.
    #[must_use]
    pub fn trunk_channels(&self) -> usize {
        self.trunk_channels
    }

    /// Residual blocks in order.
    #[must_use]
    pub fn blocks(&self) -> &[ResidualBlock] {
        &self.blocks
    }

    /// Mutable blocks (training updates).
    pub fn blocks_mut(&mut self) -> &mut [ResidualBlock] {
        &mut self.blocks
    }

    /// Identity-connection masks, if any.
    #[must_use]
    pub fn masks(&self) -> Option<&[MaskVector]> {
        self.masks.as_deref()
    }

    /// Scalar read-out layer.
    #[must_use]
    pub fn readout(&self) -> &DenseAffine {
        &self.readout
    }

    /// Mutable read-out (training updates).
    pub fn readout_mut(&mut self) -> &mut DenseAffine {
        &mut self.readout
    }

    /// Declared bound on block parameters.
    #[must_use]
    pub fn b_conv(&self) -> f64 {
        self.b_conv
    }

    /// Declared bound on read-out parameters.
    #[must_use]
    pub fn b_fc(&self) -> f64 {
        self.b_fc
    }

    /// Number of blocks.
    #[must_use]
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Largest block depth.
    #[must_use]
    pub fn max_block_depth(&self) -> usize {
        self.blocks.iter().map(ResidualBlock::depth).max().unwrap_or(0)
    }

    /// Largest filter size anywhere in the network.
    #[must_use]
    pub fn max_filter_size(&self) -> usize {
        self.blocks.iter().map(ResidualBlock::max_filter_size).max().unwrap_or(0)
    }

    /// Largest stored block parameter magnitude.
    #[must_use]
    pub fn max_conv_param_norm(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.sup_norm()))
    }

    /// Largest stored read-out parameter magnitude.
    #[must_use]
    pub fn max_fc_param_norm(&self) -> f64 {
        self.readout.sup_norm()
    }

    /// Pads `x` to the trunk: channel 0 carries the input, the rest are zero.
    #[must_use]
    pub fn pad_input(&self, x: &[f64]) -> Signal {
        let mut s = Signal::zeros(self.input_dim, self.trunk_channels);
        for (alpha, v) in x.iter().enumerate() {
            s.set(alpha, 0, *v);
        }
        s
    }

    /// Evaluates the network; see [`cnn_eval`].
    pub fn eval(&self, x: &[f64]) -> CoreResult<f64> {
        cnn_eval(self, x)
    }

    /// Evaluates and returns the trunk state after every block;
    /// `trace[0]` is the padded input, `trace[m]` the state after block `m`.
    pub fn eval_trace(&self, x: &[f64]) -> CoreResult<(f64, Vec<Signal>)> {
        self.check_input(x)?;
        let mut state = self.pad_input(x);
        let mut trace = vec![state.clone()];
        for (m, block) in self.blocks.iter().enumerate() {
            let branch = block.forward(&state)?;
            let identity = match &self.masks {
                Some(ms) => ms[m].apply(&state),
                None => state,
            };
            let mut next = identity;
            for alpha in 0..next.len() {
                for i in 0..next.channels() {
                    let v = next.get(alpha, i) + branch.get(alpha, i);
                    next.set(alpha, i, v);
                }
            }
            state = next;
            trace.push(state.clone());
        }
        let y = fc_layer(&self.readout, Activation::Identity, &state)?;
        Ok((y[0], trace))
    }

    fn check_input(&self, x: &[f64]) -> CoreResult<()> {
        if x.len() != self.input_dim {
            return Err(CoreError::ShapeMismatch(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NumericGuard(
                "evaluation point contains a non-finite entry".into(),
            ));
        }
        if self.domain_policy == DomainPolicy::Strict && x.iter().any(|v| v.abs() > 1.0) {
            return Err(CoreError::DomainViolation(format!(
                "evaluation point leaves [-1,1]^{} (max |x_i| = {})",
                self.input_dim,
                sup_norm_vec(x)
            )));
        }
        Ok(())
    }

    /// Total parameter slots including zeros (blocks plus read-out).
    #[must_use]
    pub fn slot_count(&self) -> usize {
        let block_slots: usize = self.blocks.iter().map(ResidualBlock::slot_count).sum();
        block_slots + self.readout.slot_count()
    }
}

/// Evaluates the network at `x in [-1,1]^D`: pad, residual blocks with
/// (masked) identity connections, linear read-out.
pub fn cnn_eval(net: &ResNetCnn, x: &[f64]) -> CoreResult<f64> {
    net.check_input(x)?;
    let mut state = net.pad_input(x);
    for (m, block) in net.blocks.iter().enumerate() {
        let branch = block.forward(&state)?;
        let mut next = match &net.masks {
            Some(ms) => ms[m].apply(&state),
            None => state,
        };
        for alpha in 0..next.len() {
            for i in 0..next.channels() {
                let v = next.get(alpha, i) + branch.get(alpha, i);
                next.set(alpha, i, v);
            }
        }
        state = next;
    }
    let y = fc_layer(&net.readout, Activation::Identity, &state)?;
    Ok(y[0])
}

/// Clips a prediction to `[-F, F]`: `(y v -F) ^ F`. Callers must pass
/// `F >= 0`.
#[must_use]
pub fn clip_output(y: f64, f: f64) -> f64 {
    debug_assert!(f >= 0.0, "clip level must be nonnegative");
    y.max(-f).min(f)
}

/// Per-field validation report comparing a network to an expected
/// architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnValidationReport {
    /// Input dimension matches.
    pub input_dim_ok: bool,
    /// Trunk channel count matches.
    pub trunk_channels_ok: bool,
    /// Block count matches.
    pub block_count_ok: bool,
    /// Every block depth matches.
    pub depths_ok: bool,
    /// Every layer's channel counts match.
    pub channels_ok: bool,
    /// Every layer's filter size matches.
    pub filters_ok: bool,
    /// All block parameters within the expected conv bound (inclusive).
    pub conv_norm_ok: bool,
    /// All read-out parameters within the expected read-out bound
    /// (inclusive).
    pub fc_norm_ok: bool,
    /// Mask presence matches the expectation.
    pub masking_ok: bool,
    /// Largest stored block parameter magnitude.
    pub realized_conv_norm: f64,
    /// Largest stored read-out parameter magnitude.
    pub realized_fc_norm: f64,
    /// Realized depth of each block.
    pub per_block_depths: Vec<usize>,
    /// Human-readable description of each failed comparison.
    pub mismatches: Vec<String>,
}

impl CnnValidationReport {
    /// True when every checked field passed.
    #[must_use]
    pub fn pass(&self) -> bool {
        self.input_dim_ok
            && self.trunk_channels_ok
            && self.block_count_ok
            && self.depths_ok
            && self.channels_ok
            && self.filters_ok
            && self.conv_norm_ok
            && self.fc_norm_ok
            && self.masking_ok
    }
}

/// Checks a network against an expected architecture: dimensions, per-layer
/// channels and filter sizes, norm bounds (inclusive), and mask presence.
#[must_use]
pub fn validate_cnn(net: &ResNetCnn, expected: &ArchSummary) -> CnnValidationReport {
    let mut mismatches = Vec::new();
    let input_dim_ok = net.input_dim() == expected.d();
    if !input_dim_ok {
        mismatches.push(format!("input dim {} != expected {}", net.input_dim(), expected.d()));
    }
    let trunk_channels_ok = net.trunk_channels() == expected.c0();
    if !trunk_channels_ok {
        mismatches.push(format!(
            "trunk channels {} != expected {}",
            net.trunk_channels(),
            expected.c0()
        ));
    }
    let block_count_ok = net.num_blocks() == expected.num_blocks();
    if !block_count_ok {
        mismatches.push(format!(
            "block count {} != expected {}",
            net.num_blocks(),
            expected.num_blocks()
        ));
    }
    let mut depths_ok = true;
    let mut channels_ok = true;
    let mut filters_ok = true;
    for (m, block) in net.blocks().iter().enumerate() {
        let Some(expect_layers) = expected.block_layers(m) else {
            continue;
        };
        if block.depth() != expect_layers.len() {
            depths_ok = false;
            mismatches.push(format!(
                "block {} depth {} != expected {}",
                m,
                block.depth(),
                expect_layers.len()
            ));
            continue;
        }
        for (l, layer) in block.layers().iter().enumerate() {
            let (exp_c_out, exp_k) = expect_layers[l];
            if layer.filter().c_out() != exp_c_out {
                channels_ok = false;
                mismatches.push(format!(
                    "block {} layer {} outputs {} channels != expected {}",
                    m,
                    l,
                    layer.filter().c_out(),
                    exp_c_out
                ));
            }
            if layer.filter().k() != exp_k {
                filters_ok = false;
                mismatches.push(format!(
                    "block {} layer {} filter size {} != expected {}",
                    m,
                    l,
                    layer.filter().k(),
                    exp_k
                ));
            }
        }
    }
    let realized_conv_norm = net.max_conv_param_norm();
    let conv_norm_ok = realized_conv_norm <= expected.b_conv();
    if !conv_norm_ok {
        mismatches.push(format!(
            "block parameter norm {} exceeds bound {}",
            realized_conv_norm,
            expected.b_conv()
        ));
    }
    let realized_fc_norm = net.max_fc_param_norm();
    let fc_norm_ok = realized_fc_norm <= expected.b_fc();
    if !fc_norm_ok {
        mismatches.push(format!(
            "read-out parameter norm {} exceeds bound {}",
            realized_fc_norm,
            expected.b_fc()
        ));
    }
    let masking_ok = net.masks().is_some() == expected.masked();
    if !masking_ok {
        mismatches.push(format!(
            "mask presence {} != expected {}",
            net.masks().is_some(),
            expected.masked()
        ));
    }
    CnnValidationReport {
        input_dim_ok,
        trunk_channels_ok,
        block_count_ok,
        depths_ok,
        channels_ok,
        filters_ok,
        conv_norm_ok,
        fc_norm_ok,
        masking_ok,
        realized_conv_norm,
        realized_fc_norm,
        per_block_depths: net.blocks().iter().map(ResidualBlock::depth).collect(),
        mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn zero_block(c0: usize, depth: usize, k: usize) -> ResidualBlock {
        let layers = (0..depth).map(|_| (ConvFilter::zeros(k, c0, c0), vec![0.0; c0])).collect();
        ResidualBlock::new(layers).unwrap()
    }

    fn selector_readout(d: usize, c0: usize, alpha: usize, i: usize) -> DenseAffine {
        let mut a = DenseAffine::zeros(1, d * c0);
        a.set(0, alpha * c0 + i, 1.0);
        a
    }

    fn random_block(rng: &mut impl Rng, c0: usize, depth: usize, k: usize, scale: f64) -> ResidualBlock {
        let layers = (0..depth)
            .map(|_| {
                let taps =
                    (0..k * c0 * c0).map(|_| rng.gen_range(-scale..=scale)).collect::<Vec<_>>();
                let bias = (0..c0).map(|_| rng.gen_range(-scale..=scale)).collect::<Vec<_>>();
                (ConvFilter::new(taps, k, c0, c0).unwrap(), bias)
            })
            .collect();
        ResidualBlock::new(layers).unwrap()
    }

    fn random_net(rng: &mut impl Rng, d: usize, c0: usize, m: usize, scale: f64) -> ResNetCnn {
        let k = rng.gen_range(1..=d.min(3));
        let blocks = (0..m)
            .map(|_| {
                let depth = rng.gen_range(1..=3);
                random_block(rng, c0, depth, k, scale)
            })
            .collect::<Vec<_>>();
        let weight = (0..d * c0).map(|_| rng.gen_range(-scale..=scale)).collect::<Vec<_>>();
        let bias = vec![rng.gen_range(-scale..=scale)];
        let readout = DenseAffine::new(weight, bias, 1, d * c0).unwrap();
        ResNetCnn::new(d, c0, blocks, None, readout, scale.max(1e-6), scale.max(1e-6)).unwrap()
    }

    #[test]
    fn identity_path_returns_first_coordinate() {
        let (d, c0) = (4, 3);
        let net = ResNetCnn::new(
            d,
            c0,
            vec![zero_block(c0, 2, 2)],
            None,
            selector_readout(d, c0, 0, 0),
            1.0,
            1.0,
        )
        .unwrap();
        let x = [0.7, -0.2, 0.1, 0.9];
        assert_eq!(net.eval(&x).unwrap(), 0.7);
    }

    #[test]
    fn all_zero_mask_severs_identity() {
        let (d, c0) = (4, 3);
        let net = ResNetCnn::new(
            d,
            c0,
            vec![zero_block(c0, 2, 2)],
            Some(vec![MaskVector::zeros(c0)]),
            selector_readout(d, c0, 0, 0),
            1.0,
            1.0,
        )
        .unwrap();
        let x = [0.7, -0.2, 0.1, 0.9];
        assert_eq!(net.eval(&x).unwrap(), 0.0);
    }

    #[test]
    fn clip_output_examples() {
        assert_eq!(clip_output(5.0, 2.0), 2.0);
        assert_eq!(clip_output(-5.0, 2.0), -2.0);
        assert_eq!(clip_output(1.0, 2.0), 1.0);
    }

    #[test]
    fn trunk_channel_mismatch_rejected() {
        let block = zero_block(3, 1, 2);
        let err = ResNetCnn::new(4, 2, vec![block], None, DenseAffine::zeros(1, 8), 1.0, 1.0);
        assert!(matches!(err, Err(CoreError::ShapeMismatch(_))));
    }

    #[test]
    fn mask_length_mismatch_rejected() {
        let block = zero_block(3, 1, 2);
        let err = ResNetCnn::new(
            4,
            3,
            vec![block],
            Some(vec![MaskVector::ones(2)]),
            DenseAffine::zeros(1, 12),
            1.0,
            1.0,
        );
        assert!(matches!(err, Err(CoreError::ShapeMismatch(_))));
    }

    #[test]
    fn strict_domain_enforced() {
        let net = ResNetCnn::new(
            2,
            1,
            vec![zero_block(1, 1, 1)],
            None,
            selector_readout(2, 1, 0, 0),
            1.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(net.eval(&[1.2, 0.0]), Err(CoreError::DomainViolation(_))));
        let lenient = net.with_domain_policy(DomainPolicy::Lenient);
        assert_eq!(lenient.eval(&[1.2, 0.0]).unwrap(), 1.2);
    }

    #[test]
    fn validation_passes_compliant_network() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let net = random_net(&mut rng, 4, 2, 2, 0.5);
        let arch = ArchSummary::from_cnn(&net);
        let report = validate_cnn(&net, &arch);
        assert!(report.pass(), "mismatches: {:?}", report.mismatches);
    }

    #[test]
    fn validation_flags_filter_size_change() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let net = random_net(&mut rng, 4, 2, 2, 0.5);
        let mut arch = ArchSummary::from_cnn(&net);
        let k = net.blocks()[0].layers()[0].filter().k();
        arch.set_layer_filter(0, 0, k + 1).unwrap();
        let report = validate_cnn(&net, &arch);
        assert!(!report.filters_ok);
        assert!(!report.pass());
    }

    #[test]
    fn validation_accepts_boundary_norm_inclusively() {
        let (d, c0) = (3, 2);
        let mut filter = ConvFilter::zeros(1, c0, c0);
        filter.set(0, 0, 0, 0.5);
        let block = ResidualBlock::new(vec![(filter, vec![0.0; c0])]).unwrap();
        let mut readout = DenseAffine::zeros(1, d * c0);
        readout.set(0, 0, 2.0); // exactly the declared read-out bound
        let net = ResNetCnn::new(d, c0, vec![block], None, readout, 0.5, 2.0).unwrap();
        let arch = ArchSummary::from_cnn(&net);
        let report = validate_cnn(&net, &arch);
        assert!(report.conv_norm_ok && report.fc_norm_ok);
        assert!(report.pass());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn zero_blocks_reduce_to_readout_of_padding(seed in 0u64..500) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=6);
            let c0 = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=3);
            let blocks = (0..m)
                .map(|_| zero_block(c0, rng.gen_range(1..=3), rng.gen_range(1..=d)))
                .collect::<Vec<_>>();
            let weight = (0..d * c0).map(|_| rng.gen_range(-1.0..=1.0)).collect::<Vec<_>>();
            let bias = vec![rng.gen_range(-1.0..=1.0)];
            let readout = DenseAffine::new(weight.clone(), bias.clone(), 1, d * c0).unwrap();
            let net = ResNetCnn::new(d, c0, blocks, None, readout, 1.0, 1.0).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let y = net.eval(&x).unwrap();
            // read-out of the padded input directly
            let mut expect = -bias[0];
            for (alpha, v) in x.iter().enumerate() {
                expect += weight[alpha * c0] * v;
            }
            prop_assert!((y - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }

        #[test]
        fn all_ones_masks_match_plain_evaluation(seed in 0u64..500) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=5);
            let c0 = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=3);
            let plain = random_net(&mut rng, d, c0, m, 0.8);
            let masked = ResNetCnn::new(
                plain.input_dim(),
                plain.trunk_channels(),
                plain.blocks().to_vec(),
                Some(vec![MaskVector::ones(c0); plain.num_blocks()]),
                plain.readout().clone(),
                plain.b_conv(),
                plain.b_fc(),
            )
            .unwrap();
            for _ in 0..5 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                // bit-identical, not merely close
                prop_assert!(plain.eval(&x).unwrap() == masked.eval(&x).unwrap());
            }
        }

        #[test]
        fn clip_is_bounded_and_identity_inside(y in -100.0f64..100.0, f in 0.0f64..10.0) {
            let c = clip_output(y, f);
            prop_assert!(c.abs() <= f);
            if y.abs() <= f {
                prop_assert!(c == y);
            }
        }
    }
}
