//! Block-sparse fully-connected ReLU networks: `M` parallel rectifier
//! blocks combined by a linear read-out,
//!
//! ```text
//! f(x) = sum_{m=1..M} w_m . FC_m(x) - b,
//! ```
//!
//! where each block `FC_m` is a chain of layers `x -> ReLU(W x - b)` starting
//! from the full input. Blocks may have heterogeneous depths and widths.
//! Networks carry declared sup-norm bounds: `B_bs` for all block weights and
//! biases, `B_fin` for the read-out weights and the final bias; inclusion is
//! validated inclusively by [`validate_fnn`]. The homogeneity-based rescaling
//! [`rescale_fnn`] trades block norms against read-out norms without changing
//! the function.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::tensor::sup_norm_vec;

/// One fully-connected layer `x -> sigma(W x - b)` inside a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnnLayer {
    weight: Vec<f64>,
    bias: Vec<f64>,
    c_out: usize,
    c_in: usize,
}

impl FnnLayer {
    /// Builds a layer from a row-major `c_out x c_in` weight matrix.
    pub fn new(weight: Vec<f64>, bias: Vec<f64>, c_out: usize, c_in: usize) -> CoreResult<Self> {
        if weight.len() != c_out * c_in || bias.len() != c_out {
            return Err(CoreError::ShapeMismatch(format!(
                "fnn layer shapes: weight {} vs {}x{}, bias {} vs {}",
                weight.len(),
                c_out,
                c_in,
                bias.len(),
                c_out
            )));
        }
        if c_out == 0 || c_in == 0 {
            return Err(CoreError::InvalidArgument("fnn layer dimensions must be positive".into()));
        }
        if weight.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(CoreError::NumericGuard("fnn layer contains a non-finite entry".into()));
        }
        Ok(Self { weight, bias, c_out, c_in })
    }

    /// Output width.
    #[must_use]
    pub fn c_out(&self) -> usize {
        self.c_out
    }

    /// Input width.
    #[must_use]
    pub fn c_in(&self) -> usize {
        self.c_in
    }

    /// Weight entry at row `r`, column `c`.
    #[inline]
    #[must_use]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.weight[r * self.c_in + c]
    }

    /// Row-major weights.
    #[must_use]
    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// Bias vector.
    #[must_use]
    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Sup norm over weights and biases.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        sup_norm_vec(&self.weight).max(sup_norm_vec(&self.bias))
    }

    /// `ReLU(W x - b)`.
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.c_out);
        for r in 0..self.c_out {
            let mut acc = 0.0;
            for c in 0..self.c_in {
                acc += self.weight[r * self.c_in + c] * x[c];
            }
            let v = acc - self.bias[r];
            out.push(if v > 0.0 { v } else { 0.0 });
        }
        out
    }

    fn scale(&mut self, weight_factor: f64, bias_factor: f64) {
        for w in &mut self.weight {
            *w *= weight_factor;
        }
        for b in &mut self.bias {
            *b *= bias_factor;
        }
    }
}

/// A chain of rectifier layers consuming the full network input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnnBlock {
    layers: Vec<FnnLayer>,
}

impl FnnBlock {
    /// Builds a block, checking the dimension chain.
    pub fn new(layers: Vec<FnnLayer>) -> CoreResult<Self> {
        if layers.is_empty() {
            return Err(CoreError::InvalidArgument("fnn block needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[1].c_in() != pair[0].c_out() {
                return Err(CoreError::ShapeMismatch(format!(
                    "fnn block layer expects input width {}, previous layer outputs {}",
                    pair[1].c_in(),
                    pair[0].c_out()
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

    /// Input width of the first layer.
    #[must_use]
    pub fn input_dim(&self) -> usize {
        self.layers[0].c_in()
    }

    /// Output width of the last layer.
    #[must_use]
    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().c_out()
    }

    /// Layers in order.
    #[must_use]
    pub fn layers(&self) -> &[FnnLayer] {
        &self.layers
    }

    /// Largest layer width (inputs and outputs).
    #[must_use]
    pub fn max_width(&self) -> usize {
        self.layers.iter().map(|l| l.c_in().max(l.c_out())).max().unwrap_or(0)
    }

    /// Sup norm over all layer parameters.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.layers.iter().fold(0.0, |m, l| m.max(l.sup_norm()))
    }

    /// Full forward pass through every rectifier layer.
    #[must_use]
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut state = self.layers[0].forward(x);
        for layer in &self.layers[1..] {
            state = layer.forward(&state);
        }
        state
    }
}

/// What to do when an evaluation point leaves `[-1,1]^D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DomainPolicy {
    /// Reject out-of-domain points with an error.
    #[default]
    Strict,
    /// Evaluate anyway; the declared bound guarantees no longer apply.
    Lenient,
}

/// Block-sparse fully-connected ReLU network with declared norm bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSparseFnn {
    input_dim: usize,
    blocks: Vec<FnnBlock>,
    final_weights: Vec<Vec<f64>>,
    final_bias: f64,
    b_bs: f64,
    b_fin: f64,
    #[serde(default)]
    domain_policy: DomainPolicy,
}

impl BlockSparseFnn {
    /// Builds a network, checking shapes and finiteness. Norm compliance
    /// against the declared bounds is checked by [`validate_fnn`], not here,
    /// so that violating networks can be constructed and reported on.
    pub fn new(
        input_dim: usize,
        blocks: Vec<FnnBlock>,
        final_weights: Vec<Vec<f64>>,
        final_bias: f64,
        b_bs: f64,
        b_fin: f64,
    ) -> CoreResult<Self> {
        if input_dim == 0 {
            return Err(CoreError::InvalidArgument("input dimension must be positive".into()));
        }
        if blocks.is_empty() {
            return Err(CoreError::InvalidArgument("network needs at least one block".into()));
        }
        if final_weights.len() != blocks.len() {
            return Err(CoreError::ShapeMismatch(format!(
                "{} read-out vectors for {} blocks",
                final_weights.len(),
                blocks.len()
            )));
        }
        for (m, (block, w)) in blocks.iter().zip(&final_weights).enumerate() {
            if block.input_dim() != input_dim {
                return Err(CoreError::ShapeMismatch(format!(
                    "block {} consumes {} inputs, network input dimension is {}",
                    m,
                    block.input_dim(),
                    input_dim
                )));
            }
            if w.len() != block.output_dim() {
                return Err(CoreError::ShapeMismatch(format!(
                    "read-out vector {} has length {}, block outputs {}",
                    m,
                    w.len(),
                    block.output_dim()
                )));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::NumericGuard(format!(
                    "read-out vector {m} contains a non-finite entry"
                )));
            }
        }
        if !final_bias.is_finite() {
            return Err(CoreError::NumericGuard("final bias is not finite".into()));
        }
        if !(b_bs > 0.0 && b_bs.is_finite()) || !(b_fin > 0.0 && b_fin.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "declared norm bounds must be positive and finite".into(),
            ));
        }
        Ok(Self {
            input_dim,
            blocks,
            final_weights,
            final_bias,
            b_bs,
            b_fin,
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

    /// The rectifier blocks.
    #[must_use]
    pub fn blocks(&self) -> &[FnnBlock] {
        &self.blocks
    }

    /// Read-out weight vectors, one per block.
    #[must_use]
    pub fn final_weights(&self) -> &[Vec<f64>] {
        &self.final_weights
    }

    /// Final scalar bias.
    #[must_use]
    pub fn final_bias(&self) -> f64 {
        self.final_bias
    }

    /// Declared bound on block weights and biases.
    #[must_use]
    pub fn b_bs(&self) -> f64 {
        self.b_bs
    }

    /// Declared bound on read-out weights and the final bias.
    #[must_use]
    pub fn b_fin(&self) -> f64 {
        self.b_fin
    }

    /// Out-of-domain policy in force.
    #[must_use]
    pub fn domain_policy(&self) -> DomainPolicy {
        self.domain_policy
    }

    /// Number of blocks `M`.
    #[must_use]
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Largest block depth.
    #[must_use]
    pub fn max_depth(&self) -> usize {
        self.blocks.iter().map(FnnBlock::depth).max().unwrap_or(0)
    }

    /// Largest layer width over all blocks.
    #[must_use]
    pub fn max_width(&self) -> usize {
        self.blocks.iter().map(FnnBlock::max_width).max().unwrap_or(0)
    }

    /// Largest stored block parameter magnitude.
    #[must_use]
    pub fn max_block_param_norm(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.sup_norm()))
    }

    /// Largest stored read-out parameter magnitude (including the bias).
    #[must_use]
    pub fn max_final_param_norm(&self) -> f64 {
        self.final_weights
            .iter()
            .fold(self.final_bias.abs(), |m, w| m.max(sup_norm_vec(w)))
    }

    /// Evaluates the network at `x`; see [`fnn_eval`].
    pub fn eval(&self, x: &[f64]) -> CoreResult<f64> {
        fnn_eval(self, x)
    }
}

/// Evaluates `f(x) = sum_m w_m . FC_m(x) - b` on `x in [-1,1]^D`.
///
/// Out-of-domain points are rejected or admitted per the network's
/// [`DomainPolicy`].
pub fn fnn_eval(f: &BlockSparseFnn, x: &[f64]) -> CoreResult<f64> {
    if x.len() != f.input_dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "input has length {}, network expects {}",
            x.len(),
            f.input_dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NumericGuard("evaluation point contains a non-finite entry".into()));
    }
    if f.domain_policy() == DomainPolicy::Strict && x.iter().any(|v| v.abs() > 1.0) {
        return Err(CoreError::DomainViolation(format!(
            "evaluation point leaves [-1,1]^{} (max |x_i| = {})",
            f.input_dim(),
            sup_norm_vec(x)
        )));
    }
    let mut acc = 0.0;
    for (block, w) in f.blocks().iter().zip(f.final_weights()) {
        let y = block.forward(x);
        for (wi, yi) in w.iter().zip(&y) {
            acc += wi * yi;
        }
    }
    Ok(acc - f.final_bias())
}

/// Per-field validation report for a [`BlockSparseFnn`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnnValidationReport {
    /// Number of blocks.
    pub num_blocks: usize,
    /// Depth of each block.
    pub depths: Vec<usize>,
    /// Largest layer width of each block.
    pub widths: Vec<usize>,
    /// Largest stored block parameter magnitude.
    pub max_block_param_norm: f64,
    /// Declared block bound.
    pub declared_block_bound: f64,
    /// Whether every block parameter satisfies the declared bound
    /// (inclusively).
    pub block_norm_ok: bool,
    /// Largest stored read-out parameter magnitude (including the bias).
    pub max_final_param_norm: f64,
    /// Declared read-out bound.
    pub declared_final_bound: f64,
    /// Whether every read-out parameter satisfies the declared bound
    /// (inclusively).
    pub final_norm_ok: bool,
}

impl FnnValidationReport {
    /// True when every checked field passed.
    #[must_use]
    pub fn pass(&self) -> bool {
        self.block_norm_ok && self.final_norm_ok
    }
}

/// Reports stored parameter norms against the declared bounds (inclusive)
/// along with the architecture sizes. Construction already guarantees the
/// dimension chain, so only norms can fail here.
#[must_use]
pub fn validate_fnn(f: &BlockSparseFnn) -> FnnValidationReport {
    let max_block = f.max_block_param_norm();
    let max_final = f.max_final_param_norm();
    FnnValidationReport {
        num_blocks: f.num_blocks(),
        depths: f.blocks().iter().map(FnnBlock::depth).collect(),
        widths: f.blocks().iter().map(FnnBlock::max_width).collect(),
        max_block_param_norm: max_block,
        declared_block_bound: f.b_bs(),
        block_norm_ok: max_block <= f.b_bs(),
        max_final_param_norm: max_final,
        declared_final_bound: f.b_fin(),
        final_norm_ok: max_final <= f.b_fin(),
    }
}

/// Rescales a network by `k >= 1` using ReLU homogeneity: with
/// `L = max_m L_m`, block weights scale by `k^(-L/L_m)`, the bias of block
/// layer `l` (1-based) by `k^(-l L/L_m)`, read-out weights by `k^L`, and the
/// final bias is unchanged. The function is unchanged on `[-1,1]^D`; the
/// declared bounds become `(B_bs / k, k^L B_fin)`.
pub fn rescale_fnn(f: &BlockSparseFnn, k: f64) -> CoreResult<BlockSparseFnn> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "rescaling factor must satisfy k >= 1, got {k}"
        )));
    }
    if k == 1.0 {
        return Ok(f.clone());
    }
    let l_max = f.max_depth() as f64;
    let mut g = f.clone();
    for block in &mut g.blocks {
        let depth = block.layers.len() as f64;
        let weight_factor = k.powf(-l_max / depth);
        for (idx, layer) in block.layers.iter_mut().enumerate() {
            let l = (idx + 1) as f64;
            let bias_factor = k.powf(-l * l_max / depth);
            layer.scale(weight_factor, bias_factor);
        }
    }
    let readout_factor = k.powf(l_max);
    if !readout_factor.is_finite() {
        return Err(CoreError::NumericGuard(format!(
            "read-out scale k^L = {k}^{l_max} overflows"
        )));
    }
    for w in &mut g.final_weights {
        for v in w.iter_mut() {
            *v *= readout_factor;
        }
    }
    g.b_bs = f.b_bs() / k;
    g.b_fin = f.b_fin() * readout_factor;
    if !g.b_fin.is_finite() {
        return Err(CoreError::NumericGuard("rescaled read-out bound overflows".into()));
    }
    Ok(g)
}
