//! Compilation of block-sparse rectifier networks into function-identical
//! residual convolutional networks with certified size and norm bounds, and
//! division of deep residual blocks into constant-depth masked blocks.
//!
//! The pipeline per source block: realize each first-layer ridge
//! `x -> a.x - t` as a linear convolution stack of depth
//! `L0 = ceil((D-1)/(K-1))` ([`ridge_conv`]), rectify it by doubling channels
//! into positive/negative parts ([`relu_double`]), run the remaining
//! fully-connected layers through size-1 filters, and append one linear
//! size-1 layer that deposits the scaled block read-out into two trunk
//! accumulator channels. The trunk layout is fixed: channel 0 carries the
//! input unchanged, channels 1 and 2 accumulate `+(q/2)` and `-(q/2)` times
//! the running read-out sum (`q` the reciprocal of the final read-out scale),
//! and all higher channels stay zero between blocks, which lets every block
//! reuse them — and even channels 0..2 — as interior workspace. The dense
//! read-out reads the two accumulators at spatial index 0, scales by
//! `r = B_fin (1 v 1/B_bs)`, and subtracts the source network's final bias.

use serde::{Deserialize, Serialize};

use crate::cnn::{ConvLayer, MaskVector, ResNetCnn, ResidualBlock};
use crate::error::{CoreError, CoreResult};
use crate::fnn::{validate_fnn, BlockSparseFnn};
use crate::tensor::{conv_layer, Activation, ConvFilter, DenseAffine, Signal};

/// A plain stack of convolution layers sharing one activation; compilation
/// scaffolding for ridge realizations and their rectifier doublings.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvStack {
    layers: Vec<(ConvFilter, Vec<f64>)>,
    activation: Activation,
}

impl ConvStack {
    /// Builds a stack, checking the channel chain and bias lengths.
    pub fn new(layers: Vec<(ConvFilter, Vec<f64>)>, activation: Activation) -> CoreResult<Self> {
        if layers.is_empty() {
            return Err(CoreError::InvalidArgument("conv stack needs at least one layer".into()));
        }
        for (i, (w, b)) in layers.iter().enumerate() {
            if b.len() != w.c_out() {
                return Err(CoreError::ShapeMismatch(format!(
                    "stack layer {} bias length {} does not match {} output channels",
                    i,
                    b.len(),
                    w.c_out()
                )));
            }
        }
        for pair in layers.windows(2) {
            if pair[1].0.c_in() != pair[0].0.c_out() {
                return Err(CoreError::ShapeMismatch(format!(
                    "stack layer expects {} input channels, previous outputs {}",
                    pair[1].0.c_in(),
                    pair[0].0.c_out()
                )));
            }
        }
        Ok(Self { layers, activation })
    }

    /// Number of layers.
    #[must_use]
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Input channels of the first layer.
    #[must_use]
    pub fn c_in(&self) -> usize {
        self.layers[0].0.c_in()
    }

    /// Output channels of the last layer.
    #[must_use]
    pub fn c_out(&self) -> usize {
        self.layers.last().unwrap().0.c_out()
    }

    /// The activation applied on every layer.
    #[must_use]
    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Layers in order.
    #[must_use]
    pub fn layers(&self) -> &[(ConvFilter, Vec<f64>)] {
        &self.layers
    }

    /// Sup norm over all filter taps and biases.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.layers
            .iter()
            .fold(0.0, |m, (w, b)| m.max(w.sup_norm()).max(b.iter().fold(0.0, |x, v| x.max(v.abs()))))
    }

    /// Runs the stack on a signal.
    pub fn apply(&self, x: &Signal) -> CoreResult<Signal> {
        let mut state = conv_layer(&self.layers[0].0, &self.layers[0].1, self.activation, x)?;
        for (w, b) in &self.layers[1..] {
            state = conv_layer(w, b, self.activation, &state)?;
        }
        Ok(state)
    }
}

/// Depth of the ridge realization: `ceil((D-1)/(K-1))`.
#[must_use]
pub fn ridge_depth(d: usize, k: usize) -> usize {
    (d + k - 3) / (k - 1)
}

/// Realizes `x -> a.x - t` as a linear convolution stack whose output at
/// spatial index 0, channel 0 equals the ridge value exactly.
///
/// The stack has depth `L0 = ceil((D-1)/(K-1))` and channel plan
/// `1 -> 2 -> ... -> 2 -> 1`: channel 0 accumulates the inner product `K-1`
/// coordinates per layer while channel 1 left-translates the signal by `K-1`
/// positions per layer. For `K = D` the plan degenerates to one `1 -> 1`
/// layer reading all coordinates at once.
pub fn ridge_conv(a: &[f64], t: f64, k: usize) -> CoreResult<ConvStack> {
    let d = a.len();
    if d < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "ridge realization needs input dimension >= 2, got {d}"
        )));
    }
    if k < 2 || k > d {
        return Err(CoreError::InvalidArgument(format!(
            "filter size must satisfy 2 <= K <= D; got K={k}, D={d}"
        )));
    }
    if a.iter().any(|v| !v.is_finite()) || !t.is_finite() {
        return Err(CoreError::NumericGuard("ridge coefficients must be finite".into()));
    }
    let l0 = ridge_depth(d, k);
    let mut layers = Vec::with_capacity(l0);
    if l0 == 1 {
        // K = D: one layer reads every coordinate.
        let mut w = ConvFilter::zeros(k, 1, 1);
        for (tap, av) in a.iter().enumerate() {
            w.set(tap, 0, 0, *av);
        }
        layers.push((w, vec![t]));
        return ConvStack::new(layers, Activation::Identity);
    }
    // Layer 1: channel 0 <- first K coordinates; channel 1 <- shift by K-1.
    let mut w1 = ConvFilter::zeros(k, 2, 1);
    for (tap, av) in a.iter().take(k).enumerate() {
        w1.set(tap, 0, 0, *av);
    }
    w1.set(k - 1, 1, 0, 1.0);
    layers.push((w1, vec![0.0, 0.0]));
    // Middle layers: carry the partial sum, absorb K-1 more coordinates from
    // the shifted channel, shift again. After layer l, n_l = l(K-1)+1
    // coordinates are absorbed.
    for l in 2..l0 {
        let mut w = ConvFilter::zeros(k, 2, 2);
        w.set(0, 0, 0, 1.0);
        let absorbed = (l - 1) * (k - 1) + 1;
        for tap in 1..k {
            let idx = absorbed + tap - 1;
            if idx < d {
                w.set(tap, 0, 1, a[idx]);
            }
        }
        w.set(k - 1, 1, 1, 1.0);
        layers.push((w, vec![0.0, 0.0]));
    }
    // Final layer: absorb the remainder and subtract t.
    let mut wl = ConvFilter::zeros(k, 1, 2);
    wl.set(0, 0, 0, 1.0);
    let absorbed = (l0 - 1) * (k - 1) + 1;
    for tap in 1..k {
        let idx = absorbed + tap - 1;
        if idx < d {
            wl.set(tap, 0, 1, a[idx]);
        }
    }
    layers.push((wl, vec![t]));
    ConvStack::new(layers, Activation::Identity)
}

/// Converts a linear stack into a rectifier stack that carries the positive
/// and negative parts of every channel: channel `j` becomes the pair
/// `(2j, 2j+1) = (s_+, s_-)` with `s_+ - s_- = s`. The first layer stacks
/// `[w; -w]` on the raw input; deeper layers use the sign-consistent
/// `[[w, -w], [-w, w]]` pattern; biases become `[b; -b]`. Parameter sup-norms
/// are preserved exactly.
pub fn relu_double(stack: &ConvStack) -> CoreResult<ConvStack> {
    if stack.activation() != Activation::Identity {
        return Err(CoreError::InvalidArgument(
            "only a linear stack can be sign-doubled; this one already rectifies".into(),
        ));
    }
    let mut layers = Vec::with_capacity(stack.depth());
    for (l, (w, b)) in stack.layers().iter().enumerate() {
        let (k, co, ci) = (w.k(), w.c_out(), w.c_in());
        let mut nw = if l == 0 {
            ConvFilter::zeros(k, 2 * co, ci)
        } else {
            ConvFilter::zeros(k, 2 * co, 2 * ci)
        };
        for tap in 0..k {
            for j in 0..co {
                for i in 0..ci {
                    let v = w.get(tap, j, i);
                    if l == 0 {
                        nw.set(tap, 2 * j, i, v);
                        nw.set(tap, 2 * j + 1, i, -v);
                    } else {
                        nw.set(tap, 2 * j, 2 * i, v);
                        nw.set(tap, 2 * j, 2 * i + 1, -v);
                        nw.set(tap, 2 * j + 1, 2 * i, -v);
                        nw.set(tap, 2 * j + 1, 2 * i + 1, v);
                    }
                }
            }
        }
        let mut nb = Vec::with_capacity(2 * co);
        for bv in b {
            nb.push(*bv);
            nb.push(-bv);
        }
        layers.push((nw, nb));
    }
    ConvStack::new(layers, Activation::ReLU)
}

/// Channel-stacks two stacks of equal depth, per-layer filter size, and
/// activation: block-diagonal filters, concatenated biases. On a
/// channel-stacked input the output is the channel-stacked pair of outputs;
/// the parameter sup-norm is the max of the two.
pub fn parallel_concat(s1: &ConvStack, s2: &ConvStack) -> CoreResult<ConvStack> {
    if s1.depth() != s2.depth() {
        return Err(CoreError::ShapeMismatch(format!(
            "cannot channel-stack stacks of depths {} and {}",
            s1.depth(),
            s2.depth()
        )));
    }
    if s1.activation() != s2.activation() {
        return Err(CoreError::InvalidArgument(
            "cannot channel-stack stacks with different activations".into(),
        ));
    }
    let mut layers = Vec::with_capacity(s1.depth());
    for (l, ((w1, b1), (w2, b2))) in s1.layers().iter().zip(s2.layers()).enumerate() {
        if w1.k() != w2.k() {
            return Err(CoreError::ShapeMismatch(format!(
                "layer {} filter sizes differ: {} vs {} (align with embed_filter first)",
                l,
                w1.k(),
                w2.k()
            )));
        }
        let (k, co1, ci1) = (w1.k(), w1.c_out(), w1.c_in());
        let (co2, ci2) = (w2.c_out(), w2.c_in());
        let mut nw = ConvFilter::zeros(k, co1 + co2, ci1 + ci2);
        for tap in 0..k {
            for j in 0..co1 {
                for i in 0..ci1 {
                    nw.set(tap, j, i, w1.get(tap, j, i));
                }
            }
            for j in 0..co2 {
                for i in 0..ci2 {
                    nw.set(tap, co1 + j, ci1 + i, w2.get(tap, j, i));
                }
            }
        }
        let mut nb = b1.clone();
        nb.extend_from_slice(b2);
        layers.push((nw, nb));
    }
    ConvStack::new(layers, s1.activation())
}

/// Zero-pads a filter to a larger size and/or more output channels. High tap
/// indices are filled with zeros, so the induced convolution operator is
/// unchanged on the original channels; added output channels produce
/// identically zero signals.
pub fn embed_filter(w: &ConvFilter, k_new: usize, c_out_new: usize) -> CoreResult<ConvFilter> {
    if k_new < w.k() {
        return Err(CoreError::InvalidArgument(format!(
            "cannot shrink filter size {} to {}",
            w.k(),
            k_new
        )));
    }
    if c_out_new < w.c_out() {
        return Err(CoreError::InvalidArgument(format!(
            "cannot shrink output channels {} to {}",
            w.c_out(),
            c_out_new
        )));
    }
    let mut nw = ConvFilter::zeros(k_new, c_out_new, w.c_in());
    for tap in 0..w.k() {
        for j in 0..w.c_out() {
            for i in 0..w.c_in() {
                nw.set(tap, j, i, w.get(tap, j, i));
            }
        }
    }
    Ok(nw)
}

/// A claimed/realized pair for an integer certificate field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountPair {
    /// Upper bound promised by the construction.
    pub claimed: usize,
    /// Value measured on the produced network.
    pub realized: usize,
}

impl CountPair {
    fn sound(&self) -> bool {
        self.realized <= self.claimed
    }
}

/// A claimed/realized pair for a norm certificate field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    /// Upper bound promised by the construction.
    pub claimed: f64,
    /// Value measured on the produced network.
    pub realized: f64,
}

impl BoundPair {
    fn sound(&self) -> bool {
        self.realized <= self.claimed
    }
}

/// Size and norm guarantees of a compilation, with the measured values
/// alongside the promised bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompilationCertificate {
    /// Depth of the ridge realization `L0 = ceil((D-1)/(K-1))`.
    pub ridge_depth: usize,
    /// Largest filter size: claimed `K`.
    pub filter_size: CountPair,
    /// Largest channel count over trunk and all layers:
    /// claimed `max(3, 4 * max source width)` (tripled in constant-depth
    /// mode).
    pub channels: CountPair,
    /// Residual block count: claimed `M` (or the divided count).
    pub block_count: CountPair,
    /// Per-block depth: claimed `L_m + L0` (or the division limit `L`).
    pub block_depths: Vec<CountPair>,
    /// Block parameter sup-norm: claimed `B_bs`.
    pub conv_norm: BoundPair,
    /// Read-out parameter sup-norm: claimed `B_fin (1 v 1/B_bs)`.
    pub fc_norm: BoundPair,
}

impl CompilationCertificate {
    /// True when every realized value is within its claimed bound.
    #[must_use]
    pub fn is_sound(&self) -> bool {
        self.soundness_violations().is_empty()
    }

    /// Human-readable description of every claimed bound the realized
    /// network exceeds.
    #[must_use]
    pub fn soundness_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !self.filter_size.sound() {
            v.push(format!(
                "filter size {} exceeds claimed {}",
                self.filter_size.realized, self.filter_size.claimed
            ));
        }
        if !self.channels.sound() {
            v.push(format!(
                "channel count {} exceeds claimed {}",
                self.channels.realized, self.channels.claimed
            ));
        }
        if !self.block_count.sound() {
            v.push(format!(
                "block count {} exceeds claimed {}",
                self.block_count.realized, self.block_count.claimed
            ));
        }
        for (m, d) in self.block_depths.iter().enumerate() {
            if !d.sound() {
                v.push(format!("block {} depth {} exceeds claimed {}", m, d.realized, d.claimed));
            }
        }
        if !self.conv_norm.sound() {
            v.push(format!(
                "block parameter norm {} exceeds claimed {}",
                self.conv_norm.realized, self.conv_norm.claimed
            ));
        }
        if !self.fc_norm.sound() {
            v.push(format!(
                "read-out norm {} exceeds claimed {}",
                self.fc_norm.realized, self.fc_norm.claimed
            ));
        }
        v
    }
}

/// Compilation switches.
#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    /// When true (default), every layer of every block is padded to the one
    /// trunk channel count with zero rows. When false, interior layers keep
    /// tight per-block widths and the trunk carries only the three semantic
    /// channels.
    pub uniform_channels: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { uniform_channels: true }
    }
}

/// Read-out scale `r = B_fin (1 v 1/B_bs)` with an over/underflow guard; the
/// accumulators carry `q = 1/r` times the running sum.
fn readout_scale(f: &BlockSparseFnn) -> CoreResult<f64> {
    let r = f.b_fin() * 1.0f64.max(1.0 / f.b_bs());
    if !r.is_finite() || !(1e-300..=1e300).contains(&r) {
        return Err(CoreError::NumericGuard(format!(
            "read-out scale B_fin (1 v 1/B_bs) = {r:e} leaves the safe double range; \
             the construction would lose exactness"
        )));
    }
    Ok(r)
}

/// Compiles a block-sparse rectifier network into a function-identical
/// residual convolutional network with filter size `K`, returning the
/// network and its size/norm certificate. Requires `2 <= K <= D`, `D >= 2`,
/// and a source network that satisfies its declared bounds.
pub fn compile_fnn_to_cnn(
    f: &BlockSparseFnn,
    k: usize,
) -> CoreResult<(ResNetCnn, CompilationCertificate)> {
    compile_with_options(f, k, &CompileOptions::default())
}

/// [`compile_fnn_to_cnn`] with explicit switches.
pub fn compile_with_options(
    f: &BlockSparseFnn,
    k: usize,
    opts: &CompileOptions,
) -> CoreResult<(ResNetCnn, CompilationCertificate)> {
    let d = f.input_dim();
    if d < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "compilation needs input dimension >= 2, got {d}"
        )));
    }
    if k < 2 || k > d {
        return Err(CoreError::InvalidArgument(format!(
            "filter size must satisfy 2 <= K <= D; got K={k}, D={d}"
        )));
    }
    let report = validate_fnn(f);
    if !report.pass() {
        return Err(CoreError::BoundViolation(format!(
            "source network violates its declared bounds \
             (block norm {} vs {}, read-out norm {} vs {})",
            report.max_block_param_norm,
            report.declared_block_bound,
            report.max_final_param_norm,
            report.declared_final_bound
        )));
    }
    let l0 = ridge_depth(d, k);
    // Channel demand is driven by neuron counts, not the input dimension:
    // the ridge stage needs 4 channels per first-layer neuron, later stages
    // at most that many, and the raw input is read from trunk channel 0.
    let w_max = f
        .blocks()
        .iter()
        .flat_map(|b| b.layers().iter().map(crate::fnn::FnnLayer::c_out))
        .max()
        .unwrap_or(0);
    let claimed_channels = 3usize.max(4 * w_max);
    let trunk = if opts.uniform_channels { claimed_channels } else { 3 };
    let r = readout_scale(f)?;
    let q = 1.0 / r;

    let mut blocks = Vec::with_capacity(f.num_blocks());
    for (block, w_fin) in f.blocks().iter().zip(f.final_weights()) {
        blocks.push(build_block(block, w_fin, k, l0, trunk, q, opts.uniform_channels)?);
    }

    // Read-out: r * (accumulator + at channel 1) - r * (accumulator - at
    // channel 2), both at spatial index 0, minus the source final bias.
    let mut readout = DenseAffine::zeros(1, d * trunk);
    readout.set(0, 1, r);
    readout.set(0, 2, -r);
    readout.bias_mut()[0] = f.final_bias();

    let realized_conv = blocks.iter().fold(0.0f64, |m, b| m.max(b.sup_norm()));
    let realized_fc = readout.sup_norm();
    let declared_conv = f.b_bs().max(realized_conv);
    let declared_fc = r.max(realized_fc);
    let net = ResNetCnn::new(d, trunk, blocks, None, readout, declared_conv, declared_fc)?;

    let realized_channels = net
        .blocks()
        .iter()
        .flat_map(|b| b.layers().iter().map(|l| l.filter().c_out()))
        .max()
        .unwrap_or(0)
        .max(trunk);
    let cert = CompilationCertificate {
        ridge_depth: l0,
        filter_size: CountPair { claimed: k, realized: net.max_filter_size() },
        channels: CountPair { claimed: claimed_channels, realized: realized_channels },
        block_count: CountPair { claimed: f.num_blocks(), realized: net.num_blocks() },
        block_depths: f
            .blocks()
            .iter()
            .zip(net.blocks())
            .map(|(src, dst)| CountPair { claimed: src.depth() + l0, realized: dst.depth() })
            .collect(),
        conv_norm: BoundPair { claimed: f.b_bs(), realized: realized_conv },
        fc_norm: BoundPair {
            claimed: r,
            realized: realized_fc,
        },
    };
    Ok((net, cert))
}

/// Builds the residual block realizing one source block: ridge stage
/// (depth `l0`), fully-connected stage (size-1 filters), and the
/// accumulator deposit layer (size-1, linear).
fn build_block(
    block: &crate::fnn::FnnBlock,
    w_fin: &[f64],
    k: usize,
    l0: usize,
    trunk: usize,
    q: f64,
    uniform: bool,
) -> CoreResult<ResidualBlock> {
    let src_layers = block.layers();
    let depth_src = src_layers.len();
    let d1 = src_layers[0].c_out();
    let pair_w = 2 * d1;
    let quad_w = 4 * d1;

    // Doubled ridge stacks, one per first-layer row.
    let mut doubled = Vec::with_capacity(d1);
    for j in 0..d1 {
        let a: Vec<f64> = (0..src_layers[0].c_in()).map(|i| src_layers[0].get(j, i)).collect();
        let t = src_layers[0].bias()[j];
        doubled.push(relu_double(&ridge_conv(&a, t, k)?)?);
    }

    let width = |logical: usize| if uniform { trunk } else { logical };
    let mut layers: Vec<(ConvFilter, Vec<f64>)> = Vec::with_capacity(l0 + depth_src);

    // Ridge stage: channel group of 4 per row while the pair is in flight,
    // compacted to pairs (2j, 2j+1) by the last ridge layer. All rows read
    // the raw input from trunk channel 0 on the first layer.
    for l in 0..l0 {
        let (group_in, group_out) = if l0 == 1 {
            (1, 2)
        } else if l == 0 {
            (1, 4)
        } else if l + 1 == l0 {
            (4, 2)
        } else {
            (4, 4)
        };
        let c_in = if l == 0 { trunk } else { width(quad_w) };
        let c_out = if l + 1 == l0 { width(pair_w) } else { width(quad_w) };
        let mut w = ConvFilter::zeros(k, c_out, c_in);
        let mut b = vec![0.0; c_out];
        for (j, stack) in doubled.iter().enumerate() {
            let (sw, sb) = &stack.layers()[l];
            for tap in 0..k {
                for row in 0..group_out {
                    for col in 0..group_in {
                        let v = sw.get(tap, row, col);
                        if v != 0.0 {
                            let out_ch = if l + 1 == l0 { 2 * j + row } else { 4 * j + row };
                            let in_ch = if l == 0 { 0 } else { 4 * j + col };
                            w.set(tap, out_ch, in_ch, v);
                        }
                    }
                }
            }
            for row in 0..group_out {
                let out_ch = if l + 1 == l0 { 2 * j + row } else { 4 * j + row };
                b[out_ch] = sb[row];
            }
        }
        layers.push((w, b));
    }

    // Fully-connected stage: source layer li (0-based, li >= 1) as a size-1
    // filter. The first reads the + half of each pair; deeper ones read the
    // plain nonnegative activations.
    for li in 1..depth_src {
        let src = &src_layers[li];
        let c_in_logical = if li == 1 { pair_w } else { src.c_in() };
        let c_in = width(c_in_logical);
        let c_out = width(src.c_out());
        let mut w = ConvFilter::zeros(1, c_out, c_in);
        let mut b = vec![0.0; c_out];
        for row in 0..src.c_out() {
            for col in 0..src.c_in() {
                let in_ch = if li == 1 { 2 * col } else { col };
                w.set(0, row, in_ch, src.get(row, col));
            }
            b[row] = src.bias()[row];
        }
        layers.push((w, b));
    }

    // Deposit layer: +(q/2) w_fin into channel 1, -(q/2) w_fin into channel
    // 2; linear, size-1; all other rows zero so the trunk invariant holds.
    let out_dim = block.output_dim();
    let c_in_logical = if depth_src == 1 { pair_w } else { out_dim };
    let mut w = ConvFilter::zeros(1, trunk, width(c_in_logical));
    for (j, wv) in w_fin.iter().enumerate() {
        let in_ch = if depth_src == 1 { 2 * j } else { j };
        w.set(0, 1, in_ch, q / 2.0 * wv);
        w.set(0, 2, in_ch, -(q / 2.0) * wv);
    }
    layers.push((w, vec![0.0; trunk]));

    ResidualBlock::new(layers)
}

/// Which function the divided composite realizes on the first channel group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisionSemantics {
    /// Composite maps `[x | 0 | 0]` to `[f(x) | 0 | 0]` where `f` is the
    /// block's convolution stack alone.
    Standalone,
    /// Composite maps `[t | 0 | 0]` to `[t + f(t) | 0 | 0]`: the residual
    /// update itself, for use inside a network.
    KeepInput,
}

/// Splits a residual block of depth `L'` into `S = 2 ceil(L'/L) - 1` masked
/// blocks of depth at most `L` over three channel groups: group 0 holds the
/// block's external signal, groups 1 and 2 alternate as carriers of the
/// inter-fragment state, and interleaved zero-blocks with partial masks
/// clear consumed carriers. Parameter norms and filter sizes are unchanged.
/// A block already within the limit is returned as is with an all-ones mask.
pub fn divide_block_masked(
    block: &ResidualBlock,
    l: usize,
    semantics: DivisionSemantics,
) -> CoreResult<(Vec<ResidualBlock>, Vec<MaskVector>)> {
    let g = block
        .layers()
        .iter()
        .map(|layer| layer.filter().c_in().max(layer.filter().c_out()))
        .max()
        .unwrap_or(0);
    divide_block_grouped(block, l, semantics, g)
}

/// [`divide_block_masked`] with an explicit channel-group width
/// (`group_width >= ` every layer width), for embedding into a trunk wider
/// than the block itself.
pub fn divide_block_grouped(
    block: &ResidualBlock,
    l: usize,
    semantics: DivisionSemantics,
    group_width: usize,
) -> CoreResult<(Vec<ResidualBlock>, Vec<MaskVector>)> {
    if l == 0 {
        return Err(CoreError::InvalidArgument("depth limit must be at least 1".into()));
    }
    let natural = block
        .layers()
        .iter()
        .map(|layer| layer.filter().c_in().max(layer.filter().c_out()))
        .max()
        .unwrap_or(0);
    if group_width < natural {
        return Err(CoreError::InvalidArgument(format!(
            "group width {group_width} cannot hold layers {natural} channels wide"
        )));
    }
    let depth = block.depth();
    let s0 = depth.div_ceil(l);
    if s0 == 1 {
        return Ok((vec![block.clone()], vec![MaskVector::ones(block.in_channels())]));
    }
    let g = group_width;
    let c = 3 * g;
    // Chunk sizes: as even as possible, all <= l.
    let base = depth / s0;
    let rem = depth % s0;
    let mut sizes = vec![base; s0];
    for size in sizes.iter_mut().take(rem) {
        *size += 1;
    }
    // group offsets: s is 1-based
    let in_off = |s: usize| if s == 1 { 0 } else if s % 2 == 1 { 2 * g } else { g };
    let out_off = |s: usize| if s == s0 { 0 } else if s % 2 == 1 { g } else { 2 * g };

    let mut blocks = Vec::with_capacity(2 * s0 - 1);
    let mut masks = Vec::with_capacity(2 * s0 - 1);
    let mut start = 0usize;
    for (chunk_idx, size) in sizes.iter().enumerate() {
        let s = chunk_idx + 1;
        let chunk = &block.layers()[start..start + size];
        blocks.push(embed_chunk(chunk, in_off(s), out_off(s), c)?);
        if s < s0 {
            masks.push(MaskVector::ones(c));
            // Zero-block clearing the consumed carrier: keep group 0 and the
            // chunk's output group.
            let keep_second = s % 2 == 1; // output went to group 1
            let mut bits = vec![0u8; c];
            for b in bits.iter_mut().take(g) {
                *b = 1;
            }
            let kept = if keep_second { g..2 * g } else { 2 * g..3 * g };
            for b in &mut bits[kept] {
                *b = 1;
            }
            blocks.push(zero_block(c));
            masks.push(MaskVector::new(bits)?);
        } else {
            masks.push(match semantics {
                DivisionSemantics::Standalone => MaskVector::zeros(c),
                DivisionSemantics::KeepInput => {
                    let mut bits = vec![0u8; c];
                    for b in bits.iter_mut().take(g) {
                        *b = 1;
                    }
                    MaskVector::new(bits)?
                }
            });
        }
        start += size;
    }
    Ok((blocks, masks))
}

/// One run of consecutive layers re-homed onto the wide trunk: first layer
/// reads its input at `in_off`, last layer writes at `out_off`, interior
/// layers are untouched. Activations are preserved, so interior fragments
/// legitimately end in a rectifier.
fn embed_chunk(
    chunk: &[ConvLayer],
    in_off: usize,
    out_off: usize,
    c: usize,
) -> CoreResult<ResidualBlock> {
    let n = chunk.len();
    let mut layers = Vec::with_capacity(n);
    for (idx, layer) in chunk.iter().enumerate() {
        let w = layer.filter();
        let (k, co, ci) = (w.k(), w.c_out(), w.c_in());
        let first = idx == 0;
        let last = idx + 1 == n;
        let c_in = if first { c } else { ci };
        let c_out = if last { c } else { co };
        let mut nw = ConvFilter::zeros(k, c_out, c_in);
        for tap in 0..k {
            for j in 0..co {
                for i in 0..ci {
                    let row = if last { out_off + j } else { j };
                    let col = if first { in_off + i } else { i };
                    nw.set(tap, row, col, w.get(tap, j, i));
                }
            }
        }
        let mut nb = vec![0.0; c_out];
        for (j, bv) in layer.bias().iter().enumerate() {
            let row = if last { out_off + j } else { j };
            nb[row] = *bv;
        }
        layers.push(ConvLayer::new(nw, nb, layer.activation())?);
    }
    ResidualBlock::with_activations(layers)
}

/// Depth-1 all-zero block (its stack contributes nothing; only its mask
/// acts).
fn zero_block(c: usize) -> ResidualBlock {
    ResidualBlock::new(vec![(ConvFilter::zeros(1, c, c), vec![0.0; c])])
        .expect("zero block shapes are consistent")
}

/// Compiles and then divides every residual block deeper than `L` into
/// masked constant-depth blocks; the resulting network evaluates bit-for-bit
/// like the plain compilation. When no block exceeds `L`, the plain
/// compilation is returned with all-ones masks attached.
pub fn compile_constant_depth(
    f: &BlockSparseFnn,
    l: usize,
    k: usize,
) -> CoreResult<(ResNetCnn, CompilationCertificate)> {
    if l == 0 {
        return Err(CoreError::InvalidArgument("depth limit must be at least 1".into()));
    }
    let (net, cert) = compile_fnn_to_cnn(f, k)?;
    let c0 = net.trunk_channels();
    if net.max_block_depth() <= l {
        let masks = vec![MaskVector::ones(c0); net.num_blocks()];
        let masked = ResNetCnn::new(
            net.input_dim(),
            c0,
            net.blocks().to_vec(),
            Some(masks),
            net.readout().clone(),
            net.b_conv(),
            net.b_fc(),
        )?;
        return Ok((masked, cert));
    }
    let c = 3 * c0;
    let mut blocks = Vec::new();
    let mut masks = Vec::new();
    for block in net.blocks() {
        if block.depth() <= l {
            // Whole block on group 0, scratch untouched.
            blocks.push(embed_chunk(block.layers(), 0, 0, c)?);
            masks.push(MaskVector::ones(c));
        } else {
            let (bs, ms) = divide_block_grouped(block, l, DivisionSemantics::KeepInput, c0)?;
            blocks.extend(bs);
            masks.extend(ms);
        }
    }
    // Re-home the read-out: original channel i at spatial alpha moves to
    // group-0 channel i of the tripled trunk.
    let d = net.input_dim();
    let mut readout = DenseAffine::zeros(1, d * c);
    for alpha in 0..d {
        for i in 0..c0 {
            let v = net.readout().get(0, alpha * c0 + i);
            if v != 0.0 {
                readout.set(0, alpha * c + i, v);
            }
        }
    }
    readout.bias_mut()[0] = net.readout().bias()[0];

    let divided = ResNetCnn::new(d, c, blocks, Some(masks), readout, net.b_conv(), net.b_fc())?;
    let realized_channels = divided
        .blocks()
        .iter()
        .flat_map(|b| b.layers().iter().map(|layer| layer.filter().c_out()))
        .max()
        .unwrap_or(0)
        .max(c);
    let claimed_count: usize =
        net.blocks().iter().map(|b| 2 * b.depth().div_ceil(l) - 1).sum();
    let cert = CompilationCertificate {
        ridge_depth: cert.ridge_depth,
        filter_size: CountPair {
            claimed: cert.filter_size.claimed,
            realized: divided.max_filter_size(),
        },
        channels: CountPair { claimed: 3 * cert.channels.claimed, realized: realized_channels },
        block_count: CountPair { claimed: claimed_count, realized: divided.num_blocks() },
        block_depths: divided
            .blocks()
            .iter()
            .map(|b| CountPair { claimed: l, realized: b.depth() })
            .collect(),
        conv_norm: BoundPair {
            claimed: cert.conv_norm.claimed,
            realized: divided.max_conv_param_norm(),
        },
        fc_norm: BoundPair { claimed: cert.fc_norm.claimed, realized: divided.max_fc_param_norm() },
    };
    Ok((divided, cert))
}
