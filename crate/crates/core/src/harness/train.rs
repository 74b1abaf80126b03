//! Projected minibatch gradient descent on the clipped squared loss of a
//! residual CNN, with reverse-mode gradients computed layer by layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::cnn::{clip_output, ResNetCnn};
use crate::error::{CoreError, CoreResult};
use crate::harness::data::RegressionDataset;
use crate::tensor::{Activation, Signal};

/// When parameters are clamped back into the class box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionMode {
    /// Clamp after every gradient step (default).
    PerStep,
    /// Clamp once after the final step.
    AtEnd,
}

/// Hyper-parameters for [`erm_train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Number of minibatch gradient steps.
    pub steps: usize,
    /// Constant step size.
    pub learning_rate: f64,
    /// Points per minibatch; `>= N` selects deterministic full batches.
    pub batch_size: usize,
    /// Box bound for convolution parameters.
    pub b_conv: f64,
    /// Box bound for read-out parameters.
    pub b_fc: f64,
    /// Output clip level `F`; predictions are trained through
    /// `(y v -F) ^ F`.
    pub clip_level: f64,
    /// Seed for minibatch sampling.
    pub seed: u64,
    /// Projection schedule.
    pub projection: ProjectionMode,
}

impl TrainConfig {
    /// Builds a per-step-projected configuration, validating positivity.
    pub fn new(
        steps: usize,
        learning_rate: f64,
        batch_size: usize,
        b_conv: f64,
        b_fc: f64,
        clip_level: f64,
        seed: u64,
    ) -> CoreResult<Self> {
        let cfg = Self {
            steps,
            learning_rate,
            batch_size,
            b_conv,
            b_fc,
            clip_level,
            seed,
            projection: ProjectionMode::PerStep,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field that must be positive (or nonnegative) and finite.
    pub fn validate(&self) -> CoreResult<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(CoreError::InvalidArgument("batch size must be at least 1".into()));
        }
        if !(self.b_conv > 0.0 && self.b_conv.is_finite())
            || !(self.b_fc > 0.0 && self.b_fc.is_finite())
        {
            return Err(CoreError::InvalidArgument(
                "projection bounds must be positive and finite".into(),
            ));
        }
        if !(self.clip_level >= 0.0) || !self.clip_level.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "clip level must be nonnegative, got {}",
                self.clip_level
            )));
        }
        Ok(())
    }
}

/// Result of a training run: the trained network plus the mean minibatch
/// loss per epoch (one epoch = one full pass worth of minibatch steps).
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// The trained network, declared with the configured bounds.
    pub net: ResNetCnn,
    /// Mean minibatch loss per epoch, in order; a trailing partial epoch is
    /// included.
    pub epoch_losses: Vec<f64>,
}

/// Per-layer gradient buffers mirroring a network's parameter slots.
struct LayerGrad {
    taps: Vec<f64>,
    bias: Vec<f64>,
}

struct CnnGrads {
    blocks: Vec<Vec<LayerGrad>>,
    readout_w: Vec<f64>,
    readout_b: Vec<f64>,
}

impl CnnGrads {
    fn zeros(net: &ResNetCnn) -> Self {
        let blocks = net
            .blocks()
            .iter()
            .map(|b| {
                b.layers()
                    .iter()
                    .map(|l| LayerGrad {
                        taps: vec![0.0; l.filter().taps().len()],
                        bias: vec![0.0; l.bias().len()],
                    })
                    .collect()
            })
            .collect();
        Self {
            blocks,
            readout_w: vec![0.0; net.readout().weight().len()],
            readout_b: vec![0.0; net.readout().bias().len()],
        }
    }

    fn reset(&mut self) {
        for block in &mut self.blocks {
            for layer in block {
                layer.taps.iter_mut().for_each(|v| *v = 0.0);
                layer.bias.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        self.readout_w.iter_mut().for_each(|v| *v = 0.0);
        self.readout_b.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Forward intermediates for one input: trunk states, and per block the
/// pre-activations and post-activation outputs of every layer.
struct ForwardCache {
    /// `states[0]` is the padded input, `states[m]` the state after block `m`.
    states: Vec<Signal>,
    /// `pre[m][l]`: pre-activation of layer `l` in block `m`.
    pre: Vec<Vec<Signal>>,
    /// `out[m][l]`: post-activation output of layer `l` in block `m`.
    out: Vec<Vec<Signal>>,
}

/// Mirrors the evaluation path exactly while keeping every intermediate
/// needed by the backward pass. Returns the raw (unclipped) read-out value.
fn forward_cache(net: &ResNetCnn, x: &[f64]) -> CoreResult<(f64, ForwardCache)> {
    if x.len() != net.input_dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "input has length {}, network expects {}",
            x.len(),
            net.input_dim()
        )));
    }
    let d = net.input_dim();
    let mut state = net.pad_input(x);
    let mut states = vec![state.clone()];
    let mut pre_all = Vec::with_capacity(net.num_blocks());
    let mut out_all = Vec::with_capacity(net.num_blocks());
    for (m, block) in net.blocks().iter().enumerate() {
        let mut pre_block = Vec::with_capacity(block.depth());
        let mut out_block = Vec::with_capacity(block.depth());
        for (l, layer) in block.layers().iter().enumerate() {
            let input: &Signal = if l == 0 { &state } else { &out_block[l - 1] };
            let filt = layer.filter();
            let (k, c_out, c_in) = (filt.k(), filt.c_out(), filt.c_in());
            let taps = filt.taps();
            let bias = layer.bias();
            let xv = input.vec_flatten();
            let mut pre = vec![0.0; d * c_out];
            for beta in 0..d {
                for j in 0..c_out {
                    let mut acc = 0.0;
                    for t in 0..k {
                        let pos = beta + t;
                        if pos >= d {
                            break;
                        }
                        let wbase = (t * c_out + j) * c_in;
                        let xbase = pos * c_in;
                        for i in 0..c_in {
                            acc += taps[wbase + i] * xv[xbase + i];
                        }
                    }
                    pre[beta * c_out + j] = acc - bias[j];
                }
            }
            let act = layer.activation();
            let out: Vec<f64> = pre.iter().map(|v| act.apply(*v)).collect();
            pre_block.push(Signal::new(pre, d, c_out)?);
            out_block.push(Signal::new(out, d, c_out)?);
        }
        let branch = &out_block[block.depth() - 1];
        let mut next = match net.masks() {
            Some(ms) => ms[m].apply(&state),
            None => state,
        };
        for alpha in 0..d {
            for i in 0..next.channels() {
                let v = next.get(alpha, i) + branch.get(alpha, i);
                next.set(alpha, i, v);
            }
        }
        state = next;
        states.push(state.clone());
        pre_all.push(pre_block);
        out_all.push(out_block);
    }
    let ro = net.readout();
    let v = state.vec_flatten();
    let mut y = -ro.bias()[0];
    for (c, xc) in v.iter().enumerate() {
        y += ro.get(0, c) * xc;
    }
    Ok((y, ForwardCache { states, pre: pre_all, out: out_all }))
}

/// Accumulates `dy * d(raw output)/d(parameter)` into `grads` for one input,
/// walking the blocks in reverse. `dy` is the upstream loss derivative with
/// respect to the raw read-out value.
fn backward(net: &ResNetCnn, cache: &ForwardCache, dy: f64, grads: &mut CnnGrads) {
    let d = net.input_dim();
    let c0 = net.trunk_channels();
    let ro = net.readout();
    let final_state = cache.states.last().expect("cache has the padded input").vec_flatten();
    for (c, xc) in final_state.iter().enumerate() {
        grads.readout_w[c] += dy * xc;
    }
    grads.readout_b[0] -= dy;
    let mut dstate: Vec<f64> = (0..ro.n_in()).map(|c| dy * ro.get(0, c)).collect();
    for m in (0..net.num_blocks()).rev() {
        let block = &net.blocks()[m];
        let depth = block.depth();
        // Branch path: start from the gradient at the block output.
        let mut dout = dstate.clone();
        for l in (0..depth).rev() {
            let layer = &block.layers()[l];
            let filt = layer.filter();
            let (k, c_out, c_in) = (filt.k(), filt.c_out(), filt.c_in());
            let taps = filt.taps();
            let pre = cache.pre[m][l].vec_flatten();
            let input: &Signal =
                if l == 0 { &cache.states[m] } else { &cache.out[m][l - 1] };
            let xv = input.vec_flatten();
            let mut dp = dout;
            if layer.activation() == Activation::ReLU {
                for (g, p) in dp.iter_mut().zip(pre.iter()) {
                    if *p <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            let lg = &mut grads.blocks[m][l];
            let mut dx = vec![0.0; d * c_in];
            for beta in 0..d {
                for j in 0..c_out {
                    let dpj = dp[beta * c_out + j];
                    if dpj == 0.0 {
                        continue;
                    }
                    lg.bias[j] -= dpj;
                    for t in 0..k {
                        let pos = beta + t;
                        if pos >= d {
                            break;
                        }
                        let wbase = (t * c_out + j) * c_in;
                        let xbase = pos * c_in;
                        for i in 0..c_in {
                            lg.taps[wbase + i] += dpj * xv[xbase + i];
                            dx[xbase + i] += dpj * taps[wbase + i];
                        }
                    }
                }
            }
            dout = dx;
        }
        // Identity path, masked channel-wise when masks are present.
        match net.masks() {
            Some(ms) => {
                let bits = ms[m].bits();
                for alpha in 0..d {
                    for i in 0..c0 {
                        if bits[i] != 0 {
                            dout[alpha * c0 + i] += dstate[alpha * c0 + i];
                        }
                    }
                }
            }
            None => {
                for (g, up) in dout.iter_mut().zip(dstate.iter()) {
                    *g += up;
                }
            }
        }
        dstate = dout;
    }
}

fn apply_update(net: &mut ResNetCnn, grads: &CnnGrads, scale: f64) {
    for (block, gblock) in net.blocks_mut().iter_mut().zip(&grads.blocks) {
        for (layer, glayer) in block.layers_mut().iter_mut().zip(gblock) {
            for (w, g) in layer.filter_mut().taps_mut().iter_mut().zip(&glayer.taps) {
                *w -= scale * g;
            }
            for (b, g) in layer.bias_mut().iter_mut().zip(&glayer.bias) {
                *b -= scale * g;
            }
        }
    }
    for (w, g) in net.readout_mut().weight_mut().iter_mut().zip(&grads.readout_w) {
        *w -= scale * g;
    }
    for (b, g) in net.readout_mut().bias_mut().iter_mut().zip(&grads.readout_b) {
        *b -= scale * g;
    }
}

fn project(net: &mut ResNetCnn, b_conv: f64, b_fc: f64) {
    for block in net.blocks_mut() {
        for layer in block.layers_mut() {
            for w in layer.filter_mut().taps_mut() {
                *w = w.clamp(-b_conv, b_conv);
            }
            for b in layer.bias_mut() {
                *b = b.clamp(-b_conv, b_conv);
            }
        }
    }
    for w in net.readout_mut().weight_mut() {
        *w = w.clamp(-b_fc, b_fc);
    }
    for b in net.readout_mut().bias_mut() {
        *b = b.clamp(-b_fc, b_fc);
    }
}

/// Minibatch gradient descent on `(clip(net(x)) - y)^2` with parameters
/// projected into the configured box. The input network must already satisfy
/// the configured bounds; the returned network is declared with them.
///
/// Batches of size `>= N` use all points in order (deterministic full-batch
/// descent); smaller batches sample indices with replacement from the
/// config seed. Aborts with a diagnostic if the loss leaves the finite
/// range.
pub fn erm_train(
    net: &ResNetCnn,
    data: &RegressionDataset,
    cfg: &TrainConfig,
) -> CoreResult<TrainOutcome> {
    cfg.validate()?;
    if data.dim() != net.input_dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "data dimension {} does not match network input dimension {}",
            data.dim(),
            net.input_dim()
        )));
    }
    if net.max_conv_param_norm() > cfg.b_conv || net.max_fc_param_norm() > cfg.b_fc {
        return Err(CoreError::BoundViolation(format!(
            "initial network is out of class: conv norm {} (bound {}), read-out norm {} (bound {})",
            net.max_conv_param_norm(),
            cfg.b_conv,
            net.max_fc_param_norm(),
            cfg.b_fc
        )));
    }
    let n = data.len();
    let mut work = net.clone();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let epoch_len = n.div_ceil(cfg.batch_size).max(1);
    let mut epoch_losses = Vec::new();
    let mut acc_loss = 0.0;
    let mut acc_steps = 0usize;
    let mut grads = CnnGrads::zeros(&work);
    let full_batch: Vec<usize> = (0..n).collect();
    let mut batch_buf: Vec<usize> = Vec::with_capacity(cfg.batch_size.min(n));
    for step in 0..cfg.steps {
        let batch: &[usize] = if cfg.batch_size >= n {
            &full_batch
        } else {
            batch_buf.clear();
            batch_buf.extend((0..cfg.batch_size).map(|_| rng.gen_range(0..n)));
            &batch_buf
        };
        grads.reset();
        let mut batch_loss = 0.0;
        for &idx in batch {
            let x = &data.inputs()[idx];
            let target = data.targets()[idx];
            let (y, cache) = forward_cache(&work, x)?;
            let clipped = clip_output(y, cfg.clip_level);
            let r = clipped - target;
            batch_loss += r * r;
            let gate = if y.abs() <= cfg.clip_level { 1.0 } else { 0.0 };
            let dy = 2.0 * r * gate;
            if dy != 0.0 {
                backward(&work, &cache, dy, &mut grads);
            }
        }
        let mean_loss = batch_loss / batch.len() as f64;
        if !mean_loss.is_finite() {
            return Err(CoreError::NumericGuard(format!(
                "training loss became non-finite ({mean_loss}) at step {step}; \
                 reduce the learning rate"
            )));
        }
        apply_update(&mut work, &grads, cfg.learning_rate / batch.len() as f64);
        if cfg.projection == ProjectionMode::PerStep {
            project(&mut work, cfg.b_conv, cfg.b_fc);
        }
        acc_loss += mean_loss;
        acc_steps += 1;
        if acc_steps == epoch_len {
            epoch_losses.push(acc_loss / acc_steps as f64);
            acc_loss = 0.0;
            acc_steps = 0;
        }
    }
    if acc_steps > 0 {
        epoch_losses.push(acc_loss / acc_steps as f64);
    }
    if cfg.projection == ProjectionMode::AtEnd {
        project(&mut work, cfg.b_conv, cfg.b_fc);
    }
    let trained = ResNetCnn::new(
        work.input_dim(),
        work.trunk_channels(),
        work.blocks().to_vec(),
        work.masks().map(<[crate::cnn::MaskVector]>::to_vec),
        work.readout().clone(),
        cfg.b_conv,
        cfg.b_fc,
    )?;
    Ok(TrainOutcome { net: trained, epoch_losses })
}

/// Same architecture as `template`, hidden parameters drawn uniformly from
/// `[-s, s]` with `s = r_m * min(bound, sqrt(6 / fan-in))`. The
/// `sqrt(6 / fan-in)` term gives each rectifier layer unit-variance signal
/// propagation; the per-block damping `r_m = S^(-1/(2 L_m))` (S blocks, block
/// depth `L_m`) shrinks every branch's gain to about `1/S`, so the whole
/// residual trunk's signal gain stays order-one no matter how many blocks are
/// stacked — at plain He scale both signals and gradients grow like
/// `2^(S/2)`, and a single gradient step throws the parameters against the
/// projection box. The read-out direction is drawn uniformly and then
/// rescaled so the initial outputs have root-mean-square about 0.1 over
/// random probe inputs, keeping the start inside any order-one clip window
/// where the clipped loss has live gradients. Every draw stays inside the
/// class box.
pub fn random_init_like(
    template: &ResNetCnn,
    b_conv: f64,
    b_fc: f64,
    seed: u64,
) -> CoreResult<ResNetCnn> {
    if !(b_conv > 0.0 && b_conv.is_finite()) || !(b_fc > 0.0 && b_fc.is_finite()) {
        return Err(CoreError::InvalidArgument(
            "initialization bounds must be positive and finite".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut net = template.clone();
    let s_blocks = template.num_blocks().max(2) as f64;
    for block in net.blocks_mut() {
        let damp = s_blocks.powf(-1.0 / (2.0 * block.depth().max(1) as f64));
        for layer in block.layers_mut() {
            let fan_in = (layer.filter().k() * layer.filter().c_in()).max(1);
            let s = damp * b_conv.min((6.0 / fan_in as f64).sqrt());
            for w in layer.filter_mut().taps_mut() {
                *w = rng.gen_range(-s..=s).clamp(-b_conv, b_conv);
            }
            for b in layer.bias_mut() {
                *b = rng.gen_range(-s..=s).clamp(-b_conv, b_conv);
            }
        }
    }
    let fan_in = net.readout().n_in().max(1);
    let cap = b_fc.min((6.0 / fan_in as f64).sqrt());
    let dir: Vec<f64> = (0..net.readout().weight().len())
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    // Probe the trunk's response scale so the read-out can be sized to start
    // the outputs near zero; a fixed fan-in scale would leave deep trunks
    // outside any order-one clip window.
    const INIT_PROBES: usize = 8;
    const INIT_OUTPUT_RMS: f64 = 0.1;
    let mut mean_sq = 0.0_f64;
    for _ in 0..INIT_PROBES {
        let x: Vec<f64> = (0..net.input_dim())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        let (_, cache) = forward_cache(&net, &x)?;
        let state = cache
            .states
            .last()
            .expect("forward keeps the input state")
            .vec_flatten();
        let y: f64 = dir.iter().zip(state).map(|(w, s)| w * s).sum();
        mean_sq += y * y / INIT_PROBES as f64;
    }
    let scale = (INIT_OUTPUT_RMS / mean_sq.sqrt().max(1e-9)).min(cap);
    for (w, u) in net.readout_mut().weight_mut().iter_mut().zip(&dir) {
        *w = (u * scale).clamp(-b_fc, b_fc);
    }
    for b in net.readout_mut().bias_mut() {
        *b = 0.0;
    }
    ResNetCnn::new(
        net.input_dim(),
        net.trunk_channels(),
        net.blocks().to_vec(),
        net.masks().map(<[crate::cnn::MaskVector]>::to_vec),
        net.readout().clone(),
        b_conv,
        b_fc,
    )
}

/// Compares reverse-mode gradients against central finite differences
/// (`h = 1e-5`) at a random probe input and target, re-sampling the probe if
/// any pre-activation magnitude or clip margin falls below `1e-8` (the loss
/// is non-differentiable on those measure-zero sets). Returns the worst
/// relative deviation `|fd - grad| / max(1, |fd|, |grad|)` over every
/// parameter slot.
pub fn gradient_check(net: &ResNetCnn, clip_level: f64, seed: u64) -> CoreResult<f64> {
    const H: f64 = 1e-5;
    const KINK_MARGIN: f64 = 1e-8;
    let d = net.input_dim();
    for attempt in 0..64u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(attempt));
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let target: f64 = rng.gen_range(-1.0..=1.0);
        let (y, cache) = forward_cache(net, &x)?;
        let mut margin = (y.abs() - clip_level).abs();
        for block in &cache.pre {
            for pre in block {
                for v in pre.vec_flatten() {
                    margin = margin.min(v.abs());
                }
            }
        }
        if margin < KINK_MARGIN {
            continue;
        }
        let mut grads = CnnGrads::zeros(net);
        let clipped = clip_output(y, clip_level);
        let gate = if y.abs() <= clip_level { 1.0 } else { 0.0 };
        let dy = 2.0 * (clipped - target) * gate;
        backward(net, &cache, dy, &mut grads);
        let loss = |candidate: &ResNetCnn| -> CoreResult<f64> {
            let (yy, _) = forward_cache(candidate, &x)?;
            let cc = clip_output(yy, clip_level);
            Ok((cc - target) * (cc - target))
        };
        let mut work = net.clone();
        let mut worst: f64 = 0.0;
        let nb = net.num_blocks();
        for m in 0..nb {
            let depth = net.blocks()[m].depth();
            for l in 0..depth {
                let n_taps = net.blocks()[m].layers()[l].filter().taps().len();
                for idx in 0..n_taps {
                    let orig = net.blocks()[m].layers()[l].filter().taps()[idx];
                    work.blocks_mut()[m].layers_mut()[l].filter_mut().taps_mut()[idx] = orig + H;
                    let up = loss(&work)?;
                    work.blocks_mut()[m].layers_mut()[l].filter_mut().taps_mut()[idx] = orig - H;
                    let down = loss(&work)?;
                    work.blocks_mut()[m].layers_mut()[l].filter_mut().taps_mut()[idx] = orig;
                    let fd = (up - down) / (2.0 * H);
                    let an = grads.blocks[m][l].taps[idx];
                    worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1.0));
                }
                let n_bias = net.blocks()[m].layers()[l].bias().len();
                for idx in 0..n_bias {
                    let orig = net.blocks()[m].layers()[l].bias()[idx];
                    work.blocks_mut()[m].layers_mut()[l].bias_mut()[idx] = orig + H;
                    let up = loss(&work)?;
                    work.blocks_mut()[m].layers_mut()[l].bias_mut()[idx] = orig - H;
                    let down = loss(&work)?;
                    work.blocks_mut()[m].layers_mut()[l].bias_mut()[idx] = orig;
                    let fd = (up - down) / (2.0 * H);
                    let an = grads.blocks[m][l].bias[idx];
                    worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1.0));
                }
            }
        }
        for idx in 0..net.readout().weight().len() {
            let orig = net.readout().weight()[idx];
            work.readout_mut().weight_mut()[idx] = orig + H;
            let up = loss(&work)?;
            work.readout_mut().weight_mut()[idx] = orig - H;
            let down = loss(&work)?;
            work.readout_mut().weight_mut()[idx] = orig;
            let fd = (up - down) / (2.0 * H);
            let an = grads.readout_w[idx];
            worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1.0));
        }
        {
            let orig = net.readout().bias()[0];
            work.readout_mut().bias_mut()[0] = orig + H;
            let up = loss(&work)?;
            work.readout_mut().bias_mut()[0] = orig - H;
            let down = loss(&work)?;
            work.readout_mut().bias_mut()[0] = orig;
            let fd = (up - down) / (2.0 * H);
            let an = grads.readout_b[0];
            worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1.0));
        }
        return Ok(worst);
    }
    Err(CoreError::NumericGuard(
        "no probe point cleared the activation-kink margin after 64 attempts".into(),
    ))
}

/// A small random network with ReLU trunk layers for gradient diagnostics:
/// `blocks` residual blocks of the given depth and channel width, filter
/// size `k`, parameters uniform within the class box.
pub fn random_small_cnn(
    dim: usize,
    channels: usize,
    blocks: usize,
    depth: usize,
    k: usize,
    b_conv: f64,
    b_fc: f64,
    seed: u64,
) -> CoreResult<ResNetCnn> {
    use crate::tensor::{ConvFilter, DenseAffine};
    if blocks == 0 || depth == 0 {
        return Err(CoreError::InvalidArgument(
            "check network needs at least one block and layer".into(),
        ));
    }
    let template_blocks: Vec<crate::cnn::ResidualBlock> = (0..blocks)
        .map(|_| {
            let layers: Vec<(ConvFilter, Vec<f64>)> = (0..depth)
                .map(|_| (ConvFilter::zeros(k, channels, channels), vec![0.0; channels]))
                .collect();
            crate::cnn::ResidualBlock::new(layers)
        })
        .collect::<CoreResult<Vec<_>>>()?;
    let readout = DenseAffine::zeros(1, dim * channels);
    let template =
        ResNetCnn::new(dim, channels, template_blocks, None, readout, b_conv, b_fc)?;
    random_init_like(&template, b_conv, b_fc, seed)
}
