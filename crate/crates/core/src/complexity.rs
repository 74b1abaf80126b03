//! Capacity functionals of residual convolutional architectures, covering
//! number logarithms, the estimation-error bound, empirical Lipschitz
//! certification, and the sample-size balancing rule for rate experiments.
//!
//! For an architecture with `M` blocks, per-layer input channels `C^(l-1)`,
//! filter sizes `K^(l)`, and norm bounds `B_conv`, `B_fc`:
//!
//! ```text
//! rho_m   = prod_l C^(l-1) K^(l) B_conv
//! rho_m^+ = prod_l (1 v C^(l-1) K^(l) B_conv)
//! vr      = prod_m (1 + rho_m)
//! vr^+    = 1 + sum_m L'_m rho_m^+
//! Lam1    = (2M+3) C^(0) D (1 v B_fc)(1 v B_conv) vr vr^+
//! Lam2    = sum_{m,l} (C^(l-1) C^(l) K^(l) + C^(l)) + C^(0) D + 1
//! ```
//!
//! `Lam1` bounds the network's Lipschitz constant in its parameters (sup norm
//! over inputs, sup distance over parameters); `Lam2` counts parameter slots
//! including zeros. A size-`eps` sup-norm cover of the class needs at most
//! `Lam2 log(2 B Lam1 / eps)` nats (`B = B_conv v B_fc`), plus
//! `C^(0) Mt L log 2` when channel masks are free, and the estimation bound
//! combines the two in the usual bias/variance shape.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnn::{cnn_eval, ResNetCnn};
use crate::error::{CoreError, CoreResult};

/// Architecture description: shapes and declared bounds, no weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSummary {
    d: usize,
    c0: usize,
    /// Per block, per layer: (output channels, filter size). Input channels
    /// chain from the trunk count.
    blocks: Vec<Vec<(usize, usize)>>,
    b_conv: f64,
    b_fc: f64,
    masked: bool,
    /// Constant block depth used by the masked covering term.
    mask_block_depth: Option<usize>,
}

impl ArchSummary {
    /// Builds an unmasked summary; each block must end at the trunk channel
    /// count so the identity connection is well defined.
    pub fn new(
        d: usize,
        c0: usize,
        blocks: Vec<Vec<(usize, usize)>>,
        b_conv: f64,
        b_fc: f64,
    ) -> CoreResult<Self> {
        if d == 0 || c0 == 0 {
            return Err(CoreError::InvalidArgument(
                "input dimension and trunk channels must be positive".into(),
            ));
        }
        if !(b_conv > 0.0 && b_conv.is_finite()) || !(b_fc > 0.0 && b_fc.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "norm bounds must be positive and finite".into(),
            ));
        }
        for (m, layers) in blocks.iter().enumerate() {
            if layers.is_empty() {
                return Err(CoreError::InvalidArgument(format!("block {m} has no layers")));
            }
            for (l, (c_out, k)) in layers.iter().enumerate() {
                if *c_out == 0 || *k == 0 {
                    return Err(CoreError::InvalidArgument(format!(
                        "block {m} layer {l} has zero channels or filter size"
                    )));
                }
            }
            if layers.last().unwrap().0 != c0 {
                return Err(CoreError::ShapeMismatch(format!(
                    "block {} ends at {} channels, trunk has {}",
                    m,
                    layers.last().unwrap().0,
                    c0
                )));
            }
        }
        Ok(Self { d, c0, blocks, b_conv, b_fc, masked: false, mask_block_depth: None })
    }

    /// Marks the architecture as mask-bearing with the given constant block
    /// depth (enters the covering term).
    pub fn with_masking(mut self, block_depth: usize) -> CoreResult<Self> {
        if block_depth == 0 {
            return Err(CoreError::InvalidArgument("mask block depth must be positive".into()));
        }
        self.masked = true;
        self.mask_block_depth = Some(block_depth);
        Ok(self)
    }

    /// Reads the realized architecture and declared bounds off a concrete
    /// network.
    #[must_use]
    pub fn from_cnn(net: &ResNetCnn) -> Self {
        let blocks = net
            .blocks()
            .iter()
            .map(|b| b.layers().iter().map(|l| (l.filter().c_out(), l.filter().k())).collect())
            .collect();
        let masked = net.masks().is_some();
        Self {
            d: net.input_dim(),
            c0: net.trunk_channels(),
            blocks,
            b_conv: net.b_conv(),
            b_fc: net.b_fc(),
            masked,
            mask_block_depth: if masked { Some(net.max_block_depth()) } else { None },
        }
    }

    /// Input dimension `D`.
    #[must_use]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Trunk channel count `C^(0)`.
    #[must_use]
    pub fn c0(&self) -> usize {
        self.c0
    }

    /// Number of blocks `M`.
    #[must_use]
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Per-layer (output channels, filter size) of block `m`.
    #[must_use]
    pub fn block_layers(&self, m: usize) -> Option<&[(usize, usize)]> {
        self.blocks.get(m).map(Vec::as_slice)
    }

    /// Per-layer (input channels, output channels, filter size) of block `m`
    /// with the input chain resolved.
    #[must_use]
    pub fn layer_dims(&self, m: usize) -> Vec<(usize, usize, usize)> {
        let mut dims = Vec::new();
        let mut c_in = self.c0;
        for (c_out, k) in &self.blocks[m] {
            dims.push((c_in, *c_out, *k));
            c_in = *c_out;
        }
        dims
    }

    /// Overrides one layer's filter size (to express an expected architecture
    /// that deliberately differs from a concrete network).
    pub fn set_layer_filter(&mut self, m: usize, l: usize, k: usize) -> CoreResult<()> {
        if k == 0 {
            return Err(CoreError::InvalidArgument("filter size must be positive".into()));
        }
        let layer = self
            .blocks
            .get_mut(m)
            .and_then(|b| b.get_mut(l))
            .ok_or_else(|| CoreError::InvalidArgument(format!("no layer {l} in block {m}")))?;
        layer.1 = k;
        Ok(())
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

    /// `B_conv v B_fc`, the bound entering covering numbers.
    #[must_use]
    pub fn b_max(&self) -> f64 {
        self.b_conv.max(self.b_fc)
    }

    /// Whether identity-connection masks are free parameters.
    #[must_use]
    pub fn masked(&self) -> bool {
        self.masked
    }

    /// Constant block depth for the masked covering term.
    #[must_use]
    pub fn mask_block_depth(&self) -> Option<usize> {
        self.mask_block_depth
    }

    /// Depth of block `m`.
    #[must_use]
    pub fn block_depth(&self, m: usize) -> usize {
        self.blocks[m].len()
    }
}

/// Capacity report at a given covering radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Per-block growth products `rho_m`.
    pub rho: Vec<f64>,
    /// Per-block clipped growth products `rho_m^+`.
    pub rho_plus: Vec<f64>,
    /// `prod_m (1 + rho_m)`.
    pub varrho: f64,
    /// `1 + sum_m L'_m rho_m^+`.
    pub varrho_plus: f64,
    /// Parameter-Lipschitz functional.
    pub lambda1: f64,
    /// Parameter slot count including zeros.
    pub lambda2: u64,
    /// Covering radius the log-covering number was evaluated at.
    pub epsilon: f64,
    /// Log covering number (nats) at `epsilon`.
    pub covering_log: f64,
    /// `B_conv v B_fc`.
    pub b: f64,
}

/// Growth products of block `m`:
/// `rho_m = prod_l C^(l-1) K^(l) B_conv` and the same product with each
/// factor clipped below at 1.
pub fn block_growth(arch: &ArchSummary, m: usize) -> CoreResult<(f64, f64)> {
    if m >= arch.num_blocks() {
        return Err(CoreError::InvalidArgument(format!(
            "block index {} out of range (M = {})",
            m,
            arch.num_blocks()
        )));
    }
    let mut rho = 1.0;
    let mut rho_plus = 1.0;
    for (c_in, _c_out, k) in arch.layer_dims(m) {
        let factor = (c_in * k) as f64 * arch.b_conv();
        rho *= factor;
        rho_plus *= factor.max(1.0);
    }
    Ok((rho, rho_plus))
}

/// `(varrho, varrho_plus)` over the first `m` blocks
/// (`m = M` gives the full-network values).
pub fn varrho_prefix(arch: &ArchSummary, m: usize) -> CoreResult<(f64, f64)> {
    if m > arch.num_blocks() {
        return Err(CoreError::InvalidArgument(format!(
            "prefix length {} out of range (M = {})",
            m,
            arch.num_blocks()
        )));
    }
    let mut varrho = 1.0;
    let mut varrho_plus = 1.0;
    for mu in 0..m {
        let (rho, rho_plus) = block_growth(arch, mu)?;
        varrho *= 1.0 + rho;
        varrho_plus += arch.block_depth(mu) as f64 * rho_plus;
    }
    Ok((varrho, varrho_plus))
}

/// Parameter-Lipschitz functional
/// `Lam1 = (2M+3) C^(0) D (1 v B_fc)(1 v B_conv) vr vr^+`.
#[must_use]
pub fn lambda1(arch: &ArchSummary) -> f64 {
    let m = arch.num_blocks();
    let (varrho, varrho_plus) =
        varrho_prefix(arch, m).expect("full prefix is always in range");
    (2 * m + 3) as f64
        * (arch.c0() * arch.d()) as f64
        * arch.b_fc().max(1.0)
        * arch.b_conv().max(1.0)
        * varrho
        * varrho_plus
}

/// Parameter slot count including zeros:
/// `sum_{m,l} (C^(l-1) C^(l) K^(l) + C^(l)) + C^(0) D + 1`.
#[must_use]
pub fn lambda2(arch: &ArchSummary) -> u64 {
    let mut total: u64 = (arch.c0() * arch.d()) as u64 + 1;
    for m in 0..arch.num_blocks() {
        for (c_in, c_out, k) in arch.layer_dims(m) {
            total += (c_in * c_out * k + c_out) as u64;
        }
    }
    total
}

/// Log covering number (nats) at radius `eps`:
/// `Lam2 log(2 B Lam1 / eps)`, plus `C^(0) Mt L log 2` when masks are free.
pub fn covering_log(arch: &ArchSummary, eps: f64) -> CoreResult<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "covering radius must be positive, got {eps}"
        )));
    }
    let base = lambda2(arch) as f64 * (2.0 * arch.b_max() * lambda1(arch) / eps).ln();
    let mask_term = if arch.masked() {
        let l = arch.mask_block_depth().ok_or_else(|| {
            CoreError::InvalidArgument("masked architecture missing its block depth".into())
        })?;
        (arch.c0() * arch.num_blocks() * l) as f64 * std::f64::consts::LN_2
    } else {
        0.0
    };
    Ok(base + mask_term)
}

/// Estimation-error bound
/// `C0 (approx_err_sq + Ft^2 / N * Lam2 log(2 Lam1 B N))` with
/// `Ft = (f_inf / sigma_noise) v 1/2`.
///
/// Requires the log covering number at radius `1/N` to be at least `log 3`
/// (the oracle inequality's hypothesis that the cover is nontrivial).
pub fn estimation_bound(
    arch: &ArchSummary,
    approx_err_sq: f64,
    n: u64,
    f_inf: f64,
    sigma_noise: f64,
    c0_const: f64,
) -> CoreResult<f64> {
    if n == 0 {
        return Err(CoreError::InvalidArgument("sample size must be at least 1".into()));
    }
    if !(sigma_noise > 0.0) || !sigma_noise.is_finite() {
        return Err(CoreError::InvalidArgument("noise level must be positive".into()));
    }
    if !(approx_err_sq >= 0.0) || !approx_err_sq.is_finite() {
        return Err(CoreError::InvalidArgument(
            "squared approximation error must be nonnegative".into(),
        ));
    }
    if !(f_inf >= 0.0) || !f_inf.is_finite() {
        return Err(CoreError::InvalidArgument("target sup norm must be nonnegative".into()));
    }
    if !(c0_const > 0.0) || !c0_const.is_finite() {
        return Err(CoreError::InvalidArgument("leading constant must be positive".into()));
    }
    let cover = covering_log(arch, 1.0 / n as f64)?;
    if cover < 3.0f64.ln() {
        return Err(CoreError::InvalidArgument(format!(
            "log covering number {cover:.6} at radius 1/{n} is below log 3; \
             the oracle inequality does not apply"
        )));
    }
    let f_tilde = (f_inf / sigma_noise).max(0.5);
    let variance = f_tilde * f_tilde / n as f64
        * lambda2(arch) as f64
        * (2.0 * lambda1(arch) * arch.b_max() * n as f64).ln();
    Ok(c0_const * (approx_err_sq + variance))
}

/// Outcome of an empirical parameter-Lipschitz certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// Functional value computed from the declared bounds.
    pub lambda1: f64,
    /// Parameter perturbation radius.
    pub epsilon: f64,
    /// Number of random perturbations tried.
    pub trials: usize,
    /// Number of random inputs per perturbation.
    pub probes: usize,
    /// Largest observed output deviation.
    pub max_deviation: f64,
    /// Certified ceiling `lambda1 * epsilon`.
    pub bound: f64,
    /// Whether the ceiling held on every trial.
    pub pass: bool,
}

/// Perturbs every parameter by at most `eps` (clamped so the perturbed
/// network stays inside its declared class) and verifies that the output
/// moves by at most `lambda1 * eps` on random inputs.
pub fn lipschitz_check(
    net: &ResNetCnn,
    eps: f64,
    trials: usize,
    probes: usize,
    seed: u64,
) -> CoreResult<LipschitzReport> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "perturbation radius must be nonnegative, got {eps}"
        )));
    }
    if net.max_conv_param_norm() > net.b_conv() || net.max_fc_param_norm() > net.b_fc() {
        return Err(CoreError::BoundViolation(
            "network violates its declared bounds; the Lipschitz functional only \
             covers in-class networks"
                .into(),
        ));
    }
    let arch = ArchSummary::from_cnn(net);
    let lam1 = lambda1(&arch);
    let bound = lam1 * eps;
    let d = net.input_dim();
    let max_deviation = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(trial as u64));
            let mut perturbed = net.clone();
            let b_conv = net.b_conv();
            let b_fc = net.b_fc();
            for block in perturbed.blocks_mut() {
                for layer in block.layers_mut() {
                    for w in layer.filter_mut().taps_mut() {
                        *w = (*w + rng.gen_range(-eps..=eps)).clamp(-b_conv, b_conv);
                    }
                    for b in layer.bias_mut() {
                        *b = (*b + rng.gen_range(-eps..=eps)).clamp(-b_conv, b_conv);
                    }
                }
            }
            for w in perturbed.readout_mut().weight_mut() {
                *w = (*w + rng.gen_range(-eps..=eps)).clamp(-b_fc, b_fc);
            }
            for b in perturbed.readout_mut().bias_mut() {
                *b = (*b + rng.gen_range(-eps..=eps)).clamp(-b_fc, b_fc);
            }
            let mut worst: f64 = 0.0;
            for _ in 0..probes {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let y = cnn_eval(net, &x).expect("original network evaluates in-domain");
                let y2 = cnn_eval(&perturbed, &x).expect("perturbed network evaluates in-domain");
                worst = worst.max((y - y2).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(LipschitzReport {
        lambda1: lam1,
        epsilon: eps,
        trials,
        probes,
        max_deviation,
        bound,
        pass: max_deviation <= bound,
    })
}

/// Sample-size balancing: given error exponents `gamma1` (approximation, in
/// the block count `M`) and `gamma2` (capacity growth), picks
/// `M = floor(N^(1/(2 gamma1 + gamma2)))` and predicts the risk exponent
/// `-2 gamma1 / (2 gamma1 + gamma2)`.
pub fn rate_balance(gamma1: f64, gamma2: f64, n: u64) -> CoreResult<(u64, f64)> {
    if !(gamma1 > 0.0) || !(gamma2 > 0.0) || !gamma1.is_finite() || !gamma2.is_finite() {
        return Err(CoreError::InvalidArgument("rate exponents must be positive".into()));
    }
    if n == 0 {
        return Err(CoreError::InvalidArgument("sample size must be at least 1".into()));
    }
    let s = 2.0 * gamma1 + gamma2;
    let nf = n as f64;
    let mut m = nf.powf(1.0 / s).floor() as u64;
    // powf can land a hair under an exact integer power; nudge across.
    let fits = |cand: u64| (cand as f64).powf(s) <= nf * (1.0 + 1e-9);
    while fits(m + 1) {
        m += 1;
    }
    while m > 1 && !fits(m) {
        m -= 1;
    }
    let m = m.max(1);
    Ok((m, -2.0 * gamma1 / s))
}

/// Exact rational form of the predicted exponent for
/// `gamma1 = p1/q1, gamma2 = p2/q2`: returns `(num, den)` with
/// `num/den = -2 gamma1 / (2 gamma1 + gamma2)` in lowest terms, `den > 0`.
pub fn rate_exponent_rational(p1: i64, q1: i64, p2: i64, q2: i64) -> CoreResult<(i64, i64)> {
    if p1 <= 0 || q1 <= 0 || p2 <= 0 || q2 <= 0 {
        return Err(CoreError::InvalidArgument(
            "rate exponents must be ratios of positive integers".into(),
        ));
    }
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let num = -2 * p1 * q2;
    let den = 2 * p1 * q2 + p2 * q1;
    let g = gcd(num, den);
    Ok((num / g, den / g))
}

/// Evaluates every capacity functional at one covering radius.
pub fn complexity_report(arch: &ArchSummary, eps: f64) -> CoreResult<ComplexityReport> {
    let mut rho = Vec::with_capacity(arch.num_blocks());
    let mut rho_plus = Vec::with_capacity(arch.num_blocks());
    for m in 0..arch.num_blocks() {
        let (r, rp) = block_growth(arch, m)?;
        rho.push(r);
        rho_plus.push(rp);
    }
    let (varrho, varrho_plus) = varrho_prefix(arch, arch.num_blocks())?;
    Ok(ComplexityReport {
        rho,
        rho_plus,
        varrho,
        varrho_plus,
        lambda1: lambda1(arch),
        lambda2: lambda2(arch),
        epsilon: eps,
        covering_log: covering_log(arch, eps)?,
        b: arch.b_max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::{MaskVector, ResidualBlock};
    use crate::tensor::{ConvFilter, DenseAffine};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Uniform architecture: `m` blocks of `l` layers, all at `c0` channels
    /// and filter size `k`.
    fn uniform_arch(m: usize, d: usize, c0: usize, k: usize, l: usize, b_conv: f64, b_fc: f64) -> ArchSummary {
        let blocks = vec![vec![(c0, k); l]; m];
        ArchSummary::new(d, c0, blocks, b_conv, b_fc).unwrap()
    }

    /// Second evaluator with a different loop structure: folds layers in
    /// reverse order and accumulates blocks back to front.
    fn lambda1_alt(arch: &ArchSummary) -> f64 {
        let mut varrho = 1.0;
        let mut varrho_plus = 1.0;
        for m in (0..arch.num_blocks()).rev() {
            let dims = arch.layer_dims(m);
            let rho = dims
                .iter()
                .rev()
                .fold(1.0, |acc, (c_in, _, k)| acc * ((c_in * k) as f64 * arch.b_conv()));
            let rho_plus = dims
                .iter()
                .rev()
                .fold(1.0, |acc, (c_in, _, k)| {
                    acc * ((c_in * k) as f64 * arch.b_conv()).max(1.0)
                });
            varrho *= 1.0 + rho;
            varrho_plus += dims.len() as f64 * rho_plus;
        }
        varrho
            * varrho_plus
            * (2 * arch.num_blocks() + 3) as f64
            * (arch.c0() * arch.d()) as f64
            * arch.b_fc().max(1.0)
            * arch.b_conv().max(1.0)
    }

    fn lambda2_alt(arch: &ArchSummary) -> u64 {
        let block_total: u64 = (0..arch.num_blocks())
            .rev()
            .map(|m| {
                arch.layer_dims(m)
                    .iter()
                    .rev()
                    .map(|(c_in, c_out, k)| (c_in * c_out * k + c_out) as u64)
                    .sum::<u64>()
            })
            .sum();
        block_total + (arch.c0() * arch.d()) as u64 + 1
    }

    fn random_arch(rng: &mut impl Rng) -> ArchSummary {
        let d = rng.gen_range(1..=6);
        let c0 = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let blocks = (0..m)
            .map(|_| {
                let depth = rng.gen_range(1..=3);
                let mut layers: Vec<(usize, usize)> = (0..depth)
                    .map(|_| (rng.gen_range(1..=4), rng.gen_range(1..=3)))
                    .collect();
                layers.last_mut().unwrap().0 = c0;
                layers
            })
            .collect();
        ArchSummary::new(d, c0, blocks, rng.gen_range(0.1..=2.0), rng.gen_range(0.1..=2.0))
            .unwrap()
    }

    fn random_inclass_net(rng: &mut impl Rng, d: usize, c0: usize, m: usize, b_conv: f64, b_fc: f64) -> ResNetCnn {
        let blocks = (0..m)
            .map(|_| {
                let depth = rng.gen_range(1..=3);
                let k = rng.gen_range(1..=d.min(3));
                let layers = (0..depth)
                    .map(|_| {
                        let taps = (0..k * c0 * c0)
                            .map(|_| rng.gen_range(-b_conv..=b_conv))
                            .collect::<Vec<_>>();
                        let bias =
                            (0..c0).map(|_| rng.gen_range(-b_conv..=b_conv)).collect::<Vec<_>>();
                        (ConvFilter::new(taps, k, c0, c0).unwrap(), bias)
                    })
                    .collect();
                ResidualBlock::new(layers).unwrap()
            })
            .collect::<Vec<_>>();
        let weight = (0..d * c0).map(|_| rng.gen_range(-b_fc..=b_fc)).collect::<Vec<_>>();
        let bias = vec![rng.gen_range(-b_fc..=b_fc)];
        let readout = DenseAffine::new(weight, bias, 1, d * c0).unwrap();
        ResNetCnn::new(d, c0, blocks, None, readout, b_conv, b_fc).unwrap()
    }

    #[test]
    fn block_growth_single_layer() {
        let arch = uniform_arch(1, 4, 3, 2, 1, 0.5, 1.0);
        let (rho, rho_plus) = block_growth(&arch, 0).unwrap();
        assert_eq!(rho, 3.0);
        assert_eq!(rho_plus, 3.0);
    }

    #[test]
    fn block_growth_unit_factors() {
        // factor C K B = 2*1*0.5 = 1 on each layer
        let arch = uniform_arch(1, 4, 2, 1, 3, 0.5, 1.0);
        let (rho, rho_plus) = block_growth(&arch, 0).unwrap();
        assert_eq!(rho, 1.0);
        assert_eq!(rho_plus, 1.0);
    }

    #[test]
    fn block_growth_mixed_factors() {
        // layer factors 0.5 (1 ch * k1 * 0.5) and 2 (4 ch * k1 * 0.5)
        let arch = ArchSummary::new(4, 1, vec![vec![(4, 1), (1, 1)]], 0.5, 1.0).unwrap();
        let (rho, rho_plus) = block_growth(&arch, 0).unwrap();
        assert_eq!(rho, 1.0);
        assert_eq!(rho_plus, 2.0);
    }

    #[test]
    fn lambda1_hand_worked_value() {
        let arch = uniform_arch(1, 4, 3, 2, 1, 0.5, 1.0);
        assert_eq!(lambda1(&arch), 960.0);
    }

    #[test]
    fn lambda1_vanishing_bound_limit() {
        let arch = uniform_arch(2, 4, 3, 2, 2, 1e-13, 1e-13);
        let expected = (2 * 2 + 3) as f64 * 12.0 * (1.0 + 4.0);
        assert!((lambda1(&arch) - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn lambda1_linear_in_large_readout_bound() {
        let a1 = uniform_arch(2, 3, 2, 2, 2, 0.7, 1.5);
        let a2 = uniform_arch(2, 3, 2, 2, 2, 0.7, 3.0);
        assert!((lambda1(&a2) - 2.0 * lambda1(&a1)).abs() <= 1e-12 * lambda1(&a2));
    }

    #[test]
    fn lambda1_can_shrink_with_depth_below_unit_growth() {
        // With per-layer growth factor C K B_conv = 0.1 < 1 and many blocks,
        // the product functional collapses toward 1 faster than the
        // depth-weighted sum grows, so extra depth lowers the bound. This is
        // correct behavior of the formula, not a defect: with 20 depth-1
        // blocks the product term is (1 + 0.1)^20 ~ 6.7, while at depth 2 it
        // is (1 + 0.01)^20 ~ 1.2.
        let shallow = lambda1(&uniform_arch(20, 1, 1, 1, 1, 0.1, 1.0));
        let deep = lambda1(&uniform_arch(20, 1, 1, 1, 2, 0.1, 1.0));
        assert!(deep < shallow, "deep {deep} vs shallow {shallow}");
    }

    #[test]
    fn lambda2_hand_worked_value() {
        let arch = uniform_arch(1, 4, 3, 2, 1, 0.5, 1.0);
        assert_eq!(lambda2(&arch), 34);
    }

    #[test]
    fn lambda2_degenerate_readout_only() {
        let arch = ArchSummary::new(4, 3, vec![], 1.0, 1.0).unwrap();
        assert_eq!(lambda2(&arch), 13);
    }

    #[test]
    fn covering_log_zero_at_trivial_radius() {
        let arch = uniform_arch(1, 4, 3, 2, 1, 0.5, 1.0);
        let eps = 2.0 * arch.b_max() * lambda1(&arch);
        assert_eq!(covering_log(&arch, eps).unwrap(), 0.0);
    }

    #[test]
    fn covering_log_halving_radius_adds_lambda2_log2() {
        let arch = uniform_arch(2, 4, 3, 2, 2, 0.5, 1.0);
        let a = covering_log(&arch, 0.01).unwrap();
        let b = covering_log(&arch, 0.005).unwrap();
        let expect = lambda2(&arch) as f64 * std::f64::consts::LN_2;
        assert!((b - a - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn covering_log_mask_penalty() {
        let plain = uniform_arch(4, 5, 3, 2, 2, 0.5, 1.0);
        let masked = plain.clone().with_masking(2).unwrap();
        let a = covering_log(&plain, 0.01).unwrap();
        let b = covering_log(&masked, 0.01).unwrap();
        let expect = 24.0 * std::f64::consts::LN_2;
        assert!((b - a - expect).abs() <= 1e-12 * (1.0 + expect));
    }

    #[test]
    fn covering_log_rejects_nonpositive_radius() {
        let arch = uniform_arch(1, 4, 3, 2, 1, 0.5, 1.0);
        assert!(covering_log(&arch, 0.0).is_err());
        assert!(covering_log(&arch, -1.0).is_err());
    }

    #[test]
    fn estimation_bound_decreases_in_sample_size() {
        let arch = uniform_arch(2, 4, 3, 2, 2, 1.0, 1.0);
        let mut last = f64::INFINITY;
        for n in [1_000u64, 10_000, 100_000, 1_000_000] {
            let b = estimation_bound(&arch, 0.0, n, 1.0, 1.0, 1.0).unwrap();
            assert!(b < last, "bound not decreasing at N={n}");
            last = b;
        }
    }

    #[test]
    fn estimation_bound_floors_target_ratio() {
        let arch = uniform_arch(2, 4, 3, 2, 2, 1.0, 1.0);
        let n = 1000;
        let b0 = estimation_bound(&arch, 0.0, n, 0.0, 1.0, 1.0).unwrap();
        // direct formula with Ft = 0.5
        let expect = 0.25 / n as f64
            * lambda2(&arch) as f64
            * (2.0 * lambda1(&arch) * arch.b_max() * n as f64).ln();
        assert!((b0 - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn estimation_bound_variance_ratio_matches_formula() {
        let arch = uniform_arch(2, 4, 3, 2, 2, 1.0, 1.0);
        let b3 = estimation_bound(&arch, 0.0, 1_000, 1.0, 1.0, 1.0).unwrap();
        let b4 = estimation_bound(&arch, 0.0, 10_000, 1.0, 1.0, 1.0).unwrap();
        let c = 2.0 * lambda1(&arch) * arch.b_max();
        let expect_ratio = (1_000.0 / 10_000.0) * (c * 10_000.0).ln() / (c * 1_000.0).ln();
        assert!((b4 / b3 - expect_ratio).abs() <= 1e-12);
    }

    #[test]
    fn rate_balance_hand_worked() {
        let (m, expo) = rate_balance(1.0, 1.0, 1024).unwrap();
        assert_eq!(m, 10);
        assert!((expo + 2.0 / 3.0).abs() <= 1e-15);
    }

    #[test]
    fn rate_balance_exact_cube() {
        let (m, _) = rate_balance(1.0, 1.0, 1000).unwrap();
        assert_eq!(m, 10);
    }

    #[test]
    fn rate_exponent_rational_families() {
        // smoothness beta over dimension d, capacity exponent 1
        for (beta, d) in [(1i64, 1i64), (2, 3), (3, 2), (5, 4)] {
            let (num, den) = rate_exponent_rational(beta, d, 1, 1).unwrap();
            let g = |a: i64, b: i64| {
                let (mut a, mut b) = (a.abs(), b.abs());
                while b != 0 {
                    let t = a % b;
                    a = b;
                    b = t;
                }
                a
            };
            let gg = g(2 * beta, 2 * beta + d);
            assert_eq!((num, den), (-(2 * beta) / gg, (2 * beta + d) / gg));
        }
        // ridge-combination smoothness 1/2 + 1/d
        for d in [1i64, 2, 3, 5, 8] {
            let (num, den) = rate_exponent_rational(d + 2, 2 * d, 1, 1).unwrap();
            // expect -(d+2) / (2(d+1)) in lowest terms
            let g = |a: i64, b: i64| {
                let (mut a, mut b) = (a.abs(), b.abs());
                while b != 0 {
                    let t = a % b;
                    a = b;
                    b = t;
                }
                a
            };
            let gg = g(d + 2, 2 * (d + 1));
            assert_eq!((num, den), (-(d + 2) / gg, 2 * (d + 1) / gg));
        }
    }

    #[test]
    fn lipschitz_zero_radius_zero_deviation() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let net = random_inclass_net(&mut rng, 4, 2, 2, 0.5, 1.0);
        let report = lipschitz_check(&net, 0.0, 3, 10, 1).unwrap();
        assert_eq!(report.max_deviation, 0.0);
        assert!(report.pass);
    }

    #[test]
    fn lipschitz_zero_network_passes() {
        let block = ResidualBlock::new(vec![(ConvFilter::zeros(2, 2, 2), vec![0.0; 2])]).unwrap();
        let net = ResNetCnn::new(4, 2, vec![block], None, DenseAffine::zeros(1, 8), 1.0, 1.0)
            .unwrap();
        let report = lipschitz_check(&net, 0.5, 5, 20, 3).unwrap();
        assert!(report.pass, "deviation {} > bound {}", report.max_deviation, report.bound);
    }

    #[test]
    fn lipschitz_rejects_out_of_class_networks() {
        let mut filter = ConvFilter::zeros(1, 2, 2);
        filter.set(0, 0, 0, 5.0);
        let block = ResidualBlock::new(vec![(filter, vec![0.0; 2])]).unwrap();
        let net =
            ResNetCnn::new(4, 2, vec![block], None, DenseAffine::zeros(1, 8), 1.0, 1.0).unwrap();
        assert!(matches!(
            lipschitz_check(&net, 0.1, 1, 1, 0),
            Err(CoreError::BoundViolation(_))
        ));
    }

    #[test]
    fn lipschitz_random_networks_never_violate() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for trial in 0..5 {
            let d = rng.gen_range(2..=5);
            let c0 = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=3);
            let net = random_inclass_net(&mut rng, d, c0, m, 0.8, 1.2);
            let report = lipschitz_check(&net, 1e-3, 10, 50, trial).unwrap();
            assert!(
                report.pass,
                "violation: deviation {} > bound {}",
                report.max_deviation, report.bound
            );
        }
    }

    #[test]
    fn trunk_sup_norm_respects_growth_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..20 {
            let d = rng.gen_range(2..=5);
            let c0 = rng.gen_range(1..=3);
            let b_conv = rng.gen_range(0.2..=1.5);
            let m = rng.gen_range(1..=4);
            let net = random_inclass_net(&mut rng, d, c0, m, b_conv, 1.0);
            let arch = ArchSummary::from_cnn(&net);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let (_, trace) = net.eval_trace(&x).unwrap();
            for m in 1..trace.len() {
                let (varrho, varrho_plus) = varrho_prefix(&arch, m).unwrap();
                let bound = net.b_conv().max(1.0) * varrho * varrho_plus;
                assert!(
                    trace[m].sup_norm() <= bound + 1e-9,
                    "trunk sup {} exceeds growth bound {} after block {}",
                    trace[m].sup_norm(),
                    bound,
                    m
                );
            }
        }
    }

    #[test]
    fn masked_net_summary_carries_block_depth() {
        let block = ResidualBlock::new(vec![(ConvFilter::zeros(2, 2, 2), vec![0.0; 2])]).unwrap();
        let net = ResNetCnn::new(
            4,
            2,
            vec![block],
            Some(vec![MaskVector::ones(2)]),
            DenseAffine::zeros(1, 8),
            1.0,
            1.0,
        )
        .unwrap();
        let arch = ArchSummary::from_cnn(&net);
        assert!(arch.masked());
        assert_eq!(arch.mask_block_depth(), Some(1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn evaluators_agree(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let arch = random_arch(&mut rng);
            let l1 = lambda1(&arch);
            let l1_alt = lambda1_alt(&arch);
            prop_assert!((l1 - l1_alt).abs() <= 1e-12 * l1.max(1.0));
            prop_assert_eq!(lambda2(&arch), lambda2_alt(&arch));
            prop_assert!(l1 > 0.0);
            prop_assert!(lambda2(&arch) >= 1);
        }

        #[test]
        fn lambda2_counts_slots_of_concrete_networks(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=5);
            let c0 = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=3);
            let net = random_inclass_net(&mut rng, d, c0, m, 1.0, 1.0);
            let arch = ArchSummary::from_cnn(&net);
            prop_assert_eq!(lambda2(&arch), net.slot_count() as u64);
        }

        #[test]
        fn lambda1_monotone_in_every_argument(seed in 0u64..500) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let m = rng.gen_range(1..=3);
            let d = rng.gen_range(1..=5);
            let c0 = rng.gen_range(1..=3);
            let k = rng.gen_range(1..=3);
            let l = rng.gen_range(1..=3);
            let b_conv = rng.gen_range(0.05..=2.0);
            let b_fc = rng.gen_range(0.05..=2.0);
            let base = lambda1(&uniform_arch(m, d, c0, k, l, b_conv, b_fc));
            prop_assert!(lambda1(&uniform_arch(m + 1, d, c0, k, l, b_conv, b_fc)) >= base);
            prop_assert!(lambda1(&uniform_arch(m, d + 1, c0, k, l, b_conv, b_fc)) >= base);
            prop_assert!(lambda1(&uniform_arch(m, d, c0 + 1, k, l, b_conv, b_fc)) >= base);
            // Depth monotonicity needs a per-layer growth factor of at least
            // one; below that the product term shrinks faster than the sum
            // term grows (see lambda1_can_shrink_with_depth_below_unit_growth).
            if c0 as f64 * k as f64 * b_conv >= 1.0 {
                prop_assert!(lambda1(&uniform_arch(m, d, c0, k, l + 1, b_conv, b_fc)) >= base);
            }
            prop_assert!(
                lambda1(&uniform_arch(m, d, c0, k, l, b_conv * 1.5, b_fc)) >= base
            );
            prop_assert!(
                lambda1(&uniform_arch(m, d, c0, k, l, b_conv, b_fc * 1.5)) >= base
            );
        }

        #[test]
        fn covering_log_strictly_decreasing_in_radius(seed in 0u64..500) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let arch = random_arch(&mut rng);
            let e1 = rng.gen_range(1e-6..=0.1);
            let e2 = e1 * rng.gen_range(1.5..=10.0);
            prop_assert!(covering_log(&arch, e1).unwrap() > covering_log(&arch, e2).unwrap());
        }

        #[test]
        fn rate_balance_is_floor_of_power(n in 1u64..100_000, g1 in 0.1f64..3.0, g2 in 0.1f64..3.0) {
            let (m, expo) = rate_balance(g1, g2, n).unwrap();
            let s = 2.0 * g1 + g2;
            prop_assert!(m >= 1);
            prop_assert!((m as f64).powf(s) <= n as f64 * (1.0 + 1e-6));
            if m > 1 {
                prop_assert!(((m + 1) as f64).powf(s) > n as f64 * (1.0 - 1e-6));
            }
            prop_assert!((expo + 2.0 * g1 / s).abs() <= 1e-12);
        }
    }
}
