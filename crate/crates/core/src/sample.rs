//! Seeded random model generators shared by tests, benchmarks, and the
//! command-line verifier.

use rand::Rng;

use crate::cnn::{ResNetCnn, ResidualBlock};
use crate::error::CoreResult;
use crate::fnn::{BlockSparseFnn, FnnBlock, FnnLayer};
use crate::tensor::{ConvFilter, DenseAffine};

/// Size and bound envelope for sampling block-sparse networks.
#[derive(Debug, Clone, Copy)]
pub struct FnnSpec {
    /// Input dimension `D`.
    pub d: usize,
    /// Number of blocks `M`.
    pub m: usize,
    /// Largest block depth (depths drawn uniformly from `1..=max_depth`).
    pub max_depth: usize,
    /// Largest layer width (widths drawn uniformly from `1..=max_width`).
    pub max_width: usize,
    /// Declared block parameter bound; entries drawn from `[-b_bs, b_bs]`.
    pub b_bs: f64,
    /// Declared read-out bound; entries drawn from `[-b_fin, b_fin]`.
    pub b_fin: f64,
}

/// Draws a block-sparse network uniformly within the given envelope; the
/// result always satisfies its declared bounds.
pub fn random_fnn<R: Rng>(rng: &mut R, spec: &FnnSpec) -> CoreResult<BlockSparseFnn> {
    let mut blocks = Vec::with_capacity(spec.m);
    let mut finals = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let depth = rng.gen_range(1..=spec.max_depth);
        let mut layers = Vec::with_capacity(depth);
        let mut c_in = spec.d;
        for _ in 0..depth {
            let c_out = rng.gen_range(1..=spec.max_width);
            let weight =
                (0..c_out * c_in).map(|_| rng.gen_range(-spec.b_bs..=spec.b_bs)).collect();
            let bias = (0..c_out).map(|_| rng.gen_range(-spec.b_bs..=spec.b_bs)).collect();
            layers.push(FnnLayer::new(weight, bias, c_out, c_in)?);
            c_in = c_out;
        }
        finals.push((0..c_in).map(|_| rng.gen_range(-spec.b_fin..=spec.b_fin)).collect());
        blocks.push(FnnBlock::new(layers)?);
    }
    let final_bias = rng.gen_range(-spec.b_fin..=spec.b_fin);
    BlockSparseFnn::new(spec.d, blocks, finals, final_bias, spec.b_bs, spec.b_fin)
}

/// Uniform point of the evaluation domain `[-1,1]^d`.
pub fn random_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Draws a residual network whose stored parameters satisfy the declared
/// bounds `(b_conv, b_fc)`; blocks keep a constant channel count.
pub fn random_inclass_cnn<R: Rng>(
    rng: &mut R,
    d: usize,
    c0: usize,
    m: usize,
    max_depth: usize,
    k: usize,
    b_conv: f64,
    b_fc: f64,
) -> CoreResult<ResNetCnn> {
    let mut blocks = Vec::with_capacity(m);
    for _ in 0..m {
        let depth = rng.gen_range(1..=max_depth);
        let layers = (0..depth)
            .map(|_| {
                let taps =
                    (0..k * c0 * c0).map(|_| rng.gen_range(-b_conv..=b_conv)).collect::<Vec<_>>();
                let bias = (0..c0).map(|_| rng.gen_range(-b_conv..=b_conv)).collect::<Vec<_>>();
                ConvFilter::new(taps, k, c0, c0).map(|f| (f, bias))
            })
            .collect::<CoreResult<Vec<_>>>()?;
        blocks.push(ResidualBlock::new(layers)?);
    }
    let weight = (0..d * c0).map(|_| rng.gen_range(-b_fc..=b_fc)).collect();
    let bias = vec![rng.gen_range(-b_fc..=b_fc)];
    let readout = DenseAffine::new(weight, bias, 1, d * c0)?;
    ResNetCnn::new(d, c0, blocks, None, readout, b_conv, b_fc)
}
