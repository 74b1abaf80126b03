//! End-to-end smoothness-class approximators: a block-sparse network built
//! from lattice bumps and local Taylor polynomials, and its compiled
//! residual convolutional form.

use serde::{Deserialize, Serialize};

use crate::approx::lattice::lattice;
use crate::approx::nets::{
    chain_blocks, hat_network, mult_network, pad_to_depth, parallel_shared, q_network,
    LayerBuilder,
};
use crate::approx::taylor::binomial;
use crate::approx::testfns::TaylorOracle;
use crate::cnn::ResNetCnn;
use crate::compiler::{compile_fnn_to_cnn, CompilationCertificate};
use crate::error::{CoreError, CoreResult};
use crate::fnn::{rescale_fnn, BlockSparseFnn, FnnBlock};

/// Sizing constants chosen by the smoothness-class construction for a block
/// budget `M`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderBuildParams {
    /// Requested block budget `M`.
    pub block_budget: usize,
    /// Lattice resolution: the largest `M'` with `(M'+1)^D <= M`.
    pub lattice_resolution: usize,
    /// Product-gadget accuracy exponent `m = ceil(log2 M^(2 + beta/D))`.
    pub accuracy_exponent: usize,
    /// Depth allowance `(m+5) * ceil(log2 D)` for the product trees.
    pub depth_allowance: usize,
    /// Coefficient scale `B = 2 * norm` used by the polynomial networks.
    pub coefficient_scale: f64,
}

/// Computes the sizing constants; errors when the budget is below `2^D`.
pub fn holder_params(
    oracle: &TaylorOracle,
    m_budget: usize,
    d: usize,
) -> CoreResult<HolderBuildParams> {
    if d == 0 {
        return Err(CoreError::InvalidArgument("input dimension must be positive".into()));
    }
    if oracle.dim() != d {
        return Err(CoreError::ShapeMismatch(format!(
            "oracle dimension {} does not match requested dimension {d}",
            oracle.dim()
        )));
    }
    let d_u32 = u32::try_from(d)
        .map_err(|_| CoreError::NumericGuard(format!("dimension {d} is out of range")))?;
    let min_budget = 2usize.checked_pow(d_u32).ok_or_else(|| {
        CoreError::NumericGuard(format!("minimum budget 2^{d} overflows"))
    })?;
    if m_budget < min_budget {
        return Err(CoreError::InvalidArgument(format!(
            "block budget {m_budget} is below the minimum 2^{d} = {min_budget}"
        )));
    }
    let mut m_prime = 1usize;
    while let Some(next) = (m_prime + 2).checked_pow(d_u32) {
        if next > m_budget {
            break;
        }
        m_prime += 1;
    }
    let beta = oracle.beta();
    let exponent = (2.0 + beta / d as f64) * (m_budget as f64).log2();
    if !exponent.is_finite() || exponent > 4096.0 {
        return Err(CoreError::NumericGuard(format!(
            "accuracy exponent {exponent} is out of the supported range"
        )));
    }
    let m = (exponent.ceil() as usize).max(1);
    let levels = (d as f64).log2().ceil() as usize;
    Ok(HolderBuildParams {
        block_budget: m_budget,
        lattice_resolution: m_prime,
        accuracy_exponent: m,
        depth_allowance: (m + 5) * levels,
        coefficient_scale: 2.0 * oracle.norm(),
    })
}

/// Rectifier block mapping `x in [-1,1]^D` to `z = (x+1)/2 in [0,1]^D`: a
/// sign-split pair layer followed by a recombining layer, so the identity
/// holds for every input in the cube.
fn domain_adapter(d: usize) -> CoreResult<FnnBlock> {
    let mut pair = LayerBuilder::new(2 * d, d);
    for j in 0..d {
        pair.set(j, j, 0.5).add(j, 0.5);
        pair.set(d + j, j, -0.5).add(d + j, -0.5);
    }
    let mut merge = LayerBuilder::new(d, 2 * d);
    for j in 0..d {
        merge.set(j, j, 1.0).set(j, d + j, -1.0);
    }
    FnnBlock::new(vec![pair.build()?, merge.build()?])
}

/// Builds the smoothness-class block-sparse approximator on `[-1,1]^D`.
///
/// One block per lattice point `a`: the domain adapter, then the polynomial
/// network and the bump network side by side (depth-padded to align), then
/// the product gadget combining them. The read-out weights are all
/// `B * M'^D` with final bias `B/2`, undoing the shift-and-scale encoding;
/// declared bounds are `1` for blocks and `2 * M * norm` for the read-out.
///
/// Guaranteed sup error on the cube:
/// `norm * (2 * 3^(D+1) + 2^beta) * M^(-beta/D)`.
pub fn holder_fnn(
    oracle: &TaylorOracle,
    m_budget: usize,
    d: usize,
) -> CoreResult<(BlockSparseFnn, HolderBuildParams)> {
    let params = holder_params(oracle, m_budget, d)?;
    let m_prime = params.lattice_resolution;
    let m = params.accuracy_exponent;
    let b_scale = params.coefficient_scale;

    let unit_cube_oracle = oracle.pullback_to_unit_cube();
    let centers = lattice(m_prime, d)?;
    let adapter = domain_adapter(d)?;
    let product = mult_network(m)?;

    let mut blocks = Vec::with_capacity(centers.len());
    for a in &centers {
        let q = q_network(&unit_cube_oracle, a, b_scale, m)?;
        let hat = hat_network(a, m_prime, m, d)?;
        let depth = q.depth().max(hat.depth());
        let side_by_side =
            parallel_shared(&pad_to_depth(&q, depth)?, &pad_to_depth(&hat, depth)?)?;
        blocks.push(chain_blocks(&chain_blocks(&adapter, &side_by_side)?, &product)?);
    }

    let readout = b_scale * (m_prime as f64).powi(d as i32);
    let final_weights = vec![vec![readout]; centers.len()];
    // Degenerate (zero-norm) targets still need a positive declared bound;
    // the floor sits inside the compiler's exact-scale guard range.
    let b_fin = (2.0 * m_budget as f64 * oracle.norm()).max(1e-300);
    let f = BlockSparseFnn::new(d, blocks, final_weights, b_scale / 2.0, 1.0, b_fin)?;
    Ok((f, params))
}

/// The sup-error guarantee of [`holder_fnn`] for a smoothness norm, order,
/// budget, and dimension.
#[must_use]
pub fn holder_error_budget(norm: f64, beta: f64, m_budget: usize, d: usize) -> f64 {
    norm * (2.0 * 3f64.powi(d as i32 + 1) + 2f64.powf(beta))
        * (m_budget as f64).powf(-beta / d as f64)
}

/// Builds the smoothness-class approximator, rescales it so block parameters
/// shrink below the compiled carry weights, and compiles it to a residual
/// convolutional network with filter size `k_filter`.
///
/// The rescaling factor is `16 * D' * K * M^(1/L')` with `D'` the generic
/// width allowance `6 * (C + 1) * D` (`C` counts the monomials the
/// polynomial networks may form) and `L'` the generic depth allowance
/// `2 + (m+5)ceil(log2 D) + (m+4)`.
pub fn holder_cnn(
    oracle: &TaylorOracle,
    m_budget: usize,
    d: usize,
    k_filter: usize,
) -> CoreResult<(ResNetCnn, CompilationCertificate)> {
    let (f, params) = holder_fnn(oracle, m_budget, d)?;
    let monomials = binomial(d + oracle.beta().floor() as usize, d);
    let width_allowance = 6.0 * (monomials + 1.0) * d as f64;
    let depth_allowance =
        (2 + params.depth_allowance + params.accuracy_exponent + 4) as f64;
    let k_scale = 16.0
        * width_allowance
        * k_filter as f64
        * (m_budget as f64).powf(1.0 / depth_allowance);
    if !k_scale.is_finite() || k_scale < 1.0 {
        return Err(CoreError::NumericGuard(format!(
            "rescaling factor {k_scale} left the valid range"
        )));
    }
    let g = rescale_fnn(&f, k_scale)?;
    compile_fnn_to_cnn(&g, k_filter)
}
