//! Rectifier-network building blocks for the constructive approximators:
//! layer builders, block combinators, the pairwise-product gadget, localized
//! bump networks, and truncated-Taylor-polynomial networks.
//!
//! All constructions keep every weight and bias magnitude at most one, so the
//! blocks slot into a block-sparse network with unit parameter bound.

use crate::approx::taylor::{binomial, multi_factorial, multi_indices_below};
use crate::approx::testfns::TaylorOracle;
use crate::error::{CoreError, CoreResult};
use crate::fnn::{FnnBlock, FnnLayer};

/// Incremental dense-layer builder. Rows are output channels; the stored
/// bias is subtracted before the rectifier, so `add(r, v)` arranges for `+v`
/// to be added to row `r`'s pre-activation.
pub(crate) struct LayerBuilder {
    c_out: usize,
    c_in: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

impl LayerBuilder {
    pub(crate) fn new(c_out: usize, c_in: usize) -> Self {
        Self { c_out, c_in, w: vec![0.0; c_out * c_in], b: vec![0.0; c_out] }
    }

    pub(crate) fn set(&mut self, r: usize, c: usize, v: f64) -> &mut Self {
        self.w[r * self.c_in + c] = v;
        self
    }

    /// Adds the constant `v` to row `r`'s pre-activation.
    pub(crate) fn add(&mut self, r: usize, v: f64) -> &mut Self {
        self.b[r] = -v;
        self
    }

    pub(crate) fn build(self) -> CoreResult<FnnLayer> {
        FnnLayer::new(self.w, self.b, self.c_out, self.c_in)
    }
}

/// The identity on `d` nonnegative channels (a rectifier layer is transparent
/// on nonnegative inputs).
pub fn identity_layer(d: usize) -> CoreResult<FnnLayer> {
    let mut lb = LayerBuilder::new(d, d);
    for j in 0..d {
        lb.set(j, j, 1.0);
    }
    lb.build()
}

/// A block of `depth` identity layers on `d` nonnegative channels.
pub fn identity_chain(d: usize, depth: usize) -> CoreResult<FnnBlock> {
    if depth == 0 {
        return Err(CoreError::InvalidArgument("identity chain needs positive depth".into()));
    }
    let mut layers = Vec::with_capacity(depth);
    for _ in 0..depth {
        layers.push(identity_layer(d)?);
    }
    FnnBlock::new(layers)
}

/// Feeds `first`'s output into `second`.
pub fn chain_blocks(first: &FnnBlock, second: &FnnBlock) -> CoreResult<FnnBlock> {
    if first.output_dim() != second.input_dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "cannot chain: first block outputs {}, second expects {}",
            first.output_dim(),
            second.input_dim()
        )));
    }
    let mut layers = first.layers().to_vec();
    layers.extend_from_slice(second.layers());
    FnnBlock::new(layers)
}

/// Extends a block to exactly `depth` layers by appending identity layers
/// (valid because rectifier outputs are nonnegative).
pub fn pad_to_depth(block: &FnnBlock, depth: usize) -> CoreResult<FnnBlock> {
    if depth < block.depth() {
        return Err(CoreError::InvalidArgument(format!(
            "cannot pad a depth-{} block down to depth {}",
            block.depth(),
            depth
        )));
    }
    if depth == block.depth() {
        return Ok(block.clone());
    }
    chain_blocks(block, &identity_chain(block.output_dim(), depth - block.depth())?)
}

fn parallel_impl(a: &FnnBlock, b: &FnnBlock, shared_input: bool) -> CoreResult<FnnBlock> {
    if a.depth() != b.depth() {
        return Err(CoreError::ShapeMismatch(format!(
            "parallel blocks need equal depth, got {} and {}",
            a.depth(),
            b.depth()
        )));
    }
    let mut layers = Vec::with_capacity(a.depth());
    for (i, (la, lb_)) in a.layers().iter().zip(b.layers()).enumerate() {
        let share_cols = shared_input && i == 0;
        let c_in = if share_cols { la.c_in() } else { la.c_in() + lb_.c_in() };
        let c_out = la.c_out() + lb_.c_out();
        let mut lb = LayerBuilder::new(c_out, c_in);
        for r in 0..la.c_out() {
            for c in 0..la.c_in() {
                lb.set(r, c, la.get(r, c));
            }
            lb.add(r, -la.bias()[r]);
        }
        let col_off = if share_cols { 0 } else { la.c_in() };
        for r in 0..lb_.c_out() {
            for c in 0..lb_.c_in() {
                lb.set(la.c_out() + r, col_off + c, lb_.get(r, c));
            }
            lb.add(la.c_out() + r, -lb_.bias()[r]);
        }
        layers.push(lb.build()?);
    }
    FnnBlock::new(layers)
}

/// Runs two equal-depth blocks side by side on the *same* input; the output
/// is the concatenation of both outputs.
pub fn parallel_shared(a: &FnnBlock, b: &FnnBlock) -> CoreResult<FnnBlock> {
    if a.input_dim() != b.input_dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "shared-input parallel blocks need equal input width, got {} and {}",
            a.input_dim(),
            b.input_dim()
        )));
    }
    parallel_impl(a, b, true)
}

/// Runs two equal-depth blocks side by side on *disjoint* input slices
/// (first block reads the leading coordinates).
pub fn parallel_disjoint(a: &FnnBlock, b: &FnnBlock) -> CoreResult<FnnBlock> {
    parallel_impl(a, b, false)
}

/// Approximate pairwise product on `[0,1]^2` with sup error at most `2^-m`.
///
/// Uses `xy = u^2 - v^2` with `u = (x+y)/2`, `v = |x-y|/2` and a sawtooth
/// refinement of the piecewise-linear interpolant of `t^2`: the running value
/// `R_k = f_k(u) - f_k(v)` stays in `[0,1]`, so every rectifier along the
/// carry is transparent. Guarantees beyond the error bound: the output lies
/// in `[0,1]`, `Mult(0, y) = 0` exactly, and `Mult(1, y) = y` exactly.
///
/// Depth is `2 + 2*floor(m/2) <= m + 4`, every layer has at most five
/// channels, and all parameters have magnitude at most one.
pub fn mult_network(m: usize) -> CoreResult<FnnBlock> {
    if m == 0 {
        return Err(CoreError::InvalidArgument(
            "product accuracy exponent must be at least one".into(),
        ));
    }
    let teeth = m / 2;
    let mut layers = Vec::with_capacity(2 + 2 * teeth);

    // (x, y) -> (u, v_plus, v_minus): u = (x+y)/2, v_plus + v_minus = |x-y|/2
    let mut l0 = LayerBuilder::new(3, 2);
    l0.set(0, 0, 0.5).set(0, 1, 0.5);
    l0.set(1, 0, 0.5).set(1, 1, -0.5);
    l0.set(2, 0, -0.5).set(2, 1, 0.5);
    layers.push(l0.build()?);

    if teeth == 0 {
        // R_0 = u - v = min(x, y), the interpolant of t^2 on {0, 1}
        let mut l1 = LayerBuilder::new(1, 3);
        l1.set(0, 0, 1.0).set(0, 1, -1.0).set(0, 2, -1.0);
        layers.push(l1.build()?);
        return FnnBlock::new(layers);
    }

    // (u, v+, v-) -> (s_u, s_v, R_0)
    let mut l1 = LayerBuilder::new(3, 3);
    l1.set(0, 0, 1.0);
    l1.set(1, 1, 1.0).set(1, 2, 1.0);
    l1.set(2, 0, 1.0).set(2, 1, -1.0).set(2, 2, -1.0);
    layers.push(l1.build()?);

    for k in 1..=teeth {
        let mid = 2f64.powi(-(k as i32));
        // (s_u, s_v, R) -> (d_u, p_u, d_v, p_v, R): distances of each carry
        // from the midpoint of its range, split by side
        let mut la = LayerBuilder::new(5, 3);
        la.set(0, 0, -1.0).add(0, mid);
        la.set(1, 0, 1.0).add(1, -mid);
        la.set(2, 1, -1.0).add(2, mid);
        la.set(3, 1, 1.0).add(3, -mid);
        la.set(4, 2, 1.0);
        layers.push(la.build()?);

        // fold the carries: s' = mid - d - p; advance R by (d_u+p_u-d_v-p_v)/2^k
        if k < teeth {
            let mut lb = LayerBuilder::new(3, 5);
            lb.set(0, 0, -1.0).set(0, 1, -1.0).add(0, mid);
            lb.set(1, 2, -1.0).set(1, 3, -1.0).add(1, mid);
            lb.set(2, 0, mid).set(2, 1, mid).set(2, 2, -mid).set(2, 3, -mid).set(2, 4, 1.0);
            layers.push(lb.build()?);
        } else {
            let mut lb = LayerBuilder::new(1, 5);
            lb.set(0, 0, mid).set(0, 1, mid).set(0, 2, -mid).set(0, 3, -mid).set(0, 4, 1.0);
            layers.push(lb.build()?);
        }
    }
    FnnBlock::new(layers)
}

/// Approximate product of `leaves` channels in `[0,1]` via a binary tree of
/// [`mult_network`] gadgets (odd channels pass through identity chains).
/// Sup error against the exact product is at most `(leaves - 1) * 2^-m`, and
/// an exactly-zero input channel forces an exactly-zero output.
pub fn product_tree(leaves: usize, m: usize) -> CoreResult<FnnBlock> {
    if leaves == 0 {
        return Err(CoreError::InvalidArgument("product tree needs at least one factor".into()));
    }
    if leaves == 1 {
        return FnnBlock::new(vec![identity_layer(1)?]);
    }
    let gadget_depth = mult_network(m)?.depth();
    let mut tree: Option<FnnBlock> = None;
    let mut width = leaves;
    while width > 1 {
        let mut level: Option<FnnBlock> = None;
        for _ in 0..width / 2 {
            let g = mult_network(m)?;
            level = Some(match level {
                None => g,
                Some(acc) => parallel_disjoint(&acc, &g)?,
            });
        }
        if width % 2 == 1 {
            let pass = identity_chain(1, gadget_depth)?;
            level = Some(parallel_disjoint(&level.unwrap(), &pass)?);
        }
        let level = level.unwrap();
        tree = Some(match tree {
            None => level,
            Some(acc) => chain_blocks(&acc, &level)?,
        });
        width = width.div_ceil(2);
    }
    Ok(tree.unwrap())
}

fn check_unit_cube_point(a: &[f64]) -> CoreResult<()> {
    if a.is_empty() {
        return Err(CoreError::InvalidArgument("center point must be nonempty".into()));
    }
    for (j, &v) in a.iter().enumerate() {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(CoreError::DomainViolation(format!(
                "center coordinate {j} = {v} lies outside the unit cube"
            )));
        }
    }
    Ok(())
}

/// Localized bump network on `[0,1]^D` centered at the grid point `a`:
/// approximates the tensor-product hinge
/// `H_a(z) = prod_j max(0, 1/m_prime - |z_j - a_j|)`
/// to sup error `(D-1) * 2^-m` and vanishes *exactly* outside the support of
/// `H_a`. Depth is `2` for `D = 1` and `2 + ceil(log2 D) * (m + 4)` otherwise;
/// width is at most `max(2D, 6)`.
pub fn hat_network(a: &[f64], m_prime: usize, m: usize, d: usize) -> CoreResult<FnnBlock> {
    check_unit_cube_point(a)?;
    if a.len() != d {
        return Err(CoreError::ShapeMismatch(format!(
            "center point has dimension {}, expected {d}",
            a.len()
        )));
    }
    if m_prime == 0 || m == 0 {
        return Err(CoreError::InvalidArgument(
            "grid resolution and accuracy exponent must be positive".into(),
        ));
    }
    let d = a.len();
    let half = 1.0 / m_prime as f64;

    // z -> (p_j, n_j) = (relu(z_j - a_j), relu(a_j - z_j))
    let mut h1 = LayerBuilder::new(2 * d, d);
    for j in 0..d {
        h1.set(j, j, 1.0).add(j, -a[j]);
        h1.set(d + j, j, -1.0).add(d + j, a[j]);
    }
    // (p, n) -> hinge factors relu(1/m_prime - p_j - n_j) in [0, 1/m_prime]
    let mut h2 = LayerBuilder::new(d, 2 * d);
    for j in 0..d {
        h2.set(j, j, -1.0).set(j, d + j, -1.0).add(j, half);
    }
    let hinges = FnnBlock::new(vec![h1.build()?, h2.build()?])?;
    if d == 1 {
        return Ok(hinges);
    }
    chain_blocks(&hinges, &product_tree(d, m)?)
}

/// Shifted-and-scaled truncated-Taylor-polynomial network on `[0,1]^D`.
///
/// Approximates `P(z)/b_scale + 1/2` clipped to `[0,1]`, where `P` is the
/// oracle's truncated Taylor polynomial around `a` (derivative orders
/// strictly below the smoothness order). The polynomial is rewritten in the
/// shifted basis `u_j = (z_j - a_j + 1)/2` in `[0,1]`; monomials of degree
/// two or more are formed by [`product_tree`]. Requires every rewritten
/// coefficient to fit the unit parameter budget after division by `b_scale`;
/// otherwise fails with a bound violation rather than clipping silently.
///
/// The caller must ensure `b_scale >= sup |P|` so the target is well-scaled;
/// derivative data is read through the oracle at `a` only.
pub fn q_network(
    oracle: &TaylorOracle,
    a: &[f64],
    b_scale: f64,
    m: usize,
) -> CoreResult<FnnBlock> {
    check_unit_cube_point(a)?;
    let d = oracle.dim();
    if a.len() != d {
        return Err(CoreError::ShapeMismatch(format!(
            "center point dimension {} does not match oracle dimension {}",
            a.len(),
            d
        )));
    }
    if m == 0 {
        return Err(CoreError::InvalidArgument(
            "accuracy exponent must be positive".into(),
        ));
    }
    if !b_scale.is_finite() || b_scale < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "coefficient scale must be finite and nonnegative, got {b_scale}"
        )));
    }

    let indices = multi_indices_below(d, oracle.beta());
    // Taylor coefficients around `a`, then the same polynomial in the
    // shifted basis: z - a = 2u - 1, so
    // (z-a)^alpha = prod_j (2u_j - 1)^alpha_j expands over gamma <= alpha
    // with weight binom(alpha_j, gamma_j) 2^gamma_j (-1)^(alpha_j-gamma_j).
    let mut coeffs = Vec::with_capacity(indices.len());
    for alpha in &indices {
        coeffs.push(oracle.partial(alpha, a)? / multi_factorial(alpha));
    }
    let mut shifted = vec![0.0; indices.len()];
    for (gi, gamma) in indices.iter().enumerate() {
        let mut acc = 0.0;
        for (ai, alpha) in indices.iter().enumerate() {
            if gamma.iter().zip(alpha).any(|(g, al)| g > al) {
                continue;
            }
            let mut factor = 1.0;
            for (&g, &al) in gamma.iter().zip(alpha) {
                factor *= binomial(al, g)
                    * 2f64.powi(g as i32)
                    * if (al - g) % 2 == 0 { 1.0 } else { -1.0 };
            }
            acc += coeffs[ai] * factor;
        }
        shifted[gi] = acc;
    }

    let tol = 1e-12;
    let unit_weight = |value: f64, gamma: &[usize]| -> CoreResult<f64> {
        if b_scale == 0.0 {
            if value.abs() <= tol {
                return Ok(0.0);
            }
            return Err(CoreError::BoundViolation(format!(
                "zero coefficient scale but nonzero polynomial coefficient {value} at {gamma:?}"
            )));
        }
        let w = value / b_scale;
        if w.abs() > 1.0 + tol {
            return Err(CoreError::BoundViolation(format!(
                "polynomial coefficient {value} at {gamma:?} exceeds the unit parameter \
                 budget after scaling by {b_scale}"
            )));
        }
        Ok(w.clamp(-1.0, 1.0))
    };

    // first layer: u_j = relu(z_j/2 + (1 - a_j)/2) plus two constant-one
    // channels (the half-shift splits across them to keep weights <= 3/4)
    let mut q1 = LayerBuilder::new(d + 2, d);
    for j in 0..d {
        q1.set(j, j, 0.5).add(j, (1.0 - a[j]) / 2.0);
    }
    q1.add(d, 1.0);
    q1.add(d + 1, 1.0);
    let mut body = FnnBlock::new(vec![q1.build()?])?;

    // monomials of degree >= 2 go through product trees in parallel with an
    // identity passthrough of the u- and constant channels
    let tree_indices: Vec<usize> = indices
        .iter()
        .enumerate()
        .filter(|(_, g)| g.iter().sum::<usize>() >= 2)
        .map(|(i, _)| i)
        .collect();
    if !tree_indices.is_empty() {
        let mut branches = Vec::with_capacity(tree_indices.len());
        let mut max_depth = 0usize;
        for &gi in &tree_indices {
            let gamma = &indices[gi];
            let order: usize = gamma.iter().sum();
            let mut selector = LayerBuilder::new(order, d + 2);
            let mut row = 0;
            for (j, &g) in gamma.iter().enumerate() {
                for _ in 0..g {
                    selector.set(row, j, 1.0);
                    row += 1;
                }
            }
            let branch =
                chain_blocks(&FnnBlock::new(vec![selector.build()?])?, &product_tree(order, m)?)?;
            max_depth = max_depth.max(branch.depth());
            branches.push(branch);
        }
        let mut stage = identity_chain(d + 2, max_depth)?;
        for branch in &branches {
            stage = parallel_shared(&pad_to_depth(branch, max_depth)?, &stage)?;
        }
        body = chain_blocks(&body, &stage)?;
    }

    // combination layer: tree outputs first (in tree_indices order), then
    // u-channels, then the two constant channels
    let n_trees = tree_indices.len();
    let mut combine = LayerBuilder::new(1, n_trees + d + 2);
    for (slot, &gi) in tree_indices.iter().enumerate() {
        combine.set(0, slot, unit_weight(shifted[gi], &indices[gi])?);
    }
    for (gi, gamma) in indices.iter().enumerate() {
        if gamma.iter().sum::<usize>() == 1 {
            let j = gamma.iter().position(|&g| g == 1).unwrap();
            combine.set(0, n_trees + j, unit_weight(shifted[gi], gamma)?);
        }
    }
    let zero_gi = indices.iter().position(|g| g.iter().all(|&v| v == 0)).unwrap();
    let w_const = (unit_weight(shifted[zero_gi], &indices[zero_gi])? + 0.5) / 2.0;
    combine.set(0, n_trees + d, w_const);
    combine.set(0, n_trees + d + 1, w_const);
    body = chain_blocks(&body, &FnnBlock::new(vec![combine.build()?])?)?;

    // clamp to [0,1]: y >= 0 after the rectifier; min(y, 1) = y - relu(y - 1)
    let mut c1 = LayerBuilder::new(2, 1);
    c1.set(0, 0, 1.0);
    c1.set(1, 0, 1.0).add(1, -1.0);
    let mut c2 = LayerBuilder::new(1, 2);
    c2.set(0, 0, 1.0).set(0, 1, -1.0);
    chain_blocks(&body, &FnnBlock::new(vec![c1.build()?, c2.build()?])?)
}
