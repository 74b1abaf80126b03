//! One-dimensional multi-channel signals, convolution filters, dense affine
//! read-outs, and the layer primitives every network in this crate is built
//! from.
//!
//! Convolutions are stride-one. In the default one-sided padding mode the
//! output at spatial index `beta` (0-based) is
//!
//! ```text
//! y[beta][j] = sum_{t=0..K-1} sum_{i} w[t][j][i] * x[beta + t][i]
//! ```
//!
//! where positions `beta + t` past the end of the signal contribute zero; the
//! signal keeps its length. An equal-padding mode (centered taps, restricted
//! to `K <= floor(D/2)`) is available behind [`PaddingMode`]. Layers subtract
//! their bias: a convolution layer computes `sigma(L_w(x) - 1_D (x) b)` and a
//! dense layer computes `sigma(W vec(x) - b)`, with `vec` flattening
//! spatial-major (all channels of spatial index 0, then index 1, ...).

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};

/// Entrywise activation used by layer primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
    Identity,
}

impl Activation {
    /// Applies the activation to one scalar.
    #[inline]
    #[must_use]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if v > 0.0 {
                    v
                } else {
                    0.0
                }
            }
            Activation::Identity => v,
        }
    }
}

/// Padding convention for convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PaddingMode {
    /// Taps read forward from the output position; zeros past the end.
    OneSided,
    /// Taps are centered (left offset `floor((K-1)/2)`); zeros on both ends.
    /// Only admissible when `K <= floor(D/2)`.
    Equal,
}

/// A `D x C` grid of finite scalars: `C` channels sampled at `D` spatial
/// positions, stored spatial-major (`data[alpha * C + i]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    data: Vec<f64>,
    len: usize,
    channels: usize,
}

impl Signal {
    /// Builds a signal from spatial-major data.
    pub fn new(data: Vec<f64>, len: usize, channels: usize) -> CoreResult<Self> {
        if data.len() != len * channels {
            return Err(CoreError::ShapeMismatch(format!(
                "signal data length {} does not equal len {} * channels {}",
                data.len(),
                len,
                channels
            )));
        }
        if len == 0 || channels == 0 {
            return Err(CoreError::InvalidArgument(
                "signal length and channel count must be positive".into(),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NumericGuard("signal contains a non-finite entry".into()));
        }
        Ok(Self { data, len, channels })
    }

    /// All-zero signal of the given shape.
    #[must_use]
    pub fn zeros(len: usize, channels: usize) -> Self {
        Self { data: vec![0.0; len * channels], len, channels }
    }

    /// Single-channel signal from a plain vector.
    pub fn from_vector(x: &[f64]) -> CoreResult<Self> {
        Self::new(x.to_vec(), x.len(), 1)
    }

    /// Number of spatial positions.
    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the signal has no entries (never for constructed signals).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of channels.
    #[must_use]
    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Entry at spatial index `alpha`, channel `i`.
    #[inline]
    #[must_use]
    pub fn get(&self, alpha: usize, i: usize) -> f64 {
        self.data[alpha * self.channels + i]
    }

    /// Sets the entry at spatial index `alpha`, channel `i`.
    #[inline]
    pub fn set(&mut self, alpha: usize, i: usize, v: f64) {
        self.data[alpha * self.channels + i] = v;
    }

    /// Spatial-major flattening; the order used by every dense read-out.
    #[must_use]
    pub fn vec_flatten(&self) -> &[f64] {
        &self.data
    }

    /// Entrywise sup norm.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// A `K x C_out x C_in` convolution filter, stored as
/// `taps[(t * c_out + j) * c_in + i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvFilter {
    taps: Vec<f64>,
    k: usize,
    c_out: usize,
    c_in: usize,
}

impl ConvFilter {
    /// Builds a filter from tap-major data.
    pub fn new(taps: Vec<f64>, k: usize, c_out: usize, c_in: usize) -> CoreResult<Self> {
        if taps.len() != k * c_out * c_in {
            return Err(CoreError::ShapeMismatch(format!(
                "filter data length {} does not equal K {} * C_out {} * C_in {}",
                taps.len(),
                k,
                c_out,
                c_in
            )));
        }
        if k == 0 || c_out == 0 || c_in == 0 {
            return Err(CoreError::InvalidArgument(
                "filter size and channel counts must be positive".into(),
            ));
        }
        if taps.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NumericGuard("filter contains a non-finite entry".into()));
        }
        Ok(Self { taps, k, c_out, c_in })
    }

    /// All-zero filter of the given shape.
    #[must_use]
    pub fn zeros(k: usize, c_out: usize, c_in: usize) -> Self {
        Self { taps: vec![0.0; k * c_out * c_in], k, c_out, c_in }
    }

    /// Filter size (number of taps).
    #[must_use]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Output channel count.
    #[must_use]
    pub fn c_out(&self) -> usize {
        self.c_out
    }

    /// Input channel count.
    #[must_use]
    pub fn c_in(&self) -> usize {
        self.c_in
    }

    /// Tap at offset `t`, output channel `j`, input channel `i`.
    #[inline]
    #[must_use]
    pub fn get(&self, t: usize, j: usize, i: usize) -> f64 {
        self.taps[(t * self.c_out + j) * self.c_in + i]
    }

    /// Sets the tap at offset `t`, output channel `j`, input channel `i`.
    #[inline]
    pub fn set(&mut self, t: usize, j: usize, i: usize, v: f64) {
        self.taps[(t * self.c_out + j) * self.c_in + i] = v;
    }

    /// Entrywise sup norm of the taps.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.taps.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Raw taps, tap-major.
    #[must_use]
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Mutable raw taps, tap-major.
    pub fn taps_mut(&mut self) -> &mut [f64] {
        &mut self.taps
    }

    /// Number of parameter slots (`K * C_out * C_in`, zeros included).
    #[must_use]
    pub fn slot_count(&self) -> usize {
        self.taps.len()
    }
}

/// A dense affine map from a flattened `D x C` signal to `C_out` scalars,
/// applied as `sigma(W vec(x) - b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseAffine {
    weight: Vec<f64>,
    bias: Vec<f64>,
    c_out: usize,
    n_in: usize,
}

impl DenseAffine {
    /// Builds the map from a row-major `c_out x n_in` weight matrix.
    pub fn new(weight: Vec<f64>, bias: Vec<f64>, c_out: usize, n_in: usize) -> CoreResult<Self> {
        if weight.len() != c_out * n_in || bias.len() != c_out {
            return Err(CoreError::ShapeMismatch(format!(
                "dense affine shapes: weight {} vs {}x{}, bias {} vs {}",
                weight.len(),
                c_out,
                n_in,
                bias.len(),
                c_out
            )));
        }
        if weight.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(CoreError::NumericGuard("dense affine contains a non-finite entry".into()));
        }
        Ok(Self { weight, bias, c_out, n_in })
    }

    /// All-zero map of the given shape.
    #[must_use]
    pub fn zeros(c_out: usize, n_in: usize) -> Self {
        Self { weight: vec![0.0; c_out * n_in], bias: vec![0.0; c_out], c_out, n_in }
    }

    /// Output dimension.
    #[must_use]
    pub fn c_out(&self) -> usize {
        self.c_out
    }

    /// Input dimension (`D * C` of the consumed signal).
    #[must_use]
    pub fn n_in(&self) -> usize {
        self.n_in
    }

    /// Weight entry at row `r`, column `c`.
    #[inline]
    #[must_use]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.weight[r * self.n_in + c]
    }

    /// Sets the weight entry at row `r`, column `c`.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.weight[r * self.n_in + c] = v;
    }

    /// Bias vector.
    #[must_use]
    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Mutable bias vector.
    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// Row-major weights.
    #[must_use]
    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// Mutable row-major weights.
    pub fn weight_mut(&mut self) -> &mut [f64] {
        &mut self.weight
    }

    /// Sup norm over weights and biases.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.weight.iter().chain(self.bias.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of parameter slots including zeros (`c_out * n_in + c_out`).
    #[must_use]
    pub fn slot_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

/// Applies the linear convolution operator in the given padding mode.
pub fn conv_apply_padded(w: &ConvFilter, x: &Signal, mode: PaddingMode) -> CoreResult<Signal> {
    if w.c_in() != x.channels() {
        return Err(CoreError::ShapeMismatch(format!(
            "filter expects {} input channels, signal has {}",
            w.c_in(),
            x.channels()
        )));
    }
    let d = x.len();
    let offset = match mode {
        PaddingMode::OneSided => 0usize,
        PaddingMode::Equal => {
            if w.k() > d / 2 {
                return Err(CoreError::InvalidArgument(format!(
                    "equal padding requires K <= floor(D/2); got K={} D={}",
                    w.k(),
                    d
                )));
            }
            (w.k() - 1) / 2
        }
    };
    let mut y = Signal::zeros(d, w.c_out());
    for beta in 0..d {
        for j in 0..w.c_out() {
            let mut acc = 0.0;
            for t in 0..w.k() {
                let pos = beta + t;
                if pos < offset {
                    continue;
                }
                let alpha = pos - offset;
                if alpha >= d {
                    break;
                }
                for i in 0..w.c_in() {
                    acc += w.get(t, j, i) * x.get(alpha, i);
                }
            }
            y.set(beta, j, acc);
        }
    }
    Ok(y)
}

/// Applies the linear convolution operator with one-sided padding.
pub fn conv_apply(w: &ConvFilter, x: &Signal) -> CoreResult<Signal> {
    conv_apply_padded(w, x, PaddingMode::OneSided)
}

/// One convolution layer: `sigma(L_w(x) - 1_D (x) b)` in the given mode.
pub fn conv_layer_padded(
    w: &ConvFilter,
    b: &[f64],
    sigma: Activation,
    x: &Signal,
    mode: PaddingMode,
) -> CoreResult<Signal> {
    if b.len() != w.c_out() {
        return Err(CoreError::ShapeMismatch(format!(
            "bias length {} does not match filter output channels {}",
            b.len(),
            w.c_out()
        )));
    }
    let mut y = conv_apply_padded(w, x, mode)?;
    for beta in 0..y.len() {
        for j in 0..y.channels() {
            let v = y.get(beta, j) - b[j];
            y.set(beta, j, sigma.apply(v));
        }
    }
    Ok(y)
}

/// One convolution layer with one-sided padding.
pub fn conv_layer(w: &ConvFilter, b: &[f64], sigma: Activation, x: &Signal) -> CoreResult<Signal> {
    conv_layer_padded(w, b, sigma, x, PaddingMode::OneSided)
}

/// One dense layer on a flattened signal: `sigma(W vec(x) - b)`.
pub fn fc_layer(a: &DenseAffine, sigma: Activation, x: &Signal) -> CoreResult<Vec<f64>> {
    let v = x.vec_flatten();
    if a.n_in() != v.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "dense layer expects input length {}, signal flattens to {}",
            a.n_in(),
            v.len()
        )));
    }
    let mut out = Vec::with_capacity(a.c_out());
    for r in 0..a.c_out() {
        let mut acc = 0.0;
        for c in 0..a.n_in() {
            acc += a.get(r, c) * v[c];
        }
        out.push(sigma.apply(acc - a.bias()[r]));
    }
    Ok(out)
}

/// Certified upper bound `C_in * K * max|w|` on the sup-norm operator norm of
/// the convolution `L_w`.
#[must_use]
pub fn op_norm_bound(w: &ConvFilter) -> f64 {
    (w.c_in() * w.k()) as f64 * w.sup_norm()
}

/// Sup norm of a plain vector.
#[must_use]
pub fn sup_norm_vec(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Number of nonzero entries of a plain vector.
#[must_use]
pub fn nnz(v: &[f64]) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn sig(values: &[f64]) -> Signal {
        Signal::from_vector(values).unwrap()
    }

    /// Independent oracle: materialize the order-4 tensor
    /// `T[(beta,j),(alpha,i)] = w[alpha-beta][j][i]` (0 <= alpha-beta <= K-1)
    /// as a dense matrix and multiply.
    fn conv_oracle(w: &ConvFilter, x: &Signal) -> Signal {
        let d = x.len();
        let (co, ci) = (w.c_out(), w.c_in());
        let mut t = vec![0.0; (d * co) * (d * ci)];
        for beta in 0..d {
            for j in 0..co {
                for alpha in 0..d {
                    for i in 0..ci {
                        if alpha >= beta && alpha - beta < w.k() {
                            t[(beta * co + j) * (d * ci) + (alpha * ci + i)] =
                                w.get(alpha - beta, j, i);
                        }
                    }
                }
            }
        }
        let v = x.vec_flatten();
        let mut y = Signal::zeros(d, co);
        for beta in 0..d {
            for j in 0..co {
                let row = beta * co + j;
                let mut acc = 0.0;
                for col in 0..d * ci {
                    acc += t[row * (d * ci) + col] * v[col];
                }
                y.set(beta, j, acc);
            }
        }
        y
    }

    fn random_filter(rng: &mut impl Rng, k: usize, co: usize, ci: usize, scale: f64) -> ConvFilter {
        let taps = (0..k * co * ci).map(|_| rng.gen_range(-scale..=scale)).collect();
        ConvFilter::new(taps, k, co, ci).unwrap()
    }

    fn random_signal(rng: &mut impl Rng, d: usize, c: usize, scale: f64) -> Signal {
        let data = (0..d * c).map(|_| rng.gen_range(-scale..=scale)).collect();
        Signal::new(data, d, c).unwrap()
    }

    #[test]
    fn conv_identity_filter_preserves_signal() {
        let w = ConvFilter::new(vec![1.0, 0.0], 2, 1, 1).unwrap();
        let x = sig(&[0.3, -1.0, 0.7]);
        let y = conv_apply(&w, &x).unwrap();
        assert_eq!(y.vec_flatten(), x.vec_flatten());
    }

    #[test]
    fn conv_left_translation() {
        let w = ConvFilter::new(vec![0.0, 1.0], 2, 1, 1).unwrap();
        let x = sig(&[1.0, 2.0, 3.0]);
        let y = conv_apply(&w, &x).unwrap();
        assert_eq!(y.vec_flatten(), &[2.0, 3.0, 0.0]);
    }

    #[test]
    fn conv_two_point_signal_truncates_tail() {
        // w = [a, b] on x = (x1, x2) gives (a x1 + b x2, a x2).
        let (a, b) = (0.8, -0.4);
        let w = ConvFilter::new(vec![a, b], 2, 1, 1).unwrap();
        let x = sig(&[0.5, 2.0]);
        let y = conv_apply(&w, &x).unwrap();
        assert!((y.get(0, 0) - (a * 0.5 + b * 2.0)).abs() < 1e-15);
        assert!((y.get(1, 0) - a * 2.0).abs() < 1e-15);
    }

    #[test]
    fn conv_layer_identity_activation_zero_bias_is_linear_map() {
        let w = ConvFilter::new(vec![1.0, 0.0], 2, 1, 1).unwrap();
        let x = sig(&[2.0, 0.5, -1.0]);
        let y = conv_layer(&w, &[0.0], Activation::Identity, &x).unwrap();
        assert_eq!(y.vec_flatten(), x.vec_flatten());
    }

    #[test]
    fn conv_layer_subtracts_bias_then_rectifies() {
        let w = ConvFilter::new(vec![1.0, 0.0], 2, 1, 1).unwrap();
        let x = sig(&[2.0, 0.5, -1.0]);
        let y = conv_layer(&w, &[1.0], Activation::ReLU, &x).unwrap();
        assert_eq!(y.vec_flatten(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn conv_layer_shift_then_rectify() {
        let w = ConvFilter::new(vec![0.0, 1.0], 2, 1, 1).unwrap();
        let x = sig(&[-1.0, 2.0, -3.0]);
        let y = conv_layer(&w, &[0.0], Activation::ReLU, &x).unwrap();
        assert_eq!(y.vec_flatten(), &[2.0, 0.0, 0.0]);
    }

    #[test]
    fn fc_selector_reads_first_entry() {
        let mut a = DenseAffine::zeros(1, 6);
        a.set(0, 0, 1.0); // spatial 0, channel 0 of a 3x2 signal
        let x = Signal::new(vec![0.9, -0.1, 0.2, 0.3, 0.4, 0.5], 3, 2).unwrap();
        let y = fc_layer(&a, Activation::Identity, &x).unwrap();
        assert_eq!(y, vec![0.9]);
    }

    #[test]
    fn fc_zero_weights_return_negated_bias() {
        let a = DenseAffine::new(vec![0.0, 0.0], vec![0.25], 1, 2).unwrap();
        let x = sig(&[5.0, -7.0]);
        let y = fc_layer(&a, Activation::Identity, &x).unwrap();
        assert_eq!(y, vec![-0.25]);
    }

    #[test]
    fn fc_matches_brute_force_matvec() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let x = random_signal(&mut rng, 2, 2, 1.0);
        let weight: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let bias: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let a = DenseAffine::new(weight.clone(), bias.clone(), 2, 4).unwrap();
        let y = fc_layer(&a, Activation::Identity, &x).unwrap();
        let v = x.vec_flatten();
        for r in 0..2 {
            let mut acc = 0.0;
            for c in 0..4 {
                acc += weight[r * 4 + c] * v[c];
            }
            assert!((y[r] - (acc - bias[r])).abs() < 1e-12);
        }
    }

    #[test]
    fn op_norm_bound_examples() {
        let w = ConvFilter::new(vec![1.0, 0.0], 2, 1, 1).unwrap();
        assert_eq!(op_norm_bound(&w), 2.0);
        assert_eq!(op_norm_bound(&ConvFilter::zeros(3, 2, 2)), 0.0);
        let mut w = ConvFilter::zeros(3, 1, 2);
        w.set(1, 0, 1, 0.5);
        assert_eq!(op_norm_bound(&w), 3.0);
    }

    #[test]
    fn equal_padding_centers_taps() {
        // K=2 on D=4: offset floor((K-1)/2) = 0, same as one-sided here.
        let w = ConvFilter::new(vec![1.0, 0.0], 2, 1, 1).unwrap();
        let x = sig(&[1.0, 2.0, 3.0, 4.0]);
        let y = conv_apply_padded(&w, &x, PaddingMode::Equal).unwrap();
        assert_eq!(y.vec_flatten(), x.vec_flatten());
        // K=3 on D=6: offset 1; identity tap at t=1 reproduces the signal.
        let mut w = ConvFilter::zeros(3, 1, 1);
        w.set(1, 0, 0, 1.0);
        let x = sig(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y = conv_apply_padded(&w, &x, PaddingMode::Equal).unwrap();
        assert_eq!(y.vec_flatten(), x.vec_flatten());
    }

    #[test]
    fn equal_padding_rejects_large_filters() {
        let w = ConvFilter::zeros(3, 1, 1);
        let x = sig(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(matches!(
            conv_apply_padded(&w, &x, PaddingMode::Equal),
            Err(CoreError::InvalidArgument(_))
        ));
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(Signal::new(vec![f64::NAN], 1, 1).is_err());
        assert!(ConvFilter::new(vec![f64::INFINITY], 1, 1, 1).is_err());
        assert!(DenseAffine::new(vec![1.0], vec![f64::NAN], 1, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conv_matches_dense_tensor_oracle(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=8);
            let k = rng.gen_range(1..=d);
            let ci = rng.gen_range(1..=4);
            let co = rng.gen_range(1..=4);
            let w = random_filter(&mut rng, k, co, ci, 1.0);
            let x = random_signal(&mut rng, d, ci, 1.0);
            let mine = conv_apply(&w, &x).unwrap();
            let oracle = conv_oracle(&w, &x);
            // Same summation order (ascending input position, channel inner):
            // exact equality is required.
            for beta in 0..d {
                for j in 0..co {
                    prop_assert!(mine.get(beta, j) == oracle.get(beta, j));
                }
            }
        }

        #[test]
        fn conv_is_linear(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=8);
            let k = rng.gen_range(1..=d);
            let ci = rng.gen_range(1..=3);
            let w = random_filter(&mut rng, k, 2, ci, 1.0);
            let x = random_signal(&mut rng, d, ci, 1.0);
            let y = random_signal(&mut rng, d, ci, 1.0);
            let (a, b) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
            let mut combo = Signal::zeros(d, ci);
            for alpha in 0..d {
                for i in 0..ci {
                    combo.set(alpha, i, a * x.get(alpha, i) + b * y.get(alpha, i));
                }
            }
            let lhs = conv_apply(&w, &combo).unwrap();
            let fx = conv_apply(&w, &x).unwrap();
            let fy = conv_apply(&w, &y).unwrap();
            for beta in 0..d {
                for j in 0..2 {
                    let rhs = a * fx.get(beta, j) + b * fy.get(beta, j);
                    let scale = 1.0 + rhs.abs();
                    prop_assert!((lhs.get(beta, j) - rhs).abs() <= 1e-12 * scale);
                }
            }
        }

        #[test]
        fn op_norm_bound_dominates(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=8);
            let k = rng.gen_range(1..=d);
            let ci = rng.gen_range(1..=4);
            let w = random_filter(&mut rng, k, 3, ci, 2.0);
            let bound = op_norm_bound(&w);
            for _ in 0..10 {
                // unit-sup-norm signal
                let mut x = random_signal(&mut rng, d, ci, 1.0);
                let s = x.sup_norm();
                if s > 0.0 {
                    let data: Vec<f64> = x.vec_flatten().iter().map(|v| v / s).collect();
                    x = Signal::new(data, d, ci).unwrap();
                }
                let y = conv_apply(&w, &x).unwrap();
                prop_assert!(y.sup_norm() <= bound + 1e-12);
            }
        }

        #[test]
        fn conv_layer_sup_and_lipschitz_bounds(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=8);
            let k = rng.gen_range(1..=d);
            let ci = rng.gen_range(1..=3);
            let co = rng.gen_range(1..=3);
            let w = random_filter(&mut rng, k, co, ci, 1.5);
            let b: Vec<f64> = (0..co).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let x = random_signal(&mut rng, d, ci, 1.5);
            let x2 = random_signal(&mut rng, d, ci, 1.5);
            for sigma in [Activation::ReLU, Activation::Identity] {
                let y = conv_layer(&w, &b, sigma, &x).unwrap();
                let y2 = conv_layer(&w, &b, sigma, &x2).unwrap();
                let sup_bound = op_norm_bound(&w) * x.sup_norm() + sup_norm_vec(&b);
                prop_assert!(y.sup_norm() <= sup_bound + 1e-12);
                let mut diff: f64 = 0.0;
                let mut dx: f64 = 0.0;
                for beta in 0..d {
                    for j in 0..co {
                        diff = diff.max((y.get(beta, j) - y2.get(beta, j)).abs());
                    }
                    for i in 0..ci {
                        dx = dx.max((x.get(beta, i) - x2.get(beta, i)).abs());
                    }
                }
                prop_assert!(diff <= op_norm_bound(&w) * dx + 1e-12);
            }
        }

        #[test]
        fn parameter_perturbation_bounds(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=8);
            let k = rng.gen_range(1..=d);
            let ci = rng.gen_range(1..=3);
            let co = rng.gen_range(1..=3);
            let w = random_filter(&mut rng, k, co, ci, 1.0);
            let w2 = random_filter(&mut rng, k, co, ci, 1.0);
            let b: Vec<f64> = (0..co).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let b2: Vec<f64> = (0..co).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let x = random_signal(&mut rng, d, ci, 1.0);
            let mut dw = w.clone();
            for (t, s) in dw.taps_mut().iter_mut().zip(w2.taps()) {
                *t -= s;
            }
            let db: Vec<f64> = b.iter().zip(&b2).map(|(u, v)| u - v).collect();
            for sigma in [Activation::ReLU, Activation::Identity] {
                let y = conv_layer(&w, &b, sigma, &x).unwrap();
                let y2 = conv_layer(&w2, &b2, sigma, &x).unwrap();
                let mut diff: f64 = 0.0;
                for beta in 0..d {
                    for j in 0..co {
                        diff = diff.max((y.get(beta, j) - y2.get(beta, j)).abs());
                    }
                }
                let bound = op_norm_bound(&dw) * x.sup_norm() + sup_norm_vec(&db);
                prop_assert!(diff <= bound + 1e-12);
            }
        }

        #[test]
        fn dense_layer_sparse_bounds(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=4);
            let c = rng.gen_range(1..=3);
            let n = d * c;
            let co = rng.gen_range(1..=3);
            // sparse weights: zero out a random subset
            let mut weight: Vec<f64> = (0..co * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            for v in weight.iter_mut() {
                if rng.gen_bool(0.5) {
                    *v = 0.0;
                }
            }
            let mut weight2 = weight.clone();
            for v in weight2.iter_mut() {
                if rng.gen_bool(0.3) {
                    *v += rng.gen_range(-0.5..=0.5);
                }
            }
            let bias: Vec<f64> = (0..co).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let bias2: Vec<f64> = (0..co).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let a = DenseAffine::new(weight.clone(), bias.clone(), co, n).unwrap();
            let a2 = DenseAffine::new(weight2.clone(), bias2.clone(), co, n).unwrap();
            let x = random_signal(&mut rng, d, c, 1.0);
            let x2 = random_signal(&mut rng, d, c, 1.0);
            for sigma in [Activation::ReLU, Activation::Identity] {
                let y = fc_layer(&a, sigma, &x).unwrap();
                let yx2 = fc_layer(&a, sigma, &x2).unwrap();
                let y2 = fc_layer(&a2, sigma, &x).unwrap();
                let w0 = nnz(&weight) as f64;
                let w20 = nnz(&weight2) as f64;
                let wsup = sup_norm_vec(&weight);
                // sup bound
                prop_assert!(
                    sup_norm_vec(&y) <= w0 * wsup * x.sup_norm() + sup_norm_vec(&bias) + 1e-12
                );
                // Lipschitz in the input
                let mut dx: f64 = 0.0;
                for (u, v) in x.vec_flatten().iter().zip(x2.vec_flatten()) {
                    dx = dx.max((u - v).abs());
                }
                let mut dy: f64 = 0.0;
                for (u, v) in y.iter().zip(&yx2) {
                    dy = dy.max((u - v).abs());
                }
                prop_assert!(dy <= w0 * wsup * dx + 1e-12);
                // parameter perturbation
                let dwsup = weight
                    .iter()
                    .zip(&weight2)
                    .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
                let dbsup = bias
                    .iter()
                    .zip(&bias2)
                    .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
                let mut dp: f64 = 0.0;
                for (u, v) in y.iter().zip(&y2) {
                    dp = dp.max((u - v).abs());
                }
                prop_assert!(dp <= (w0 + w20) * dwsup * x.sup_norm() + dbsup + 1e-12);
            }
        }
    }
}
