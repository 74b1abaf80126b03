//! Synthetic regression data: i.i.d. uniform inputs on the cube with
//! Gaussian-corrupted targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::approx::SmoothFn;
use crate::error::{CoreError, CoreResult};

/// A synthetic regression sample `(X_n, Y_n)_{n<N}` with
/// `Y = f(X) + noise`, `X` i.i.d. uniform on `[-1,1]^D`, together with the
/// generating metadata (noise level, seed, target name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    noise_sigma: f64,
    seed: u64,
    target_name: String,
}

impl RegressionDataset {
    /// Validates and wraps raw points: at least one point, every input inside
    /// `[-1,1]^D` with a common dimension, everything finite.
    pub fn new(
        inputs: Vec<Vec<f64>>,
        targets: Vec<f64>,
        noise_sigma: f64,
        seed: u64,
        target_name: String,
    ) -> CoreResult<Self> {
        if inputs.is_empty() {
            return Err(CoreError::InvalidArgument("dataset needs at least one point".into()));
        }
        if inputs.len() != targets.len() {
            return Err(CoreError::ShapeMismatch(format!(
                "{} inputs vs {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let dim = inputs[0].len();
        if dim == 0 {
            return Err(CoreError::InvalidArgument("input dimension must be positive".into()));
        }
        for (n, x) in inputs.iter().enumerate() {
            if x.len() != dim {
                return Err(CoreError::ShapeMismatch(format!(
                    "input {} has dimension {}, expected {}",
                    n,
                    x.len(),
                    dim
                )));
            }
            if x.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
                return Err(CoreError::DomainViolation(format!(
                    "input {n} leaves [-1,1]^{dim}"
                )));
            }
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NumericGuard("dataset has a non-finite target".into()));
        }
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "noise level must be nonnegative, got {noise_sigma}"
            )));
        }
        Ok(Self { inputs, targets, noise_sigma, seed, target_name })
    }

    /// Number of points `N`.
    #[must_use]
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    /// True when empty (unreachable for validated datasets).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Input dimension `D`.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    /// Input points.
    #[must_use]
    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    /// Target values.
    #[must_use]
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Noise level used at generation time.
    #[must_use]
    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// Generating seed.
    #[must_use]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Name of the generating target function.
    #[must_use]
    pub fn target_name(&self) -> &str {
        &self.target_name
    }
}

/// Draws `n` points `X` i.i.d. uniform on `[-1,1]^dim` and targets
/// `Y = f(X) + sigma * Z`, `Z` standard normal. Deterministic per seed; with
/// `sigma == 0` the targets equal `f(X)` exactly (no noise draw is made).
pub fn gen_data(
    f: &dyn SmoothFn,
    dim: usize,
    n: usize,
    sigma: f64,
    seed: u64,
) -> CoreResult<RegressionDataset> {
    if dim != f.dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "requested dimension {} but `{}` has dimension {}",
            dim,
            f.name(),
            f.dim()
        )));
    }
    if n == 0 {
        return Err(CoreError::InvalidArgument("dataset needs at least one point".into()));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "noise level must be nonnegative, got {sigma}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let noise = if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).map_err(|e| {
            CoreError::InvalidArgument(format!("invalid noise distribution: {e}"))
        })?)
    } else {
        None
    };
    let mut inputs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut y = f.eval(&x);
        if let Some(dist) = &noise {
            y += dist.sample(&mut rng);
        }
        inputs.push(x);
        targets.push(y);
    }
    RegressionDataset::new(inputs, targets, sigma, seed, f.name().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::by_name;

    #[test]
    fn zero_noise_targets_equal_function_values() {
        let f = by_name("sinsin", 2).unwrap();
        let data = gen_data(f.as_ref(), 2, 64, 0.0, 7).unwrap();
        for (x, y) in data.inputs().iter().zip(data.targets()) {
            assert_eq!(*y, f.eval(x));
        }
    }

    #[test]
    fn same_seed_reproduces_dataset_bit_for_bit() {
        let f = by_name("quadratic", 3).unwrap();
        let a = gen_data(f.as_ref(), 3, 200, 0.3, 11).unwrap();
        let b = gen_data(f.as_ref(), 3, 200, 0.3, 11).unwrap();
        assert_eq!(a, b);
        let c = gen_data(f.as_ref(), 3, 200, 0.3, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn inputs_stay_inside_the_cube() {
        let f = by_name("affine", 4).unwrap();
        let data = gen_data(f.as_ref(), 4, 500, 1.0, 3).unwrap();
        assert_eq!(data.len(), 500);
        assert_eq!(data.dim(), 4);
        for x in data.inputs() {
            assert!(x.iter().all(|v| v.abs() <= 1.0));
        }
        assert_eq!(data.target_name(), "affine");
        assert_eq!(data.noise_sigma(), 1.0);
        assert_eq!(data.seed(), 3);
    }

    #[test]
    fn noise_sample_variance_matches_sigma_squared() {
        let f = by_name("constant", 2).unwrap();
        let sigma = 0.5;
        let n = 100_000;
        let data = gen_data(f.as_ref(), 2, n, sigma, 99).unwrap();
        let residuals: Vec<f64> = data
            .inputs()
            .iter()
            .zip(data.targets())
            .map(|(x, y)| y - f.eval(x))
            .collect();
        let mean = residuals.iter().sum::<f64>() / n as f64;
        let var =
            residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n as f64 - 1.0);
        let rel = (var - sigma * sigma).abs() / (sigma * sigma);
        assert!(rel < 0.10, "sample variance {var} deviates {rel:.4} from {}", sigma * sigma);
    }

    #[test]
    fn constructor_rejects_malformed_data() {
        assert!(RegressionDataset::new(vec![], vec![], 0.1, 0, "zero".into()).is_err());
        assert!(RegressionDataset::new(
            vec![vec![0.5], vec![1.5]],
            vec![0.0, 0.0],
            0.1,
            0,
            "zero".into()
        )
        .is_err());
        assert!(RegressionDataset::new(
            vec![vec![0.5], vec![0.5, 0.0]],
            vec![0.0, 0.0],
            0.1,
            0,
            "zero".into()
        )
        .is_err());
        assert!(
            RegressionDataset::new(vec![vec![0.5]], vec![f64::NAN], 0.1, 0, "zero".into()).is_err()
        );
        assert!(
            RegressionDataset::new(vec![vec![0.5]], vec![0.0], -0.1, 0, "zero".into()).is_err()
        );
        let f = by_name("sinpi", 1).unwrap();
        assert!(gen_data(f.as_ref(), 2, 10, 0.1, 0).is_err());
        assert!(gen_data(f.as_ref(), 1, 0, 0.1, 0).is_err());
        assert!(gen_data(f.as_ref(), 1, 10, f64::NAN, 0).is_err());
    }
}
