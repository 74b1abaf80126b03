//! Ridge-sum approximators: normalized ridge lists, their realization as
//! block-sparse networks, and a greedy matching-pursuit fitter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::fnn::{BlockSparseFnn, FnnBlock, FnnLayer};

/// One normalized ridge term `b * relu(a . x - t)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ridge {
    /// Direction `a` with unit l1 norm.
    pub direction: Vec<f64>,
    /// Outer weight `b` with `|b| <= 1`.
    pub weight: f64,
    /// Shift `t` with `|t| <= 1`.
    pub shift: f64,
}

/// A validated list of normalized ridges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RidgeSpec {
    ridges: Vec<Ridge>,
}

const L1_TOL: f64 = 1e-9;

impl RidgeSpec {
    /// Validates every ridge: unit l1 direction norm (tolerance 1e-9),
    /// weight and shift magnitudes at most one, consistent dimensions.
    pub fn new(ridges: Vec<Ridge>) -> CoreResult<Self> {
        if ridges.is_empty() {
            return Err(CoreError::InvalidArgument("ridge list must be nonempty".into()));
        }
        let dim = ridges[0].direction.len();
        if dim == 0 {
            return Err(CoreError::InvalidArgument("ridge directions must be nonempty".into()));
        }
        for (m, r) in ridges.iter().enumerate() {
            if r.direction.len() != dim {
                return Err(CoreError::ShapeMismatch(format!(
                    "ridge {m} has dimension {}, expected {dim}",
                    r.direction.len()
                )));
            }
            if r.direction.iter().any(|v| !v.is_finite())
                || !r.weight.is_finite()
                || !r.shift.is_finite()
            {
                return Err(CoreError::NumericGuard(format!(
                    "ridge {m} contains non-finite entries"
                )));
            }
            let l1: f64 = r.direction.iter().map(|v| v.abs()).sum();
            if (l1 - 1.0).abs() > L1_TOL {
                return Err(CoreError::BoundViolation(format!(
                    "ridge {m} direction has l1 norm {l1}, expected 1"
                )));
            }
            if r.weight.abs() > 1.0 {
                return Err(CoreError::BoundViolation(format!(
                    "ridge {m} weight {} exceeds magnitude 1",
                    r.weight
                )));
            }
            if r.shift.abs() > 1.0 {
                return Err(CoreError::BoundViolation(format!(
                    "ridge {m} shift {} exceeds magnitude 1",
                    r.shift
                )));
            }
        }
        Ok(Self { ridges })
    }

    /// The validated ridges.
    #[must_use]
    pub fn ridges(&self) -> &[Ridge] {
        &self.ridges
    }

    /// Number of ridges.
    #[must_use]
    pub fn len(&self) -> usize {
        self.ridges.len()
    }

    /// Always false (construction rejects empty lists).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.ridges.is_empty()
    }

    /// Input dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.ridges[0].direction.len()
    }

    /// Direct evaluation of `(1/M) sum_m b_m relu(a_m . x - t_m)`.
    #[must_use]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let m = self.ridges.len() as f64;
        self.ridges
            .iter()
            .map(|r| {
                let dot: f64 = r.direction.iter().zip(x).map(|(a, v)| a * v).sum();
                r.weight * (dot - r.shift).max(0.0)
            })
            .sum::<f64>()
            / m
    }
}

/// Realizes the ridge sum as a block-sparse network: `M` single-layer
/// width-one blocks with weights `a_m / M` and bias `t_m / M` (positive
/// homogeneity of the rectifier moves the `1/M` inside), outer weights
/// `b_m`, declared block bound `1/M` and final bound `1`.
pub fn barron_fnn(spec: &RidgeSpec) -> CoreResult<BlockSparseFnn> {
    let dim = spec.dim();
    let m = spec.len() as f64;
    let mut blocks = Vec::with_capacity(spec.len());
    let mut final_weights = Vec::with_capacity(spec.len());
    for r in spec.ridges() {
        let weights: Vec<f64> = r.direction.iter().map(|a| a / m).collect();
        let layer = FnnLayer::new(weights, vec![r.shift / m], 1, dim)?;
        blocks.push(FnnBlock::new(vec![layer])?);
        final_weights.push(vec![r.weight]);
    }
    BlockSparseFnn::new(dim, blocks, final_weights, 0.0, 1.0 / m, 1.0)
}

/// Greedy matching pursuit: at each of `m_ridges` steps, draws
/// `candidate_budget` random normalized directions and shifts, scans outer
/// weights over a symmetric grid in `[-1,1]` (zero included, so the residual
/// sup-error on `grid` never increases), and keeps the combination that most
/// reduces it, breaking sup ties toward the larger mean-squared reduction.
/// Deterministic for a fixed seed.
pub fn fit_barron_ridges(
    target: &dyn Fn(&[f64]) -> f64,
    m_ridges: usize,
    candidate_budget: usize,
    grid: &[Vec<f64>],
    seed: u64,
) -> CoreResult<RidgeSpec> {
    if m_ridges == 0 {
        return Err(CoreError::InvalidArgument("ridge budget must be at least one".into()));
    }
    if candidate_budget == 0 {
        return Err(CoreError::InvalidArgument("candidate budget must be at least one".into()));
    }
    if grid.is_empty() {
        return Err(CoreError::InvalidArgument(
            "fitting needs a nonempty evaluation grid".into(),
        ));
    }
    let dim = grid[0].len();
    if dim == 0 || grid.iter().any(|p| p.len() != dim) {
        return Err(CoreError::ShapeMismatch(
            "evaluation grid points must share a positive dimension".into(),
        ));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let scale = 1.0 / m_ridges as f64;
    let weight_grid: Vec<f64> = (0..=20).map(|i| -1.0 + f64::from(i) / 10.0).collect();

    let mut residual: Vec<f64> = grid.iter().map(|p| target(p)).collect();
    if residual.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NumericGuard(
            "target function returned a non-finite value on the grid".into(),
        ));
    }
    let mut chosen = Vec::with_capacity(m_ridges);

    for _ in 0..m_ridges {
        // Primary criterion: residual sup-error. Ties break toward the
        // larger mean-squared reduction, so a step that cannot move the sup
        // (e.g. when several cube corners are simultaneous maximizers and a
        // single hinge plane reaches only some of them) still makes
        // progress, letting a later step lower the sup.
        let mut best: Option<(Ridge, f64, f64)> = None;
        for _ in 0..candidate_budget {
            // uniform draw, l1-normalized (resample near-zero draws)
            let mut direction: Vec<f64>;
            loop {
                direction = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let l1: f64 = direction.iter().map(|v| v.abs()).sum();
                if l1 > 1e-9 {
                    for v in &mut direction {
                        *v /= l1;
                    }
                    break;
                }
            }
            let shift = rng.gen_range(-1.0..=1.0);
            let activations: Vec<f64> = grid
                .iter()
                .map(|p| {
                    let dot: f64 = direction.iter().zip(p).map(|(a, v)| a * v).sum();
                    (dot - shift).max(0.0)
                })
                .collect();
            for &w in &weight_grid {
                let (mut sup, mut sq) = (0.0f64, 0.0f64);
                for (r, act) in residual.iter().zip(&activations) {
                    let v = (r - w * scale * act).abs();
                    sup = sup.max(v);
                    sq += v * v;
                }
                let better = match &best {
                    None => true,
                    Some((_, b_sup, b_sq)) => sup < *b_sup || (sup == *b_sup && sq < *b_sq),
                };
                if better {
                    best = Some((
                        Ridge { direction: direction.clone(), weight: w, shift },
                        sup,
                        sq,
                    ));
                }
            }
        }
        let (ridge, _, _) = best.unwrap();
        for (r, p) in residual.iter_mut().zip(grid) {
            let dot: f64 = ridge.direction.iter().zip(p).map(|(a, v)| a * v).sum();
            *r -= ridge.weight * scale * (dot - ridge.shift).max(0.0);
        }
        chosen.push(ridge);
    }
    RidgeSpec::new(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_fnn_to_cnn;
    use crate::fnn::{fnn_eval, validate_fnn};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn square_grid(n: usize) -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                pts.push(vec![
                    -1.0 + 2.0 * i as f64 / n as f64,
                    -1.0 + 2.0 * j as f64 / n as f64,
                ]);
            }
        }
        pts
    }

    #[test]
    fn spec_validation_catches_each_constraint() {
        let ok = Ridge { direction: vec![0.5, -0.5], weight: 1.0, shift: 0.0 };
        assert!(RidgeSpec::new(vec![ok.clone()]).is_ok());
        assert!(RidgeSpec::new(vec![]).is_err());
        let bad_l1 = Ridge { direction: vec![0.5, 0.6], weight: 1.0, shift: 0.0 };
        assert!(RidgeSpec::new(vec![bad_l1]).is_err());
        let bad_w = Ridge { weight: 1.2, ..ok.clone() };
        assert!(RidgeSpec::new(vec![bad_w]).is_err());
        let bad_t = Ridge { shift: -1.5, ..ok.clone() };
        assert!(RidgeSpec::new(vec![bad_t]).is_err());
        let other_dim = Ridge { direction: vec![1.0], weight: 0.5, shift: 0.5 };
        assert!(RidgeSpec::new(vec![ok, other_dim]).is_err());
    }

    #[test]
    fn single_unit_ridge_is_a_rectified_coordinate() {
        let spec = RidgeSpec::new(vec![Ridge {
            direction: vec![1.0, 0.0],
            weight: 1.0,
            shift: 0.0,
        }])
        .unwrap();
        let f = barron_fnn(&spec).unwrap();
        for x in [[-0.8, 0.3], [0.0, 1.0], [0.6, -0.9]] {
            let got = fnn_eval(&f, &x).unwrap();
            assert_eq!(got, x[0].max(0.0));
        }
    }

    #[test]
    fn opposite_ridges_cancel() {
        let a = Ridge { direction: vec![0.3, 0.7], weight: 0.8, shift: 0.2 };
        let b = Ridge { weight: -0.8, ..a.clone() };
        let f = barron_fnn(&RidgeSpec::new(vec![a, b]).unwrap()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
            assert_eq!(fnn_eval(&f, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn network_matches_the_direct_ridge_sum() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..20 {
            let dim = rng.gen_range(1..=5usize);
            let count = rng.gen_range(1..=6usize);
            let ridges: Vec<Ridge> = (0..count)
                .map(|_| {
                    let mut dir: Vec<f64> =
                        (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    let l1: f64 = dir.iter().map(|v| v.abs()).sum();
                    for v in &mut dir {
                        *v /= l1;
                    }
                    Ridge {
                        direction: dir,
                        weight: rng.gen_range(-1.0..=1.0),
                        shift: rng.gen_range(-1.0..=1.0),
                    }
                })
                .collect();
            let spec = RidgeSpec::new(ridges).unwrap();
            let f = barron_fnn(&spec).unwrap();
            for _ in 0..20 {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let got = fnn_eval(&f, &x).unwrap();
                let want = spec.eval(&x);
                assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn network_is_in_class_and_compiles_with_reciprocal_bounds() {
        let spec = RidgeSpec::new(
            (0..4)
                .map(|i| Ridge {
                    direction: vec![0.25, 0.25, -0.5],
                    weight: 0.9,
                    shift: 0.1 * f64::from(i),
                })
                .collect(),
        )
        .unwrap();
        let f = barron_fnn(&spec).unwrap();
        let report = validate_fnn(&f);
        assert!(report.pass(), "{report:?}");
        assert_eq!(f.b_bs(), 0.25);
        assert_eq!(f.b_fin(), 1.0);
        let (_, cert) = compile_fnn_to_cnn(&f, 3).unwrap();
        assert_eq!(cert.conv_norm.claimed, 0.25);
        assert_eq!(cert.fc_norm.claimed, 4.0);
    }

    #[test]
    fn fitter_reduces_a_single_ridge_target() {
        let truth = |x: &[f64]| (x[0] - 0.2).max(0.0);
        let grid = square_grid(14);
        let initial = grid.iter().map(|p| truth(p).abs()).fold(0.0f64, f64::max);
        let spec = fit_barron_ridges(&truth, 10, 1500, &grid, 42).unwrap();
        let f = barron_fnn(&spec).unwrap();
        let residual = grid
            .iter()
            .map(|p| (truth(p) - fnn_eval(&f, p).unwrap()).abs())
            .fold(0.0f64, f64::max);
        assert!(
            residual <= 0.5 * initial,
            "residual {residual} did not halve from {initial}"
        );
    }

    #[test]
    fn fitter_leaves_zero_targets_at_zero() {
        let zero = |_: &[f64]| 0.0;
        let grid = square_grid(6);
        let spec = fit_barron_ridges(&zero, 5, 50, &grid, 7).unwrap();
        for r in spec.ridges() {
            assert_eq!(r.weight, 0.0);
        }
        let f = barron_fnn(&spec).unwrap();
        for p in &grid {
            assert_eq!(fnn_eval(&f, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn fitter_is_deterministic_per_seed() {
        let truth = |x: &[f64]| 0.5 * (x[0] + x[1]).max(0.0);
        let grid = square_grid(8);
        let a = fit_barron_ridges(&truth, 3, 100, &grid, 9).unwrap();
        let b = fit_barron_ridges(&truth, 3, 100, &grid, 9).unwrap();
        for (ra, rb) in a.ridges().iter().zip(b.ridges()) {
            assert_eq!(ra.direction, rb.direction);
            assert_eq!(ra.weight, rb.weight);
            assert_eq!(ra.shift, rb.shift);
        }
        let c = fit_barron_ridges(&truth, 3, 100, &grid, 10).unwrap();
        let same = a
            .ridges()
            .iter()
            .zip(c.ridges())
            .all(|(ra, rc)| ra.direction == rc.direction && ra.shift == rc.shift);
        assert!(!same, "different seeds should explore different candidates");
    }
}
