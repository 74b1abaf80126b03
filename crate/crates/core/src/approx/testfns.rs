//! Named smooth test functions with closed-form partial derivatives and
//! smoothness norms, and the derivative oracle consumed by the constructive
//! approximators.

use std::fmt;
use std::sync::Arc;

use crate::error::{CoreError, CoreResult};

/// A smooth function on `[-1,1]^D` with exact partial derivatives of any
/// order and a closed-form smoothness norm — the ground truth against which
/// approximators are measured.
pub trait SmoothFn: Send + Sync {
    /// Registry name.
    fn name(&self) -> &str;
    /// Input dimension.
    fn dim(&self) -> usize;
    /// Function value.
    fn eval(&self, x: &[f64]) -> f64;
    /// Mixed partial derivative for the multi-index `alpha`
    /// (`alpha.len() == dim`).
    fn partial(&self, alpha: &[usize], x: &[f64]) -> f64;
    /// Exact sup-norm over the cube.
    fn sup_norm(&self) -> f64;
    /// Smoothness norm: the sum of sup-norms of all derivatives of order
    /// below `floor(beta)` plus the Hölder seminorms of the order-
    /// `floor(beta)` derivatives with exponent `beta - floor(beta)`.
    /// Errors when no closed form is implemented for this `beta`.
    fn smoothness_norm(&self, beta: f64) -> CoreResult<f64>;
}

impl fmt::Debug for dyn SmoothFn {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "SmoothFn({}, dim {})", self.name(), self.dim())
    }
}

fn check_beta(beta: f64) -> CoreResult<()> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "smoothness order must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

/// The zero function in any dimension.
#[derive(Debug, Clone)]
pub struct ZeroFn {
    dim: usize,
}

impl ZeroFn {
    #[must_use]
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl SmoothFn for ZeroFn {
    fn name(&self) -> &str {
        "zero"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn partial(&self, _alpha: &[usize], _x: &[f64]) -> f64 {
        0.0
    }
    fn sup_norm(&self) -> f64 {
        0.0
    }
    fn smoothness_norm(&self, beta: f64) -> CoreResult<f64> {
        check_beta(beta)?;
        Ok(0.0)
    }
}

/// A constant function in any dimension.
#[derive(Debug, Clone)]
pub struct ConstantFn {
    dim: usize,
    value: f64,
}

impl ConstantFn {
    #[must_use]
    pub fn new(dim: usize, value: f64) -> Self {
        Self { dim, value }
    }
}

impl SmoothFn for ConstantFn {
    fn name(&self) -> &str {
        "constant"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        self.value
    }
    fn partial(&self, alpha: &[usize], _x: &[f64]) -> f64 {
        if alpha.iter().all(|&a| a == 0) {
            self.value
        } else {
            0.0
        }
    }
    fn sup_norm(&self) -> f64 {
        self.value.abs()
    }
    fn smoothness_norm(&self, beta: f64) -> CoreResult<f64> {
        check_beta(beta)?;
        // Below order one the norm is a pure Hölder seminorm, which vanishes
        // for constants; from order one on, the value term enters.
        Ok(if beta >= 1.0 { self.value.abs() } else { 0.0 })
    }
}

/// `c0 + sum_j c_j x_j` with coefficients `c_j = 0.3 / D`, `c0 = 0.2`.
#[derive(Debug, Clone)]
pub struct AffineFn {
    dim: usize,
    c0: f64,
    coeffs: Vec<f64>,
}

impl AffineFn {
    #[must_use]
    pub fn new(dim: usize) -> Self {
        Self { dim, c0: 0.2, coeffs: vec![0.3 / dim as f64; dim] }
    }
}

impl SmoothFn for AffineFn {
    fn name(&self) -> &str {
        "affine"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.c0 + self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
    fn partial(&self, alpha: &[usize], x: &[f64]) -> f64 {
        match alpha.iter().sum::<usize>() {
            0 => self.eval(x),
            1 => {
                let j = alpha.iter().position(|&a| a == 1).unwrap();
                self.coeffs[j]
            }
            _ => 0.0,
        }
    }
    fn sup_norm(&self) -> f64 {
        self.c0.abs() + self.coeffs.iter().map(|c| c.abs()).sum::<f64>()
    }
    fn smoothness_norm(&self, beta: f64) -> CoreResult<f64> {
        check_beta(beta)?;
        let grad: f64 = self.coeffs.iter().map(|c| c.abs()).sum();
        let floor = beta.floor() as usize;
        match floor {
            0 => Err(CoreError::InvalidArgument(
                "no closed-form sub-unit smoothness norm for the affine test function".into(),
            )),
            // Order-one derivatives are constant, so every seminorm term
            // vanishes and higher floors only add zero derivatives.
            1 => Ok(self.sup_norm()),
            _ => Ok(self.sup_norm() + grad),
        }
    }
}

/// `(1/D) sum_j x_j^2`.
#[derive(Debug, Clone)]
pub struct QuadraticFn {
    dim: usize,
    coeffs: Vec<f64>,
}

impl QuadraticFn {
    #[must_use]
    pub fn new(dim: usize) -> Self {
        Self { dim, coeffs: vec![1.0 / dim as f64; dim] }
    }
}

impl SmoothFn for QuadraticFn {
    fn name(&self) -> &str {
        "quadratic"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v * v).sum()
    }
    fn partial(&self, alpha: &[usize], x: &[f64]) -> f64 {
        match alpha.iter().sum::<usize>() {
            0 => self.eval(x),
            1 => {
                let j = alpha.iter().position(|&a| a == 1).unwrap();
                2.0 * self.coeffs[j] * x[j]
            }
            2 => {
                if let Some(j) = alpha.iter().position(|&a| a == 2) {
                    2.0 * self.coeffs[j]
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }
    fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
    fn smoothness_norm(&self, beta: f64) -> CoreResult<f64> {
        check_beta(beta)?;
        let s: f64 = self.coeffs.iter().map(|c| c.abs()).sum();
        let floor = beta.floor() as usize;
        match floor {
            // value + first derivatives (sup 2|c_j| at the cube edge) +
            // vanishing seminorm of the constant second derivatives; beyond
            // that only zero derivatives are added.
            2 => Ok(s + 2.0 * s),
            3.. => Ok(s + 2.0 * s + 2.0 * s),
            _ => Err(CoreError::InvalidArgument(format!(
                "no closed-form smoothness norm below order two for the quadratic test \
                 function (got {beta})"
            ))),
        }
    }
}

/// `sin(pi x_1) sin(pi x_2)` on the square; every mixed partial is a
/// phase-shifted product `pi^(p+q) sin(pi x_1 + p pi/2) sin(pi x_2 + q pi/2)`.
#[derive(Debug, Clone)]
pub struct SinSinFn;

impl SmoothFn for SinSinFn {
    fn name(&self) -> &str {
        "sinsin"
    }
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin()
    }
    fn partial(&self, alpha: &[usize], x: &[f64]) -> f64 {
        let pi = std::f64::consts::PI;
        let (p, q) = (alpha[0] as f64, alpha[1] as f64);
        pi.powf(p + q)
            * (pi * x[0] + p * pi / 2.0).sin()
            * (pi * x[1] + q * pi / 2.0).sin()
    }
    fn sup_norm(&self) -> f64 {
        1.0
    }
    fn smoothness_norm(&self, beta: f64) -> CoreResult<f64> {
        check_beta(beta)?;
        if beta == 2.0 {
            // value 1, two gradient sup-norms pi each, and three order-two
            // seminorm terms sup |g(x) - g(y)| = 2 pi^2 each (the second
            // derivatives span [-pi^2, pi^2]).
            let pi = std::f64::consts::PI;
            Ok(1.0 + 2.0 * pi + 6.0 * pi * pi)
        } else {
            Err(CoreError::InvalidArgument(format!(
                "smoothness norm of the sine product is only tabulated at order 2 (got {beta})"
            )))
        }
    }
}

/// `sin(pi x)` in one dimension; derivative of order `p` is
/// `pi^p sin(pi x + p pi/2)`.
#[derive(Debug, Clone)]
pub struct SinPiFn;

impl SmoothFn for SinPiFn {
    fn name(&self) -> &str {
        "sinpi"
    }
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (std::f64::consts::PI * x[0]).sin()
    }
    fn partial(&self, alpha: &[usize], x: &[f64]) -> f64 {
        let pi = std::f64::consts::PI;
        let p = alpha[0] as f64;
        pi.powf(p) * (pi * x[0] + p * pi / 2.0).sin()
    }
    fn sup_norm(&self) -> f64 {
        1.0
    }
    fn smoothness_norm(&self, beta: f64) -> CoreResult<f64> {
        check_beta(beta)?;
        let pi = std::f64::consts::PI;
        if beta == 2.0 {
            // orders 0..1 sup-norms (1 and pi) plus the exponent-zero
            // seminorm of the second derivative, i.e. its range spread 2 pi^2.
            Ok(1.0 + pi + 2.0 * pi * pi)
        } else if beta == 3.0 {
            // orders 0..2 sup-norms plus the spread of the third derivative.
            Ok(1.0 + pi + pi * pi + 2.0 * pi * pi * pi)
        } else {
            Err(CoreError::InvalidArgument(format!(
                "smoothness norm of the sine is only tabulated at orders 2 and 3 (got {beta})"
            )))
        }
    }
}

/// Looks up a named test function at the requested input dimension.
pub fn by_name(name: &str, dim: usize) -> CoreResult<Arc<dyn SmoothFn>> {
    if dim == 0 {
        return Err(CoreError::InvalidArgument("input dimension must be positive".into()));
    }
    match name {
        "zero" => Ok(Arc::new(ZeroFn::new(dim))),
        "constant" => Ok(Arc::new(ConstantFn::new(dim, 0.7))),
        "affine" => Ok(Arc::new(AffineFn::new(dim))),
        "quadratic" => Ok(Arc::new(QuadraticFn::new(dim))),
        "sinsin" => {
            if dim != 2 {
                return Err(CoreError::InvalidArgument(format!(
                    "the sine product is two-dimensional, got dimension {dim}"
                )));
            }
            Ok(Arc::new(SinSinFn))
        }
        "sinpi" => {
            if dim != 1 {
                return Err(CoreError::InvalidArgument(format!(
                    "the sine is one-dimensional, got dimension {dim}"
                )));
            }
            Ok(Arc::new(SinPiFn))
        }
        other => Err(CoreError::InvalidArgument(format!(
            "unknown test function '{other}'; available: zero, constant, affine, quadratic, \
             sinsin, sinpi"
        ))),
    }
}

/// Names accepted by [`by_name`].
pub const FN_NAMES: [&str; 6] = ["zero", "constant", "affine", "quadratic", "sinsin", "sinpi"];

/// Derivative oracle: a smooth function together with a smoothness order and
/// its norm, queried for exact mixed partials at expansion points.
#[derive(Clone)]
pub struct TaylorOracle {
    f: Arc<dyn SmoothFn>,
    beta: f64,
    norm: f64,
}

impl fmt::Debug for TaylorOracle {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "TaylorOracle({}, beta {}, norm {})", self.f.name(), self.beta, self.norm)
    }
}

impl TaylorOracle {
    /// Wraps a smooth function at order `beta > 0`; the smoothness norm is
    /// computed once here and must have a closed form.
    pub fn new(f: Arc<dyn SmoothFn>, beta: f64) -> CoreResult<Self> {
        check_beta(beta)?;
        let norm = f.smoothness_norm(beta)?;
        if !norm.is_finite() || norm < 0.0 {
            return Err(CoreError::NumericGuard(format!(
                "smoothness norm must be a finite nonnegative number, got {norm}"
            )));
        }
        Ok(Self { f, beta, norm })
    }

    /// Smoothness order.
    #[must_use]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Input dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// The function's smoothness norm at this order.
    #[must_use]
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// The wrapped function.
    #[must_use]
    pub fn function(&self) -> &Arc<dyn SmoothFn> {
        &self.f
    }

    /// Function value.
    pub fn eval(&self, x: &[f64]) -> CoreResult<f64> {
        self.check_point(x)?;
        Ok(self.f.eval(x))
    }

    /// Exact mixed partial `alpha` at the point `a`, checked finite.
    pub fn partial(&self, alpha: &[usize], a: &[f64]) -> CoreResult<f64> {
        if alpha.len() != self.dim() {
            return Err(CoreError::ShapeMismatch(format!(
                "multi-index length {} does not match dimension {}",
                alpha.len(),
                self.dim()
            )));
        }
        self.check_point(a)?;
        let v = self.f.partial(alpha, a);
        if !v.is_finite() {
            return Err(CoreError::NumericGuard(format!(
                "derivative oracle returned a non-finite value for index {alpha:?}"
            )));
        }
        Ok(v)
    }

    /// The same function re-parametrized from `[0,1]^D` onto the original
    /// `[-1,1]^D` via `z -> f(2z - 1)`; order-`|alpha|` derivatives pick up a
    /// factor `2^|alpha|`. Approximator internals work on the unit cube.
    #[must_use]
    pub fn pullback_to_unit_cube(&self) -> TaylorOracle {
        TaylorOracle {
            f: Arc::new(UnitCubePullback { inner: Arc::clone(&self.f) }),
            beta: self.beta,
            norm: self.norm,
        }
    }

    fn check_point(&self, x: &[f64]) -> CoreResult<()> {
        if x.len() != self.dim() {
            return Err(CoreError::ShapeMismatch(format!(
                "point dimension {} does not match function dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `g(z) = f(2z - 1)` with the chain-rule factor on derivatives.
struct UnitCubePullback {
    inner: Arc<dyn SmoothFn>,
}

impl SmoothFn for UnitCubePullback {
    fn name(&self) -> &str {
        "unit-cube-pullback"
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, z: &[f64]) -> f64 {
        let x: Vec<f64> = z.iter().map(|v| 2.0 * v - 1.0).collect();
        self.inner.eval(&x)
    }
    fn partial(&self, alpha: &[usize], z: &[f64]) -> f64 {
        let x: Vec<f64> = z.iter().map(|v| 2.0 * v - 1.0).collect();
        let order: usize = alpha.iter().sum();
        2f64.powi(order as i32) * self.inner.partial(alpha, &x)
    }
    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }
    fn smoothness_norm(&self, _beta: f64) -> CoreResult<f64> {
        Err(CoreError::InvalidArgument(
            "the unit-cube pullback does not expose a smoothness norm; use the original \
             function's norm"
                .into(),
        ))
    }
}
