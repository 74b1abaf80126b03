//! Multi-index combinatorics and exact truncated Taylor polynomials built
//! from the derivative oracle.

use crate::approx::testfns::TaylorOracle;
use crate::error::{CoreError, CoreResult};

/// Binomial coefficient `n choose k` as f64 (exact for the small arguments
/// used here).
#[must_use]
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `alpha! = prod_j alpha_j!`.
#[must_use]
pub fn multi_factorial(alpha: &[usize]) -> f64 {
    alpha
        .iter()
        .map(|&a| (1..=a).map(|i| i as f64).product::<f64>().max(1.0))
        .product()
}

/// All multi-indices over `dim` coordinates with total order at most `deg`,
/// in lexicographic order.
#[must_use]
pub fn multi_indices_up_to(dim: usize, deg: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; dim];
    loop {
        if cur.iter().sum::<usize>() <= deg {
            out.push(cur.clone());
        }
        // odometer increment with per-digit cap `deg`
        let mut pos = dim;
        while pos > 0 {
            pos -= 1;
            if cur[pos] < deg {
                cur[pos] += 1;
                for v in cur.iter_mut().skip(pos + 1) {
                    *v = 0;
                }
                break;
            }
            if pos == 0 {
                return out;
            }
        }
        if dim == 0 {
            return out;
        }
    }
}

/// The degree cap for derivative orders strictly below `beta`: indices with
/// `|alpha| < beta`, i.e. `|alpha| <= ceil(beta) - 1`.
#[must_use]
pub fn strict_degree_cap(beta: f64) -> usize {
    let floor = beta.floor();
    let cap = if beta == floor { floor - 1.0 } else { floor };
    cap.max(0.0) as usize
}

/// Multi-indices of total order strictly below `beta`, lexicographic.
#[must_use]
pub fn multi_indices_below(dim: usize, beta: f64) -> Vec<Vec<usize>> {
    multi_indices_up_to(dim, strict_degree_cap(beta))
}

/// The truncated Taylor polynomial of the oracle's function at `a`,
/// evaluated at `x`: the sum over multi-indices of order strictly below the
/// smoothness order of `partial(alpha, a) / alpha! * (x - a)^alpha`.
pub fn taylor_exact(oracle: &TaylorOracle, a: &[f64], x: &[f64]) -> CoreResult<f64> {
    let d = oracle.dim();
    if a.len() != d || x.len() != d {
        return Err(CoreError::ShapeMismatch(format!(
            "expansion point ({}) and query point ({}) must both have dimension {}",
            a.len(),
            x.len(),
            d
        )));
    }
    let mut total = 0.0;
    for alpha in multi_indices_below(d, oracle.beta()) {
        let coeff = oracle.partial(&alpha, a)? / multi_factorial(&alpha);
        let mono: f64 = alpha
            .iter()
            .zip(x.iter().zip(a))
            .map(|(&p, (xv, av))| (xv - av).powi(p as i32))
            .product();
        total += coeff * mono;
    }
    if !total.is_finite() {
        return Err(CoreError::NumericGuard(
            "truncated Taylor polynomial evaluated to a non-finite value".into(),
        ));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::testfns::{by_name, ConstantFn, SmoothFn, TaylorOracle};
    use std::sync::Arc;

    #[test]
    fn binomial_and_factorial_sanity() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(multi_factorial(&[0, 0]), 1.0);
        assert_eq!(multi_factorial(&[3, 2]), 12.0);
        assert_eq!(multi_factorial(&[1, 0, 4]), 24.0);
    }

    #[test]
    fn index_sets_have_expected_counts_and_order() {
        // order < 2 in two variables: constant and the two first partials
        let below = multi_indices_below(2, 2.0);
        assert_eq!(below, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        // all monomial orders <= 2 in one variable
        assert_eq!(multi_indices_up_to(1, 2), vec![vec![0], vec![1], vec![2]]);
        // |{alpha : |alpha| <= deg}| = binom(dim + deg, dim)
        for dim in 1..=4usize {
            for deg in 0..=3usize {
                let count = multi_indices_up_to(dim, deg).len();
                assert_eq!(count as f64, binomial(dim + deg, dim), "dim {dim} deg {deg}");
            }
        }
        // lexicographic: strictly increasing as vectors
        let set = multi_indices_up_to(3, 2);
        for w in set.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn strict_cap_handles_integer_and_fractional_orders() {
        assert_eq!(strict_degree_cap(2.0), 1);
        assert_eq!(strict_degree_cap(2.5), 2);
        assert_eq!(strict_degree_cap(1.0), 0);
        assert_eq!(strict_degree_cap(0.5), 0);
        assert_eq!(strict_degree_cap(3.0), 2);
    }

    #[test]
    fn constant_expands_to_itself() {
        let o = TaylorOracle::new(Arc::new(ConstantFn::new(3, 0.7)), 2.0).unwrap();
        let v = taylor_exact(&o, &[0.1, 0.2, 0.3], &[0.9, -0.5, 0.0]).unwrap();
        assert_eq!(v, 0.7);
    }

    /// At order two the expansion keeps only value and gradient, so x^2
    /// around 0 truncates to the zero polynomial.
    #[test]
    fn square_truncates_to_zero_at_origin() {
        struct Sq;
        impl SmoothFn for Sq {
            fn name(&self) -> &str {
                "sq"
            }
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, x: &[f64]) -> f64 {
                x[0] * x[0]
            }
            fn partial(&self, alpha: &[usize], x: &[f64]) -> f64 {
                match alpha[0] {
                    0 => x[0] * x[0],
                    1 => 2.0 * x[0],
                    2 => 2.0,
                    _ => 0.0,
                }
            }
            fn sup_norm(&self) -> f64 {
                1.0
            }
            fn smoothness_norm(&self, _b: f64) -> crate::error::CoreResult<f64> {
                Ok(3.0)
            }
        }
        let o = TaylorOracle::new(Arc::new(Sq), 2.0).unwrap();
        for x in [-0.5, 0.0, 0.3, 1.0] {
            assert_eq!(taylor_exact(&o, &[0.0], &[x]).unwrap(), 0.0);
        }
        // around a = 0.5 the affine part is nonzero: 0.25 + 1.0 (x - 0.5)
        let v = taylor_exact(&o, &[0.5], &[0.7]).unwrap();
        assert!((v - (0.25 + 1.0 * 0.2)).abs() < 1e-15);
    }

    /// Remainder bound: |f(x) - P_a(x)| <= norm * |x - a|_inf^beta, checked
    /// for the sine at order three over shrinking radii.
    #[test]
    fn remainder_shrinks_at_the_smoothness_rate()  {
        let f = by_name("sinpi", 1).unwrap();
        let o = TaylorOracle::new(f, 3.0).unwrap();
        let norm = o.norm();
        for a in [0.0, 0.3, 0.6] {
            for radius in [0.5, 0.25, 0.1, 0.05, 0.01] {
                for sign in [-1.0, 1.0] {
                    let x = a + sign * radius;
                    let p = taylor_exact(&o, &[a], &[x]).unwrap();
                    let err = (o.eval(&[x]).unwrap() - p).abs();
                    assert!(
                        err <= norm * radius.powf(3.0) + 1e-15,
                        "a {a} radius {radius}: err {err}"
                    );
                }
            }
        }
    }
}
