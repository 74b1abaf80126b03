//! The regular grid on the unit cube and the exact tensor-product hinge
//! bumps centered at its points.

use crate::error::{CoreError, CoreResult};

/// All points `(p_1/m_prime, ..., p_D/m_prime)` with integer coordinates
/// `0 <= p_j <= m_prime`, sorted lexicographically. Errors when the count
/// `(m_prime + 1)^D` overflows.
pub fn lattice(m_prime: usize, dim: usize) -> CoreResult<Vec<Vec<f64>>> {
    if dim == 0 {
        return Err(CoreError::InvalidArgument("lattice dimension must be positive".into()));
    }
    if m_prime == 0 {
        return Err(CoreError::InvalidArgument("lattice resolution must be positive".into()));
    }
    let side = m_prime + 1;
    let count = side
        .checked_pow(u32::try_from(dim).map_err(|_| {
            CoreError::NumericGuard(format!("lattice dimension {dim} is out of range"))
        })?)
        .ok_or_else(|| {
            CoreError::NumericGuard(format!(
                "lattice size ({side})^{dim} overflows the point counter"
            ))
        })?;
    let mut points = Vec::with_capacity(count);
    let mut idx = vec![0usize; dim];
    loop {
        points.push(idx.iter().map(|&p| p as f64 / m_prime as f64).collect());
        let mut pos = dim;
        loop {
            if pos == 0 {
                return Ok(points);
            }
            pos -= 1;
            if idx[pos] < m_prime {
                idx[pos] += 1;
                for v in idx.iter_mut().skip(pos + 1) {
                    *v = 0;
                }
                break;
            }
            idx[pos] = 0;
            if pos == 0 {
                return Ok(points);
            }
        }
    }
}

/// The exact tensor-product hinge centered at the grid point `a`:
/// `H_a(x) = prod_j max(0, 1/m_prime - |x_j - a_j|)`.
pub fn hat_exact(a: &[f64], m_prime: usize, x: &[f64]) -> CoreResult<f64> {
    if a.len() != x.len() || a.is_empty() {
        return Err(CoreError::ShapeMismatch(format!(
            "hinge center has dimension {}, point has dimension {}",
            a.len(),
            x.len()
        )));
    }
    if m_prime == 0 {
        return Err(CoreError::InvalidArgument("grid resolution must be positive".into()));
    }
    let half = 1.0 / m_prime as f64;
    let mut acc = 1.0;
    for (&aj, &xj) in a.iter().zip(x) {
        let factor = (half - (xj - aj).abs()).max(0.0);
        if factor == 0.0 {
            return Ok(0.0);
        }
        acc *= factor;
    }
    Ok(acc)
}
