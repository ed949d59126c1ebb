//! Kullback-Leibler divergences on finite alphabets, plus the scalar and
//! unnormalized variants used throughout the asymptotic analysis.
//!
//! Natural logarithms everywhere.

use crate::error::{Error, Result};

/// KL divergence `D(p || q) = sum_i p_i ln(p_i / q_i)` between two finite
/// distributions.
///
/// Terms with `p_i = 0` contribute zero. A point with `p_i > 0` and
/// `q_i = 0` makes the divergence infinite and is rejected as an
/// absolute-continuity violation.
pub fn kl(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut sum = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q.iter()).enumerate() {
        if pi < 0.0 || qi < 0.0 {
            return Err(Error::domain(format!("negative entry at index {i}")));
        }
        if pi > 0.0 {
            if qi == 0.0 {
                return Err(Error::AbsoluteContinuityViolation { index: i });
            }
            sum += pi * (pi / qi).ln();
        }
    }
    // Rounding can leave a tiny negative when p and q nearly coincide.
    if sum < 0.0 && sum > -1e-12 {
        return Ok(0.0);
    }
    Ok(sum)
}

/// Scalar divergence `D(alpha, beta) = alpha ln(alpha/beta)
/// + (1-alpha) ln((1-alpha)/(1-beta))`.
///
/// This is the Bernoulli KL divergence when `beta` is a probability paired
/// with `alpha`, but it is routinely evaluated at non-complementary
/// arguments such as `D(alpha, 1-beta)`, where negative values are legal.
/// The convention `0 ln 0 = 0` applies to each term separately.
pub fn binary_kl(alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::domain(format!(
            "arguments must lie in [0,1]: ({alpha}, {beta})"
        )));
    }
    let mut sum = 0.0;
    if alpha > 0.0 {
        if beta == 0.0 {
            return Err(Error::domain("beta = 0 with alpha > 0"));
        }
        sum += alpha * (alpha / beta).ln();
    }
    if alpha < 1.0 {
        if beta == 1.0 {
            return Err(Error::domain("beta = 1 with alpha < 1"));
        }
        sum += (1.0 - alpha) * ((1.0 - alpha) / (1.0 - beta)).ln();
    }
    Ok(sum)
}

/// Unnormalized divergences of two positive pairs `a = (a0, a1)`,
/// `b = (b0, b1)`:
///
/// ```text
/// Dt0(a; b) = a0 ln(a0/a1) + b0 ln(b0/b1)
/// Dt1(a; b) = a1 ln(a1/a0) + b1 ln(b1/b0)
/// ```
///
/// They reduce to the scalar divergence on complementary pairs:
/// `Dt0(a; 1-a) = D(a0, a1)` and `Dt1(a; 1-a) = D(a1, a0)`.
pub fn unnormalized_divergences(a: (f64, f64), b: (f64, f64)) -> Result<(f64, f64)> {
    for v in [a.0, a.1, b.0, b.1] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("entries must be positive: {v}")));
        }
    }
    let d0 = a.0 * (a.0 / a.1).ln() + b.0 * (b.0 / b.1).ln();
    let d1 = a.1 * (a.1 / a.0).ln() + b.1 * (b.1 / b.0).ln();
    Ok((d0, d1))
}
