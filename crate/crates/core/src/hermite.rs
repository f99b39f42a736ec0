//! Probabilists' Hermite polynomials, chaos expansions, and the Hermite rank.
//!
//! Everything here is relative to the standard normal density
//! `φ(w) = exp(-w²/2)/√(2π)`. The polynomials H_j satisfy
//!
//! ```text
//! H_0 = 1,  H_1 = w,  H_{k+1}(w) = w·H_k(w) - k·H_{k-1}(w),
//! ∫ H_j H_k φ = δ_jk · j!.
//! ```
//!
//! A square-integrable `G` expands as `G = Σ_j C_j H_j / j!` with
//! `C_j = ∫ G H_j φ`; the smallest index with a nonzero coefficient is the
//! Hermite rank, the single most important integer in the limit theory: it
//! decides which limit law the window averages of `G(field)` obey.

use crate::special::gauss_hermite_probabilists;
use thiserror::Error;

/// Default quadrature order for [`expand`]; exact for polynomial `G` up to
/// degree 255 and accurate to ~1e-3 even for jump discontinuities.
pub const DEFAULT_QUAD_ORDER: usize = 128;

/// Largest expansion order supported; `j!` must stay inside f64 range with
/// headroom for the rank-detection scale factor.
pub const MAX_EXPANSION_ORDER: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum HermiteError {
    #[error("function returned a non-finite value at quadrature node {node}")]
    NonFiniteQuadrature { node: f64 },
    #[error("no coefficient exceeded the detection threshold up to order {max_order}")]
    RankUndetected { max_order: usize },
    #[error("index and correlation slices must have equal length ({k_len}, {m_len}, {r_len})")]
    LengthMismatch { k_len: usize, m_len: usize, r_len: usize },
}

/// Evaluate H_k(x) by the three-term recurrence.
pub fn hermite_eval(k: u32, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0; // H_0
            let mut cur = x; // H_1
            for j in 1..k {
                let next = x * cur - j as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `n!` as a float; exact for n <= 22, correctly rounded far beyond.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Hermite expansion of a function against the standard normal density.
#[derive(Debug, Clone)]
pub struct HermiteExpansion {
    /// `C_j = ∫ G H_j φ` for `j = 0..=max_order`.
    pub coefficients: Vec<f64>,
    /// Hermite rank: smallest `j` whose coefficient passes the detection
    /// threshold. Rank 0 means `G` has a nonzero mean and must be centered
    /// before any limit theorem applies.
    pub rank: usize,
    /// `∫ G² φ`, for Parseval checks and variance budgets.
    pub l2_norm_sq: f64,
    /// Quadrature order that produced the coefficients.
    pub quad_order: usize,
}

impl HermiteExpansion {
    /// Coefficient of rank order, `C_κ`.
    pub fn leading_coefficient(&self) -> f64 {
        self.coefficients[self.rank]
    }

    /// Rank of the centered function `G − C_0`: the smallest order `j >= 1`
    /// whose coefficient clears the detection threshold (scaled by the
    /// centered norm), or `None` when `G` is constant.
    pub fn centered_rank(&self) -> Option<usize> {
        let centered_norm_sq =
            (self.l2_norm_sq - self.coefficients[0] * self.coefficients[0]).max(0.0);
        self.coefficients.iter().enumerate().skip(1).find_map(|(j, &c)| {
            let scale = (centered_norm_sq * factorial(j)).sqrt().max(1.0);
            (c.abs() > 1e-9 * scale).then_some(j)
        })
    }

    /// Partial Parseval sum `Σ_{j<=J} C_j²/j!`; approaches `l2_norm_sq`
    /// from below as `J` grows.
    pub fn parseval_partial(&self, up_to: usize) -> f64 {
        self.coefficients
            .iter()
            .take(up_to + 1)
            .enumerate()
            .map(|(j, c)| c * c / factorial(j))
            .sum()
    }
}

/// Expand `g` in Hermite polynomials up to `max_order` using a
/// `quad_order`-point Gauss–Hermite rule.
///
/// `quad_order >= 2 * max_order` is required so that every computed
/// coefficient integrates a polynomial within the exactness degree whenever
/// `g` itself is polynomial.
pub fn expand<G: Fn(f64) -> f64>(
    g: G,
    max_order: usize,
    quad_order: usize,
) -> Result<HermiteExpansion, HermiteError> {
    assert!(max_order <= MAX_EXPANSION_ORDER, "expansion order too large");
    assert!(
        quad_order >= 2 * max_order.max(1),
        "quadrature order {quad_order} too small for expansion order {max_order}"
    );
    let (nodes, weights) = gauss_hermite_probabilists(quad_order);
    let values: Vec<f64> = nodes.iter().map(|&x| g(x)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(HermiteError::NonFiniteQuadrature { node: nodes[i] });
    }

    // Hermite values per (order, node); 65 x quad_order at most.
    let mut h = vec![vec![1.0; quad_order]; max_order + 1];
    if max_order >= 1 {
        h[1].copy_from_slice(&nodes);
    }
    for j in 2..=max_order {
        for i in 0..quad_order {
            h[j][i] = nodes[i] * h[j - 1][i] - (j as f64 - 1.0) * h[j - 2][i];
        }
    }

    let mut coefficients = vec![0.0; max_order + 1];
    let mut l2_norm_sq = 0.0;
    for (&w, &v) in weights.iter().zip(values.iter()) {
        l2_norm_sq += w * v * v;
    }
    for (j, cj) in coefficients.iter_mut().enumerate() {
        *cj = weights
            .iter()
            .zip(values.iter())
            .zip(h[j].iter())
            .map(|((&w, &v), &hj)| w * v * hj)
            .sum();
    }

    let rank = detect_rank(&coefficients, l2_norm_sq)
        .ok_or(HermiteError::RankUndetected { max_order })?;
    Ok(HermiteExpansion { coefficients, rank, l2_norm_sq, quad_order })
}

/// Smallest order whose coefficient clears the scale-aware threshold
/// `1e-9 · max(1, sqrt(l2_norm_sq · j!))`.
fn detect_rank(coefficients: &[f64], l2_norm_sq: f64) -> Option<usize> {
    coefficients.iter().enumerate().find_map(|(j, &c)| {
        let scale = (l2_norm_sq * factorial(j)).sqrt().max(1.0);
        (c.abs() > 1e-9 * scale).then_some(j)
    })
}

/// Expected value of a product of Hermite polynomials of jointly Gaussian
/// pairs: for standard normal vectors `(ξ_1..ξ_p)` and `(ξ_{p+1}..ξ_{2p})`,
/// independent within blocks and with `E ξ_j ξ_{j+p} = r_j`,
///
/// ```text
/// E Π_j H_{k_j}(ξ_j) H_{m_j}(ξ_{j+p}) = Π_j δ_{k_j m_j} · k_j! · r_j^{k_j}.
/// ```
pub fn product_moment(k: &[u32], m: &[u32], r: &[f64]) -> Result<f64, HermiteError> {
    if k.len() != m.len() || k.len() != r.len() {
        return Err(HermiteError::LengthMismatch { k_len: k.len(), m_len: m.len(), r_len: r.len() });
    }
    let mut prod = 1.0;
    for ((&kj, &mj), &rj) in k.iter().zip(m).zip(r) {
        if kj != mj {
            return Ok(0.0);
        }
        prod *= factorial(kj as usize) * rj.powi(kj as i32);
    }
    Ok(prod)
}
