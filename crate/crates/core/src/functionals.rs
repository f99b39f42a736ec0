//! Window integrals of a transformed field.
//!
//! For a realization `η` on a lattice over the scaled window `Δ(r)`, this
//! module computes the Riemann sum of the centered transform `G(η)`, its
//! leading Hermite-chaos term, and the variance-stabilizing normalization
//! of the full integral — together with the exact variance of the leading
//! term via the pair-distance reduction
//! ([`Window::reduce_double_integral`]).
//!
//! Conventions. `G = Σ_j (c_j/j!) H_j` in probabilists' Hermite polynomials
//! with the inner products `c_j = E[G(N) H_j(N)]`
//! ([`HermiteExpansion::coefficients`]). The rank-order inner product `c_κ`
//! is the constant entering every normalization below; operations taking an
//! explicit `c_kappa` argument expect it in that convention.

use crate::fields::{FieldModel, FieldSample};
use crate::geometry::{GeometryError, Window};
use crate::hermite::{factorial, hermite_eval, HermiteExpansion};
use std::io::{BufWriter, Write};
use std::path::Path;

/// Failure modes of the window-functional computations.
#[derive(Debug, thiserror::Error)]
pub enum FunctionalError {
    /// The centered transform has no surviving Hermite coefficient: every
    /// normalization below divides by the rank-order coefficient.
    #[error("transform has Hermite rank 0 after centering")]
    RankZero,
    /// The decay exponent is incompatible with a rank-`kappa` limit in
    /// dimension `d`: the theory requires `0 < alpha < d/kappa`.
    #[error("alpha = {alpha} outside (0, {d}/{kappa}) for rank {kappa} in dimension {d}")]
    AlphaOutOfRange { alpha: f64, kappa: usize, d: usize },
    /// The pair-distance reduction quadrature failed.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(#[from] GeometryError),
}

/// Window integral of `G(η)` with its leading-chaos companion statistics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FunctionalResult {
    /// `h^d Σ_x (G(η(x)) − c₀)`: Riemann sum of the centered transform.
    pub k_r: f64,
    /// `(c_κ/κ!) · h^d Σ_x H_κ(η(x))`: the rank-κ chaos term alone.
    pub k_r_kappa: f64,
    /// `κ!·k_r / (c_κ r^{d−κα/2} L^{κ/2}(r))`: the full integral under the
    /// normalization that stabilizes its variance as `r → ∞`.
    pub x_r_kappa: f64,
    /// Window scale.
    pub r: f64,
    /// Lattice spacing of the underlying realization.
    pub grid_spacing: f64,
    /// Seed of the underlying realization (provenance).
    pub seed: u64,
}

/// Integrate the centered transform `G(η)` over the sample's lattice.
///
/// `k_r` uses `G − c₀` (the mean under `N(0,1)` is removed so that only
/// fluctuations are integrated); `k_r_kappa` keeps the rank-κ Hermite term
/// alone; `x_r_kappa` rescales `k_r` by `c_κ r^{d−κα/2} L^{κ/2}(r) / κ!`,
/// where `L` is the model's slowly varying covariance factor and κ the rank
/// of the centered transform.
///
/// The sample must live on a lattice covering `Δ(r)` (spacing
/// [`FieldSample::h`] > 0), and `expansion` must be the expansion of the
/// same `g` passed here.
pub fn integrate_functional<G: Fn(f64) -> f64>(
    sample: &FieldSample,
    g: G,
    expansion: &HermiteExpansion,
    model: &FieldModel,
) -> Result<FunctionalResult, FunctionalError> {
    let kappa = expansion.centered_rank().ok_or(FunctionalError::RankZero)?;
    assert!(
        sample.h > 0.0,
        "window integrals need a lattice sample; this one has free points"
    );
    let d = sample.d;
    let alpha = model.alpha;
    if !(alpha > 0.0 && alpha * (kappa as f64) < d as f64) {
        return Err(FunctionalError::AlphaOutOfRange { alpha, kappa, d });
    }

    let c0 = expansion.coefficients[0];
    let c_kappa = expansion.coefficients[kappa];
    let cell = sample.h.powi(d as i32);
    let mut sum_g = 0.0;
    let mut sum_h = 0.0;
    for &v in &sample.values {
        sum_g += g(v) - c0;
        sum_h += hermite_eval(kappa as u32, v);
    }
    let k_r = cell * sum_g;
    let k_r_kappa = c_kappa / factorial(kappa) * cell * sum_h;

    let l_cov = model.l_cov.eval(sample.r);
    let scale = c_kappa
        * sample.r.powf(d as f64 - kappa as f64 * alpha / 2.0)
        * l_cov.powf(kappa as f64 / 2.0);
    let x_r_kappa = factorial(kappa) * k_r / scale;

    Ok(FunctionalResult {
        k_r,
        k_r_kappa,
        x_r_kappa,
        r: sample.r,
        grid_spacing: sample.h,
        seed: sample.seed,
    })
}

/// Exact variance of the rank-κ term `(c_κ/κ!) ∫_{Δ(r)} H_κ(η(x)) dx`.
///
/// From the pairwise moment `E[H_κ(η(x)) H_κ(η(y))] = κ!·B^κ(‖x−y‖)`, the
/// variance reduces to `(c_κ²/κ!) ∫∫_{Δ(r)²} B^κ(‖x−y‖) dx dy`, evaluated
/// by the pair-distance-density reduction. `c_kappa` is the rank-order
/// inner product `E[G(N)H_κ(N)]`.
pub fn variance_k_r_kappa(
    model: &FieldModel,
    window: Window,
    r: f64,
    kappa: usize,
    c_kappa: f64,
) -> Result<f64, FunctionalError> {
    variance_with_kernel(|z| model.covariance(z), window, r, kappa, c_kappa)
}

/// Kernel-level core of [`variance_k_r_kappa`]: any radial covariance `b`
/// (with integrable `b^κ` singularity at 0) in place of a model.
pub(crate) fn variance_with_kernel<B: Fn(f64) -> f64>(
    b: B,
    window: Window,
    r: f64,
    kappa: usize,
    c_kappa: f64,
) -> Result<f64, FunctionalError> {
    assert!(kappa >= 1, "rank must be at least 1");
    let double = window.reduce_double_integral(r, |z| b(z).powi(kappa as i32))?;
    Ok(c_kappa * c_kappa / factorial(kappa) * double)
}

/// Write a replicate batch as CSV rows `replicate,r,k_r,k_r_kappa,x_r_kappa,seed`.
pub fn export_functional_csv(results: &[FunctionalResult], path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "replicate,r,k_r,k_r_kappa,x_r_kappa,seed")?;
    for (i, fr) in results.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            i, fr.r, fr.k_r, fr.k_r_kappa, fr.x_r_kappa, fr.seed
        )?;
    }
    w.flush()
}
