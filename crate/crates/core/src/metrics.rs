//! Empirical distribution diagnostics: the uniform (Kolmogorov) metric on
//! sample batches, the Lévy concentration function, an anti-concentration
//! bound for Wiener-chaos variables, a log–log concentration-exponent fit,
//! and a smoothing-inequality probe that ties the three together.
//!
//! All estimators work on raw sample slices (the `values` of a batch) and
//! are exact combinatorial computations on the sorted data — no binning or
//! kernel smoothing. Statistical acceptance everywhere uses the 99%
//! Dvoretzky–Kiefer–Wolfowitz band `√(ln(2/0.01)/(2n))`, which is
//! distribution-free and conservative.
//!
//! The uniform metric between random variables `Y₁, Y₂` is
//! `ρ(Y₁, Y₂) = sup_z |P(Y₁ ≤ z) − P(Y₂ ≤ z)|`; the Lévy concentration
//! function of `X` is `Q(X, ε) = sup_z P(z < X ≤ z + ε)`. The two are tied
//! by the identity `Q(X, ε) = ρ(X + ε, X)`, which holds *exactly* for the
//! empirical versions computed here on a shared sample (and is asserted in
//! tests). For an order-κ chaos variable the Carbery–Wright inequality
//! bounds small-ball probabilities by `ε^{1/κ}`; [`carbery_wright_bound`]
//! evaluates that bound with an empirically calibrated constant.

use serde::Serialize;
use thiserror::Error;

use crate::hermite::factorial;

/// Errors from the distance and concentration estimators.
#[derive(Debug, Error)]
pub enum MetricsError {
    /// An estimator received an empty sample batch.
    #[error("empty sample batch")]
    EmptyBatch,
    /// A scalar argument fell outside its admissible range.
    #[error("{name} = {value} outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },
    /// The ε-grid for the exponent fit is unusable: fewer than 3 points,
    /// non-positive or non-finite entries, or spanning less than a decade.
    #[error("epsilon grid must hold >= 3 positive finite points spanning a decade")]
    DegenerateGrid,
    /// Paired batches differ in length.
    #[error("paired batches differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Outcome of a Kolmogorov-distance estimate, exportable as JSON
/// `{statistic, n_a, n_b, band, below_band}`.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    /// `sup_z |ECDF_a(z) − ECDF_b(z)|`, exact on the samples; in `[0, 1]`.
    pub statistic: f64,
    /// Size of the first batch.
    pub n_a: usize,
    /// Size of the second batch (for the one-sample form the reference CDF
    /// is exact, and the sample size occupies both slots).
    pub n_b: usize,
    /// 99% Dvoretzky–Kiefer–Wolfowitz band `√(ln(2/0.01)/(2·min(n_a,n_b)))`.
    #[serde(rename = "band")]
    pub dkw_band_99: f64,
    /// Whether `statistic < dkw_band_99`.
    pub below_band: bool,
}

/// 99% Dvoretzky–Kiefer–Wolfowitz band `√(ln(2/0.01)/(2n))`.
fn dkw_band_99(n: usize) -> f64 {
    ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt()
}

/// Sorted copy of a sample slice (total order, so NaN cannot wedge the
/// sweeps; NaN sorts last).
fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    x
}

/// Exact two-sample Kolmogorov distance
/// `sup_z |ECDF_a(z) − ECDF_b(z)|` by a merged sweep over the pooled
/// breakpoints.
///
/// The empirical distance is a metric on empirical laws: symmetric by
/// construction and satisfying the triangle inequality exactly (both are
/// asserted as test invariants).
///
/// ```
/// use hermite_limits::metrics::kolmogorov_two_sample;
///
/// let report = kolmogorov_two_sample(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]).unwrap();
/// assert!((report.statistic - 1.0 / 3.0).abs() < 1e-15);
/// ```
pub fn kolmogorov_two_sample(a: &[f64], b: &[f64]) -> Result<DistanceReport, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    let (xa, xb) = (sorted(a), sorted(b));
    let (na, nb) = (xa.len(), xb.len());
    // The sweep works in integers (|i·n_b − j·n_a| with one division at the
    // end), so the statistic is the correctly rounded exact rational — this
    // is what makes identities like Q̂(ε) = ρ̂(X+ε, X) hold bit-for-bit.
    let (mut i, mut j, mut d) = (0usize, 0usize, 0u64);
    while i < na || j < nb {
        // next pooled breakpoint: consume every tie in both batches at once
        let v = match (xa.get(i), xb.get(j)) {
            (Some(&x), Some(&y)) => {
                if x.total_cmp(&y).is_le() {
                    x
                } else {
                    y
                }
            }
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!("loop condition"),
        };
        while i < na && xa[i].total_cmp(&v).is_le() {
            i += 1;
        }
        while j < nb && xb[j].total_cmp(&v).is_le() {
            j += 1;
        }
        d = d.max((i as u64 * nb as u64).abs_diff(j as u64 * na as u64));
    }
    let band = dkw_band_99(na.min(nb));
    let statistic = d as f64 / (na as f64 * nb as f64);
    Ok(DistanceReport {
        statistic,
        n_a: na,
        n_b: nb,
        dkw_band_99: band,
        below_band: statistic < band,
    })
}

/// Exact one-sample Kolmogorov distance of a batch against a reference CDF:
/// `max_i max(F(x_(i)) − i/n, (i+1)/n − F(x_(i)))` on the sorted sample.
///
/// Used for checks against closed-form limit laws (the order-1 limit is
/// Gaussian); the two-sample form serves everywhere else, since higher-order
/// limit laws have no closed CDF.
pub fn kolmogorov_one_sample<F>(samples: &[f64], cdf: F) -> Result<DistanceReport, MetricsError>
where
    F: Fn(f64) -> f64,
{
    if samples.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    let x = sorted(samples);
    let n = x.len() as f64;
    let mut d = 0f64;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let band = dkw_band_99(x.len());
    Ok(DistanceReport {
        statistic: d,
        n_a: x.len(),
        n_b: x.len(),
        dkw_band_99: band,
        below_band: d < band,
    })
}

/// Empirical Lévy concentration function
/// `Q̂(ε) = max_i #{k : x_k ∈ [x_i, x_i + ε]}/n`,
/// computed by a sorted two-pointer sweep.
///
/// Any window `(z, z+ε]` attaining the population supremum can slide until
/// it abuts a sample point, so restricting the left endpoints to the sample
/// itself loses nothing; the closed left end makes `Q̂(0)` the largest tie
/// fraction rather than 0. `Q̂` is nondecreasing in `ε`, lives in
/// `(0, 1]`, and satisfies `Q̂(ε) = ρ̂(X+ε, X)` exactly on a shared sample
/// (barring sample pairs exactly `ε` apart, where the closed window counts
/// one extra point).
///
/// ```
/// use hermite_limits::metrics::levy_concentration;
///
/// // brute-force over candidate windows gives 2/3 for this batch
/// let q = levy_concentration(&[1.0, 1.0, 2.0], 0.5).unwrap();
/// assert!((q - 2.0 / 3.0).abs() < 1e-15);
/// ```
pub fn levy_concentration(samples: &[f64], eps: f64) -> Result<f64, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    if !(eps >= 0.0) {
        return Err(MetricsError::OutOfRange { name: "eps", value: eps });
    }
    let x = sorted(samples);
    let n = x.len();
    let (mut j, mut best) = (0usize, 1usize);
    for i in 0..n {
        if j < i {
            j = i;
        }
        while j + 1 < n && x[j + 1] <= x[i] + eps {
            j += 1;
        }
        best = best.max(j - i + 1);
    }
    Ok(best as f64 / n as f64)
}

/// Anti-concentration bound for an order-`kappa` Wiener-chaos variable:
///
/// `P(|X − t| ≤ ε̂) ≤ c_κ · ε̂^{1/κ} / (κ!·kernel_norm_sq + t²)^{1/κ}`,
///
/// the Carbery–Wright small-ball inequality with the chaos variance
/// `Var X = κ!·kernel_norm_sq` in the denominator. `kernel_norm_sq` is the
/// squared weighted `L²` norm of the chaos kernel — for the limit
/// functionals of this crate, `limit_variance(cfg) / κ!`. The constant
/// `c_κ` is existential in the underlying inequality; calibrated defaults
/// ship in [`default_c_kappa`].
pub fn carbery_wright_bound(
    kappa: usize,
    eps_hat: f64,
    t: f64,
    kernel_norm_sq: f64,
    c_kappa: f64,
) -> Result<f64, MetricsError> {
    if kappa < 1 {
        return Err(MetricsError::OutOfRange { name: "kappa", value: kappa as f64 });
    }
    if !(eps_hat > 0.0 && eps_hat.is_finite()) {
        return Err(MetricsError::OutOfRange { name: "eps_hat", value: eps_hat });
    }
    if !(kernel_norm_sq > 0.0 && kernel_norm_sq.is_finite()) {
        return Err(MetricsError::OutOfRange { name: "kernel_norm_sq", value: kernel_norm_sq });
    }
    if !(c_kappa > 0.0 && c_kappa.is_finite()) {
        return Err(MetricsError::OutOfRange { name: "c_kappa", value: c_kappa });
    }
    if !t.is_finite() {
        return Err(MetricsError::OutOfRange { name: "t", value: t });
    }
    let denom = factorial(kappa) * kernel_norm_sq + t * t;
    Ok(c_kappa * (eps_hat / denom).powf(1.0 / kappa as f64))
}

/// Calibrated default `c_κ` for [`carbery_wright_bound`], `κ ∈ {1, 2, 3}`.
///
/// The underlying inequality proves `c_κ` exists but gives no value, so the
/// defaults are empirical: one batch of 20 000 replicates of the limit law
/// at the flagship parameters per order (κ=1: α=0.5 band sampler; κ=2:
/// α=0.3 band sampler; κ=3: α=0.2 tensor sampler at Λ=256 — all d=1, unit
/// interval, master seed `derive(0x5EED_F0A1, 17)`), the maximum over the
/// grid ε̂ ∈ {0.05, 0.1, 0.2} × t ∈ {0, 1} of the empirical ratio
/// `P̂(|X−t| ≤ ε̂)·(Var X + t²)^{1/κ}/ε̂^{1/κ}` (measured 1.51, 0.39,
/// 0.22), times a 1.25 safety factor, rounded up. The ignored test
/// `recalibrate_c_kappa_defaults` re-derives them.
pub fn default_c_kappa(kappa: usize) -> Option<f64> {
    match kappa {
        1 => Some(1.89),
        2 => Some(0.49),
        3 => Some(0.28),
        _ => None,
    }
}

/// Least-squares slope of `ln Q̂(ε)` against `ln ε` — an empirical estimate
/// of the concentration exponent `a` in `Q(X, ε) ≤ C·ε^a`.
///
/// A bounded density forces `a = 1`; for a general order-κ chaos variable
/// the anti-concentration bound guarantees at least `a = 1/κ`. The grid
/// must hold at least 3 positive points spanning a decade, so the fit sees
/// genuine scale separation. `Q̂ ≥ 1/n` always, so the logarithm is safe.
pub fn concentration_exponent(samples: &[f64], eps_grid: &[f64]) -> Result<f64, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    if eps_grid.len() < 3 || eps_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(MetricsError::DegenerateGrid);
    }
    let lo = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps_grid.iter().cloned().fold(0.0f64, f64::max);
    if hi / lo < 10.0 {
        return Err(MetricsError::DegenerateGrid);
    }
    let pts: Vec<(f64, f64)> = eps_grid
        .iter()
        .map(|&e| Ok((e.ln(), levy_concentration(samples, e)?.ln())))
        .collect::<Result<_, MetricsError>>()?;
    let n = pts.len() as f64;
    let (mu, mv) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mu).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    Ok(sxy / sxx)
}

/// Empirical probe of the smoothing inequality
///
/// `ρ(X+Y, Z) ≤ ρ(X, Z) + Q(Z, ε) + P(|Y| ≥ ε)`,
///
/// which splits the distance of a perturbed variable to a reference into
/// the unperturbed distance, the reference's concentration at scale `ε`,
/// and the perturbation's tail mass. All four quantities are estimated from
/// equally sized batches (`X+Y` computed replicate-wise, so `x` and `y`
/// must come from the same pairing), and the check allows three 99% DKW
/// bands of statistical slack — one per estimated distance-scale term.
pub fn smoothing_inequality_check(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    eps: f64,
) -> Result<bool, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() != z.len() {
        return Err(MetricsError::LengthMismatch { left: x.len(), right: z.len() });
    }
    if x.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(MetricsError::OutOfRange { name: "eps", value: eps });
    }
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let lhs = kolmogorov_two_sample(&xy, z)?.statistic;
    let rho_xz = kolmogorov_two_sample(x, z)?.statistic;
    let q_z = levy_concentration(z, eps)?;
    let tail = y.iter().filter(|v| v.abs() >= eps).count() as f64 / y.len() as f64;
    let slack = 3.0 * dkw_band_99(x.len());
    Ok(lhs <= rho_xz + q_z + tail + slack)
}
