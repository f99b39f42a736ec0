//! Approximate field simulation by spectral randomization.
//!
//! Because `B(0) = 1`, the spectral density is a probability density on
//! `R^d`, so the field has the representation `η(x) = E-limit` of
//!
//! ```text
//! η̂(x) = sqrt(2/n) Σ_{j=1..n} cos(⟨λ_j, x⟩ + φ_j),
//! ```
//!
//! with frequencies `λ_j ~ f(‖λ‖)dλ` and independent uniform phases. The
//! estimator is unbiased for the covariance at every pair of points and has
//! *exactly* unit variance for any `n` (the phase average of `cos²` is `1/2`
//! identically); only the Gaussianity is approximate, at rate `O(n^{-1/2})`.
//!
//! The radial law `∝ u^{d-1} f(u)` is sampled by inverse CDF on 4096
//! log-spaced nodes with monotone cubic (Fritsch–Carlson) interpolation —
//! log spacing resolves the long-range dependent pole `u^{alpha-1}` at the
//! origin, which concentrates a non-negligible share of frequency mass at
//! scales like `1e-20`.

use super::{FieldError, FieldModel, FieldSample, SampleMethod, WindowLattice};
use crate::geometry::{unit_sphere_area, Window};
use crate::quad;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

/// Monotone cubic Hermite interpolant (Fritsch–Carlson slopes).
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` strictly increasing, `y` strictly monotone.
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slope = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                slope[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let one_sided = |h0: f64, h1: f64, d0: f64, d1: f64| -> f64 {
            let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if m * d0 <= 0.0 {
                0.0
            } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                m
            }
        };
        slope[0] = one_sided(h[0], h[1], delta[0], delta[1]);
        slope[n - 1] = one_sided(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Self { x, y, slope }
    }

    fn eval(&self, q: f64) -> f64 {
        let n = self.x.len();
        let q = q.clamp(self.x[0], self.x[n - 1]);
        // segment index: last knot <= q
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&q).unwrap()) {
            Ok(k) => k.min(n - 2),
            Err(k) => k.saturating_sub(1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (q - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        self.y[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * self.slope[i] * (t3 - 2.0 * t2 + t)
            + self.y[i + 1] * (3.0 * t2 - 2.0 * t3)
            + h * self.slope[i + 1] * (t3 - t2)
    }
}

/// Tabulated inverse CDF of the radial frequency law `∝ u^{d-1} f(u)`.
pub struct RadialCdf {
    inverse: MonotoneCubic,
    /// mass of `R^d` under the (unnormalized) density — should be 1 for a
    /// correctly normalized model
    pub total_mass: f64,
}

const NODES: usize = 4096;
const TAIL_MASS: f64 = 1e-9;

impl RadialCdf {
    /// Tabulate for an explicit radial density. `f` is the d-dimensional
    /// density value at radius `u`; the radial weight `s_d u^{d-1}` is
    /// applied here.
    pub fn tabulate(
        f: impl Fn(f64) -> f64,
        d: usize,
    ) -> Result<Self, FieldError> {
        let s_d = unit_sphere_area(d);
        let g = |u: f64| s_d * u.powf(d as f64 - 1.0) * f(u);
        let fail = |reason: &str| FieldError::RadialCdfTabulationFailure { reason: reason.into() };

        let head_1 = quad::tanh_sinh(&g, 0.0, 1.0, 1e-11).map_err(|e| fail(&e.to_string()))?;
        let tail_1 = quad::semi_infinite_decaying(&g, 1.0, 0.5, 1e-11, 100_000)
            .map_err(|e| fail(&e.to_string()))?;
        let total = head_1 + tail_1;
        if !total.is_finite() || total <= 1e-6 {
            return Err(fail(&format!("radial mass {total} is not normalizable")));
        }

        // shrink the tabulation window until both clipped tails carry less
        // than TAIL_MASS of the law
        let mut u_max = 1.0f64;
        let mut tail = tail_1;
        let mut guard = 0;
        while tail / total > TAIL_MASS {
            u_max *= 2.0;
            tail = quad::semi_infinite_decaying(&g, u_max, 0.5 * u_max.sqrt(), 1e-11, 100_000)
                .map_err(|e| fail(&e.to_string()))?;
            guard += 1;
            if guard > 60 {
                return Err(fail("no integrable tail found"));
            }
        }
        let mut u_min = 1.0f64;
        let mut head = head_1;
        let mut guard = 0;
        while head / total > TAIL_MASS {
            u_min /= 4.0;
            head = quad::tanh_sinh(&g, 0.0, u_min, 1e-9).map_err(|e| fail(&e.to_string()))?;
            guard += 1;
            if guard > 300 {
                return Err(fail("no integrable origin found"));
            }
        }

        // cumulative masses on log-spaced nodes; 8-point panels in v = ln u
        // are accurate because g(e^v)e^v is a smooth power there
        let (v_lo, v_hi) = (u_min.ln(), u_max.ln());
        let rule = quad::gauss_legendre(8);
        let mut vs = vec![0.0; NODES];
        let mut cdf = vec![0.0; NODES];
        cdf[0] = head;
        for (i, v) in vs.iter_mut().enumerate() {
            *v = v_lo + (v_hi - v_lo) * i as f64 / (NODES - 1) as f64;
        }
        for i in 1..NODES {
            let (a, b) = (vs[i - 1], vs[i]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let inc: f64 = rule
                .0
                .iter()
                .zip(&rule.1)
                .map(|(&x, &w)| {
                    let v = mid + half * x;
                    let u = v.exp();
                    w * half * g(u) * u
                })
                .sum();
            if !(inc > 0.0) {
                return Err(fail(&format!(
                    "density not strictly positive near u = {}",
                    vs[i].exp()
                )));
            }
            cdf[i] = cdf[i - 1] + inc;
        }
        let norm = cdf[NODES - 1] + tail;
        for c in cdf.iter_mut() {
            *c /= norm;
        }
        Ok(Self { inverse: MonotoneCubic::new(cdf, vs), total_mass: total })
    }

    /// Radius at probability level `q ∈ (0,1)`; levels inside the clipped
    /// `1e-9` tails are pulled to the tabulation boundary.
    pub fn quantile(&self, q: f64) -> f64 {
        self.inverse.eval(q).exp()
    }
}

impl FieldModel {
    /// The radial inverse CDF of this model's spectral density, tabulated
    /// once and cached.
    pub fn radial_cdf(&self) -> Result<Arc<RadialCdf>, FieldError> {
        if let Some(c) = self.radial_cache.get() {
            return Ok(c.clone());
        }
        let f = self
            .spectral
            .clone()
            .ok_or_else(|| FieldError::SpectralDensityUnavailable { model: self.name.clone() })?;
        let built = Arc::new(RadialCdf::tabulate(move |u| f(u), self.d)?);
        let _ = self.radial_cache.set(built.clone());
        Ok(self.radial_cache.get().unwrap().clone())
    }
}

/// Cosine-synthesis core shared by every spectral randomization path:
/// draw `n_freq` frequencies (radius from `radial_quantile` at a uniform
/// level, direction uniform on the sphere) with independent uniform
/// phases, and evaluate `sqrt(2/n) Σ_j cos(⟨λ_j, x⟩ + φ_j)` at each of
/// the flattened points. The result has exactly unit variance at every
/// point for any `n_freq`; Gaussianity is approximate at `O(n^{-1/2})`.
pub(crate) fn cosine_field(
    d: usize,
    points: &[f64],
    n_freq: usize,
    mut radial_quantile: impl FnMut(f64) -> f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    assert!(n_freq >= 1, "need at least one frequency");
    assert_eq!(points.len() % d, 0, "flattened points must hold d coordinates each");
    let normal = StandardNormal;

    // frequencies + phases, flattened
    let mut freqs = Vec::with_capacity(n_freq * d);
    let mut phases = Vec::with_capacity(n_freq);
    for _ in 0..n_freq {
        let radius = radial_quantile(rng.gen::<f64>());
        loop {
            let dir: Vec<f64> = (0..d).map(|_| normal.sample(&mut *rng)).collect();
            let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                freqs.extend(dir.iter().map(|v| radius * v / norm));
                break;
            }
        }
        phases.push(rng.gen::<f64>() * 2.0 * std::f64::consts::PI);
    }

    let amp = (2.0 / n_freq as f64).sqrt();
    let n_pts = points.len() / d;
    (0..n_pts)
        .map(|i| {
            let x = &points[i * d..(i + 1) * d];
            amp * (0..n_freq)
                .map(|j| {
                    let lam = &freqs[j * d..(j + 1) * d];
                    let dot: f64 = lam.iter().zip(x).map(|(a, b)| a * b).sum();
                    (dot + phases[j]).cos()
                })
                .sum::<f64>()
        })
        .collect()
}

/// Draw one randomization sample of the field at the given points
/// (flattened, `model.d` coordinates per point).
pub fn simulate_randomization(
    model: &FieldModel,
    points: &[f64],
    n_freq: usize,
    seed: u64,
) -> Result<FieldSample, FieldError> {
    let d = model.d;
    let rcdf = model.radial_cdf()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = cosine_field(d, points, n_freq, |q| rcdf.quantile(q), &mut rng);

    Ok(FieldSample {
        d,
        points: points.to_vec(),
        values,
        seed,
        method: SampleMethod::Randomization,
        r: 0.0,
        h: 0.0,
        model_name: model.name.clone(),
    })
}

/// Randomization sample on the same cell-centered lattice the circulant
/// simulator uses for `(window, r, h)`.
pub fn simulate_randomization_lattice(
    model: &FieldModel,
    window: Window,
    r: f64,
    h: f64,
    n_freq: usize,
    seed: u64,
) -> Result<FieldSample, FieldError> {
    assert_eq!(window.d, model.d);
    let lattice = WindowLattice::build(window, r, h);
    let mut sample = simulate_randomization(model, &lattice.points, n_freq, seed)?;
    sample.r = r;
    sample.h = h;
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use approx::assert_relative_eq;

    #[test]
    fn monotone_cubic_interpolates_and_stays_monotone() {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        let interp = MonotoneCubic::new(x.clone(), y.clone());
        for (xi, yi) in x.iter().zip(&y) {
            assert_relative_eq!(interp.eval(*xi), *yi, epsilon = 1e-14);
        }
        let mut prev = f64::MIN;
        for i in 0..=1000 {
            let v = interp.eval(i as f64 / 1000.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
        // cubic accuracy between knots
        assert_relative_eq!(interp.eval(0.525), 0.525f64.powi(3), epsilon = 1e-4);
    }

    #[test]
    fn radial_quantiles_exponential_law() {
        // cauchy d=1: radial density s_1 u^0 e^{-u}/2 = e^{-u}, i.e. Exp(1);
        // quantile(q) = -ln(1-q) exactly
        let model = FieldModel::cauchy();
        let rcdf = model.radial_cdf().unwrap();
        assert_relative_eq!(rcdf.total_mass, 1.0, epsilon = 1e-8);
        for i in 1..100 {
            let q = i as f64 / 100.0;
            assert_relative_eq!(rcdf.quantile(q), -(1.0 - q).ln(), max_relative = 1e-6);
        }
    }

    #[test]
    fn radial_quantiles_power_law() {
        // CDF(u) = P(alpha/2, (u/U)²) (regularized lower incomplete gamma);
        // frozen high-precision quantiles
        let model = FieldModel::power_law(1, 0.5, 1.0);
        let rcdf = model.radial_cdf().unwrap();
        for (q, want) in [
            (0.1, 0.0082158763291775304),
            (0.5, 0.20898278003910612),
            (0.9, 0.86625219897950943),
            (0.99, 1.5600914787912383),
        ] {
            assert_relative_eq!(rcdf.quantile(q), want, max_relative = 1e-6);
        }
    }

    #[test]
    fn tabulation_rejects_degenerate_density() {
        let model = FieldModel::from_parts(
            "zero_density",
            1,
            1.0,
            crate::varying::SlowlyVarying::constant(1.0),
            None,
            |_| 1.0,
            Some(Arc::new(|_| 0.0)),
        );
        assert!(matches!(
            model.radial_cdf(),
            Err(FieldError::RadialCdfTabulationFailure { .. })
        ));
    }

    #[test]
    fn deterministic_and_bounded_single_term() {
        // n_freq = 1: η̂(x) = √2 cos(⟨λ,x⟩+φ) is bounded by √2
        let model = FieldModel::cauchy();
        let a = simulate_randomization(&model, &[0.0, 1.0, 2.0], 1, 5).unwrap();
        let b = simulate_randomization(&model, &[0.0, 1.0, 2.0], 1, 5).unwrap();
        assert_eq!(a.values, b.values);
        for rep in 0..200 {
            let s =
                simulate_randomization(&model, &[0.3], 1, seeding::derive(9, rep)).unwrap();
            assert!(s.values[0].abs() <= 2f64.sqrt() + 1e-12);
        }
    }

    #[test]
    fn single_point_variance_is_one() {
        let model = FieldModel::cauchy();
        let reps = 3000;
        let sq: Vec<f64> = (0..reps)
            .map(|rep| {
                let s =
                    simulate_randomization(&model, &[0.7], 1, seeding::derive(0xabc, rep))
                        .unwrap();
                s.values[0] * s.values[0]
            })
            .collect();
        let mean = sq.iter().sum::<f64>() / reps as f64;
        let var =
            sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps as f64 - 1.0);
        let se = (var / reps as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "variance {mean}, se {se}");
    }

    #[test]
    fn pair_covariance_matches_model() {
        let model = FieldModel::cauchy();
        let reps = 2000;
        let lag = 1.0; // B(1) = 0.5
        let prods: Vec<f64> = (0..reps)
            .map(|rep| {
                let s = simulate_randomization(
                    &model,
                    &[0.0, lag],
                    64,
                    seeding::derive(0xdef, rep),
                )
                .unwrap();
                s.values[0] * s.values[1]
            })
            .collect();
        let mean = prods.iter().sum::<f64>() / reps as f64;
        let var = prods.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (reps as f64 - 1.0);
        let se = (var / reps as f64).sqrt();
        assert!((mean - 0.5).abs() <= 3.0 * se, "pair covariance {mean}, se {se}");
    }

    #[test]
    fn lattice_wrapper_matches_circulant_grid() {
        let model = FieldModel::cauchy();
        let rand = simulate_randomization_lattice(
            &model,
            Window::ball(1),
            5.0,
            0.5,
            16,
            3,
        )
        .unwrap();
        let circ =
            super::super::simulate_circulant(&model, Window::ball(1), 5.0, 0.5, 3).unwrap();
        assert_eq!(rand.points, circ.points);
        assert_eq!(rand.r, 5.0);
        assert_eq!(rand.h, 0.5);
    }
}
