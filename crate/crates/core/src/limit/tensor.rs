//! Frequency-grid tensor sampler for the limit law (d = 1, κ ∈ {1, 2, 3}).
//!
//! The κ-fold spectral integral is discretized directly: the positive
//! half-line is cut at the cutoff `Λ` into `M` cells `[(m-1)δ, mδ]`, each
//! carrying an independent complex Gaussian amplitude, and the negative
//! cells are the Hermitian mirror. One replicate contracts the noise
//! tensor against the window kernel over **all** index tuples with the
//! frequency-diagonal expectation removed (a Wick power):
//!
//! ```text
//! X ≈ c₂^{κ/2} Σ_{m₁..m_κ} K̂_Δ(λ_{m₁}+…+λ_{m_κ}) :a_{m₁}⋯a_{m_κ}: ,
//! ```
//!
//! which is the order-κ Wick power of the (exactly Gaussian) trigonometric
//! field `Σ_m a_m e^{iλ_m x}` integrated over the window, and is evaluated
//! in `O(M log M)` by FFT convolution of the amplitude vector.
//!
//! [`TensorSampler::contract_excluded`] provides the literal off-diagonal
//! sum `Σ′` over tuples with `m_i ≠ ±m_j` instead. The two differ by the
//! diagonal cells only; those carry `Θ(δ^{2α})` of the variance — several
//! percent at any affordable grid — so the excluded form is kept as the
//! multilinear diagnostic (it vanishes identically on zero noise) while
//! batches always use the Wick-centered contraction, whose second moment
//! equals the full product quadrature
//! `κ! c₂^κ Σ K̂(λ_{m₁}+…+λ_{m_κ})² ∏ mass_{m_i}` exactly
//! ([`TensorSampler::exact_variance`]).

use super::{LimitConfig, LimitError};
use crate::fields::c2;
use crate::hermite::factorial;
use crate::seeding;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

type C64 = Complex<f64>;

/// Relative bound on the imaginary residual of a contraction; anything
/// above it means the Hermitian symmetry `a_{-m} = conj(a_m)` was broken.
const HERMITIAN_TOL: f64 = 1e-8;

/// Prepared state shared read-only by all replicates: cell masses, kernel
/// tables at the index-sum positions, FFT plans, and the exact second
/// moment of the discretized functional.
pub struct TensorSampler {
    kappa: usize,
    grid_step: f64,
    /// `M`: positive frequency cells; the amplitude vector has `2M` entries.
    m_cells: usize,
    /// `c₂^{κ/2}`.
    c2_pow: f64,
    /// `√(mass_m/δ)` for `m = 1..M`; `E|a_m|² = mass_m` exactly.
    root_mass: Vec<f64>,
    /// `σ_g² = Σ_p E|a_p|² = 2 Σ_m mass_m` over both signs.
    sum_mass_double: f64,
    /// `K̂_Δ(0) = |Δ|`.
    khat0: f64,
    /// `K̂_Δ` at the single-index positions `(p - M + ½)δ`, `p = 0..2M-1`.
    k1: Vec<f64>,
    /// `K̂_Δ` at the two-index sums `(q - (2M-1))δ`, `q = 0..4M-2` (κ = 2).
    k2: Vec<f64>,
    /// `K̂_Δ` at the three-index sums `(t - 3M + 3/2)δ`, `t = 0..6M-3` (κ = 3).
    k3: Vec<f64>,
    /// `K̂_Δ(2·pos_p)` — the `m₁ = m₂` diagonal of the excluded sum (κ = 2).
    k_diag2: Vec<f64>,
    /// `K̂_Δ(3·pos_p)` — the all-tied diagonal of the excluded sum (κ = 3).
    k_diag3: Vec<f64>,
    /// FFT size (power of two covering the longest convolution), κ ≥ 2.
    fft_n: usize,
    fft_fwd: Option<Arc<dyn Fft<f64>>>,
    fft_inv: Option<Arc<dyn Fft<f64>>>,
    exact_variance: f64,
}

impl TensorSampler {
    /// Build masses, kernel tables and FFT plans, and compute the exact
    /// discrete variance.
    ///
    /// # Errors
    ///
    /// [`LimitError::UnsupportedOrder`] unless `d = 1` and `κ ∈ {1, 2, 3}`.
    pub fn prepare(cfg: &LimitConfig) -> Result<Self, LimitError> {
        cfg.validate()?;
        if cfg.d != 1 || !(1..=3).contains(&cfg.kappa) {
            return Err(LimitError::UnsupportedOrder { kappa: cfg.kappa, d: cfg.d });
        }
        let kappa = cfg.kappa;
        let delta = cfg.grid_step;
        let m = cfg.radial_nodes();
        let alpha = cfg.alpha;
        let c = c2(1, alpha)?;

        // exact cell masses ∫_{(m-1)δ}^{mδ} u^{α-1} du (midpoint-density
        // weights would bias the order-1 marginal by M^{-α})
        let mut mass = Vec::with_capacity(m);
        let mut prev = 0.0f64;
        for i in 1..=m {
            let edge = (i as f64 * delta).powf(alpha);
            mass.push((edge - prev) / alpha);
            prev = edge;
        }
        let sum_mass_double = 2.0 * mass.iter().sum::<f64>();
        let root_mass: Vec<f64> = mass.iter().map(|&w| (w / delta).sqrt()).collect();

        let khat = |x: f64| cfg.window.indicator_ft(&[x]);
        let pos = |p: usize| (p as f64 - m as f64 + 0.5) * delta;
        let k1: Vec<f64> = (0..2 * m).map(|p| khat(pos(p))).collect();
        let (mut k2, mut k3) = (Vec::new(), Vec::new());
        let (mut k_diag2, mut k_diag3) = (Vec::new(), Vec::new());
        match kappa {
            2 => {
                k2 = (0..4 * m - 1)
                    .map(|q| khat((q as f64 - (2 * m - 1) as f64) * delta))
                    .collect();
                k_diag2 = (0..2 * m).map(|p| khat(2.0 * pos(p))).collect();
            }
            3 => {
                k3 = (0..6 * m - 2)
                    .map(|t| khat((t as f64 - 3.0 * m as f64 + 1.5) * delta))
                    .collect();
                k_diag3 = (0..2 * m).map(|p| khat(3.0 * pos(p))).collect();
            }
            _ => {}
        }

        let (fft_n, fft_fwd, fft_inv) = if kappa >= 2 {
            let need = if kappa == 2 { 4 * m - 1 } else { 6 * m - 2 };
            let n = need.next_power_of_two();
            let mut planner = FftPlanner::new();
            (n, Some(planner.plan_fft_forward(n)), Some(planner.plan_fft_inverse(n)))
        } else {
            (0, None, None)
        };

        let mut sampler = Self {
            kappa,
            grid_step: delta,
            m_cells: m,
            c2_pow: c.powf(kappa as f64 / 2.0),
            root_mass,
            sum_mass_double,
            khat0: khat(0.0),
            k1,
            k2,
            k3,
            k_diag2,
            k_diag3,
            fft_n,
            fft_fwd,
            fft_inv,
            exact_variance: 0.0,
        };

        // Var X = κ! c₂^κ Σ K̂(index-sum position)² · (mass⋆…⋆mass): the
        // κ-fold convolution of the signed mass vector
        let sgn: Vec<C64> = (0..2 * m)
            .map(|p| {
                let w = if p < m { mass[m - 1 - p] } else { mass[p - m] };
                C64::new(w, 0.0)
            })
            .collect();
        let var_sum = match kappa {
            1 => sampler.k1.iter().zip(&sgn).map(|(k, w)| k * k * w.re).sum::<f64>(),
            _ => {
                let conv = sampler.convolve_power(&sgn, kappa as u32);
                let table = if kappa == 2 { &sampler.k2 } else { &sampler.k3 };
                table
                    .iter()
                    .zip(&conv)
                    .map(|(k, v)| k * k * v.re.max(0.0))
                    .sum::<f64>()
            }
        };
        sampler.exact_variance = factorial(kappa) * c.powi(kappa as i32) * var_sum;
        Ok(sampler)
    }

    /// The Hermitian amplitude vector for one replicate: `2M` complex
    /// entries, `a[M-1+m] = √(mass_m/δ)·W_m` for the positive cells
    /// (`W_m` has independent real and imaginary parts of variance `δ/2`,
    /// drawn in that order for `m = 1..M`) and `a[p] = conj(a[2M-1-p])`
    /// on the mirror half.
    pub fn noise(&self, seed: u64) -> Vec<C64> {
        let mut rng = seeding::rng_from(seed);
        let sd = (self.grid_step * 0.5).sqrt();
        let m = self.m_cells;
        let mut a = vec![C64::default(); 2 * m];
        for i in 0..m {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let amp = C64::new(re * sd, im * sd) * self.root_mass[i];
            a[m + i] = amp;
            a[m - 1 - i] = amp.conj();
        }
        a
    }

    /// One replicate: draw the noise and contract it (Wick-centered).
    pub fn sample(&self, seed: u64) -> Result<f64, LimitError> {
        self.contract(&self.noise(seed))
    }

    /// Wick-centered contraction over **all** index tuples — the production
    /// estimator. Unbiased for the discretized functional at every grid;
    /// its second moment is [`Self::exact_variance`].
    ///
    /// Note the Wick centering is an expectation subtraction, not a
    /// multilinear form: on identically zero noise it returns the negative
    /// centering constant (`-c₂ K̂(0) σ_g²` at κ = 2), not zero — use
    /// [`Self::contract_excluded`] when multilinearity in the noise is the
    /// property under test.
    pub fn contract(&self, a: &[C64]) -> Result<f64, LimitError> {
        assert_eq!(a.len(), 2 * self.m_cells, "amplitude vector length mismatch");
        let total = match self.kappa {
            1 => dot(&self.k1, a),
            2 => {
                let conv = self.convolve_power(a, 2);
                dot(&self.k2, &conv) - C64::new(self.khat0 * self.sum_mass_double, 0.0)
            }
            _ => {
                let conv = self.convolve_power(a, 3);
                let s1 = dot(&self.k1, a);
                dot(&self.k3, &conv) - s1 * (3.0 * self.sum_mass_double)
            }
        };
        self.finish(total * self.c2_pow)
    }

    /// Literal off-diagonal sum `Σ′` over tuples with `m_i ≠ ±m_j` for all
    /// `i ≠ j`, by inclusion–exclusion on the tied pairs. Multilinear in
    /// the noise (zero noise contracts to exactly zero), but undershoots
    /// the limit variance by the `Θ(δ^{2α})` diagonal mass it drops.
    pub fn contract_excluded(&self, a: &[C64]) -> Result<f64, LimitError> {
        assert_eq!(a.len(), 2 * self.m_cells, "amplitude vector length mismatch");
        let m = self.m_cells;
        let total = match self.kappa {
            1 => dot(&self.k1, a),
            2 => {
                let conv = self.convolve_power(a, 2);
                let full = dot(&self.k2, &conv);
                // tied pairs: m₂ = m₁ sits at K̂(2·pos), m₂ = -m₁ at K̂(0)
                let mut tied = C64::default();
                let mut abs2 = 0.0;
                for (p, &v) in a.iter().enumerate() {
                    tied += self.k_diag2[p] * v * v;
                    abs2 += v.norm_sqr();
                }
                full - tied - C64::new(self.khat0 * abs2, 0.0)
            }
            _ => {
                // Σ′ = full − 3·(pair 1,2 tied) + 2·(all tied): each of the
                // three tied pairs contributes equally, and every pairwise
                // intersection collapses to the all-tied set.
                let conv = self.convolve_power(a, 3);
                let full = dot(&self.k3, &conv);
                let s1 = dot(&self.k1, a);
                // pair-tied, free third index: m₂ = m₁ doubles the position
                // (the squared amplitudes live on the odd sub-lattice of the
                // two-index grid, so the same three-index kernel table
                // serves), m₂ = -m₁ cancels it
                let mut b = vec![C64::default(); 4 * m - 1];
                let mut abs2 = 0.0;
                for (p, &v) in a.iter().enumerate() {
                    b[2 * p] = v * v;
                    abs2 += v.norm_sqr();
                }
                let conv_ba = self.convolve_pair(&b, a);
                let pair_tied = dot(&self.k3, &conv_ba) + s1 * abs2;
                let mut all_tied = C64::default();
                for (p, &v) in a.iter().enumerate() {
                    all_tied += self.k_diag3[p] * v * v * v
                        + self.k1[p] * (2.0 * v + v.conj()) * v.norm_sqr();
                }
                full - 3.0 * pair_tied + 2.0 * all_tied
            }
        };
        self.finish(total * self.c2_pow)
    }

    /// Second moment of the Wick-centered contraction, exact for the grid:
    /// `κ! c₂^κ Σ_s K̂(s)² (mass^{⋆κ})(s)`.
    pub fn exact_variance(&self) -> f64 {
        self.exact_variance
    }

    /// Number of positive frequency cells `M`.
    pub fn cells(&self) -> usize {
        self.m_cells
    }

    /// Check the imaginary residual and return the real part.
    fn finish(&self, total: C64) -> Result<f64, LimitError> {
        let scale = total.re.abs().max(self.exact_variance.sqrt());
        let residual = total.im.abs() / scale;
        if residual > HERMITIAN_TOL {
            return Err(LimitError::HermitianViolation { residual });
        }
        Ok(total.re)
    }

    /// Linear self-convolution power by FFT: returns the first
    /// `pow·2M - (pow-1)` entries of `a ⋆ … ⋆ a`.
    fn convolve_power(&self, a: &[C64], pow: u32) -> Vec<C64> {
        let out_len = pow as usize * a.len() - (pow as usize - 1);
        let (fwd, inv) = self.plans();
        let mut buf = vec![C64::default(); self.fft_n];
        buf[..a.len()].copy_from_slice(a);
        fwd.process(&mut buf);
        for v in buf.iter_mut() {
            *v = if pow == 2 { *v * *v } else { *v * *v * *v };
        }
        inv.process(&mut buf);
        let scale = 1.0 / self.fft_n as f64;
        buf.truncate(out_len);
        for v in buf.iter_mut() {
            *v *= scale;
        }
        buf
    }

    /// Linear convolution of two different vectors by FFT.
    fn convolve_pair(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let out_len = x.len() + y.len() - 1;
        let (fwd, inv) = self.plans();
        let mut bx = vec![C64::default(); self.fft_n];
        let mut by = vec![C64::default(); self.fft_n];
        bx[..x.len()].copy_from_slice(x);
        by[..y.len()].copy_from_slice(y);
        fwd.process(&mut bx);
        fwd.process(&mut by);
        for (u, v) in bx.iter_mut().zip(&by) {
            *u *= v;
        }
        inv.process(&mut bx);
        let scale = 1.0 / self.fft_n as f64;
        bx.truncate(out_len);
        for v in bx.iter_mut() {
            *v *= scale;
        }
        bx
    }

    fn plans(&self) -> (&Arc<dyn Fft<f64>>, &Arc<dyn Fft<f64>>) {
        (
            self.fft_fwd.as_ref().expect("FFT plans exist for kappa >= 2"),
            self.fft_inv.as_ref().expect("FFT plans exist for kappa >= 2"),
        )
    }
}

fn dot(k: &[f64], v: &[C64]) -> C64 {
    debug_assert_eq!(k.len(), v.len());
    k.iter().zip(v).map(|(&k, &v)| k * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::limit::{
        limit_variance, sample_limit_tensor, truncated_functional_variance, LimitConfig,
        LimitMethod,
    };
    use approx::assert_relative_eq;

    fn tensor_cfg(kappa: usize, alpha: f64, cutoff: f64, n: usize, seed: u64) -> LimitConfig {
        LimitConfig {
            kappa,
            d: 1,
            alpha,
            window: Window::cube(1),
            cutoff,
            grid_step: 0.125,
            method: LimitMethod::Tensor,
            n_samples: n,
            seed,
        }
    }

    #[test]
    fn unsupported_orders_are_rejected() {
        let mut cfg = tensor_cfg(4, 0.2, 64.0, 1, 0);
        assert!(matches!(
            TensorSampler::prepare(&cfg),
            Err(LimitError::UnsupportedOrder { kappa: 4, d: 1 })
        ));
        cfg = tensor_cfg(1, 0.5, 64.0, 1, 0);
        cfg.d = 2;
        cfg.window = Window::cube(2);
        assert!(matches!(
            TensorSampler::prepare(&cfg),
            Err(LimitError::UnsupportedOrder { kappa: 1, d: 2 })
        ));
    }

    /// The FFT contraction must agree with the literal tuple sums it
    /// accelerates, for a reproducible noise draw.
    #[test]
    fn contractions_match_naive_tuple_sums() {
        let delta = 0.125;
        let khat = |x: f64| Window::cube(1).indicator_ft(&[x]);

        // κ = 2 at M = 64
        {
            let s = TensorSampler::prepare(&tensor_cfg(2, 0.3, 8.0, 1, 0)).unwrap();
            let m = s.cells();
            let a = s.noise(777);
            let pos = |p: usize| (p as f64 - m as f64 + 0.5) * delta;
            let mirror = |p: usize| 2 * m - 1 - p;
            let mut full = C64::default();
            let mut excluded = C64::default();
            for p in 0..2 * m {
                for q in 0..2 * m {
                    let term = khat(pos(p) + pos(q)) * a[p] * a[q];
                    full += term;
                    if q != p && q != mirror(p) {
                        excluded += term;
                    }
                }
            }
            let c = c2(1, 0.3).unwrap();
            let wick = c * (full - C64::new(khat(0.0) * s.sum_mass_double, 0.0));
            assert_relative_eq!(s.contract(&a).unwrap(), wick.re, max_relative = 1e-10);
            assert_relative_eq!(
                s.contract_excluded(&a).unwrap(),
                (c * excluded).re,
                max_relative = 1e-10
            );
        }

        // κ = 3 at M = 32
        {
            let s = TensorSampler::prepare(&tensor_cfg(3, 0.2, 4.0, 1, 0)).unwrap();
            let m = s.cells();
            let a = s.noise(778);
            let pos = |p: usize| (p as f64 - m as f64 + 0.5) * delta;
            let mirror = |p: usize| 2 * m - 1 - p;
            let tied = |p: usize, q: usize| p == q || q == mirror(p);
            let mut full = C64::default();
            let mut excluded = C64::default();
            let mut s1 = C64::default();
            for p in 0..2 * m {
                s1 += khat(pos(p)) * a[p];
                for q in 0..2 * m {
                    for r in 0..2 * m {
                        let term = khat(pos(p) + pos(q) + pos(r)) * a[p] * a[q] * a[r];
                        full += term;
                        if !tied(p, q) && !tied(p, r) && !tied(q, r) {
                            excluded += term;
                        }
                    }
                }
            }
            let c = c2(1, 0.2).unwrap();
            let wick = c.powf(1.5) * (full - s1 * (3.0 * s.sum_mass_double));
            assert_relative_eq!(s.contract(&a).unwrap(), wick.re, max_relative = 1e-9);
            assert_relative_eq!(
                s.contract_excluded(&a).unwrap(),
                (c.powf(1.5) * excluded).re,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn exact_variance_matches_naive_quadrature() {
        // κ = 2, M = 64: direct double sum over signed cells
        let s = TensorSampler::prepare(&tensor_cfg(2, 0.3, 8.0, 1, 0)).unwrap();
        let m = s.cells();
        let delta = 0.125;
        let alpha = 0.3;
        let mass = |i: usize| {
            (((i + 1) as f64 * delta).powf(alpha) - (i as f64 * delta).powf(alpha)) / alpha
        };
        let sgn_mass =
            |p: usize| if p < m { mass(m - 1 - p) } else { mass(p - m) };
        let pos = |p: usize| (p as f64 - m as f64 + 0.5) * delta;
        let khat = |x: f64| Window::cube(1).indicator_ft(&[x]);
        let mut var = 0.0;
        for p in 0..2 * m {
            for q in 0..2 * m {
                let k = khat(pos(p) + pos(q));
                var += k * k * sgn_mass(p) * sgn_mass(q);
            }
        }
        var *= 2.0 * c2(1, alpha).unwrap().powi(2);
        assert_relative_eq!(s.exact_variance(), var, max_relative = 1e-10);
    }

    #[test]
    fn exact_variance_reproduces_frozen_values() {
        // κ = 2, α = 0.3, δ = 0.125: the discrete variance is 6.900 at
        // Λ = 256 and sits 1.9–2.0% below the 50/7 limit at Λ = 1024
        // (pure box-truncation deficit; grid-step independent)
        let s = TensorSampler::prepare(&tensor_cfg(2, 0.3, 256.0, 1, 0)).unwrap();
        assert!(
            (s.exact_variance() - 6.900).abs() < 4e-3,
            "Λ=256 exact variance {} drifted from 6.900",
            s.exact_variance()
        );
        let s = TensorSampler::prepare(&tensor_cfg(2, 0.3, 1024.0, 1, 0)).unwrap();
        let deficit = s.exact_variance() / (50.0 / 7.0) - 1.0;
        assert!(
            (-0.0200..=-0.0188).contains(&deficit),
            "Λ=1024 deficit {deficit} drifted from -1.94%"
        );
    }

    #[test]
    fn discrete_variance_agrees_with_band_quadrature() {
        // the two samplers' internal variance references describe the same
        // truncated functional: discrete grid vs continuum quadrature
        for (kappa, alpha) in [(1, 0.5), (2, 0.3), (3, 0.2)] {
            let s =
                TensorSampler::prepare(&tensor_cfg(kappa, alpha, 1024.0, 1, 0)).unwrap();
            let continuum =
                truncated_functional_variance(Window::cube(1), alpha, kappa, 1024.0)
                    .unwrap();
            assert_relative_eq!(s.exact_variance(), continuum, max_relative = 1e-2);
        }
    }

    #[test]
    fn zero_noise_separates_the_two_contractions() {
        let s = TensorSampler::prepare(&tensor_cfg(2, 0.3, 64.0, 1, 0)).unwrap();
        let zero = vec![C64::default(); 2 * s.cells()];
        // the literal off-diagonal sum is multilinear: exactly zero
        assert_eq!(s.contract_excluded(&zero).unwrap(), 0.0);
        // the Wick-centered form subtracts the (deterministic) expectation
        let c = c2(1, 0.3).unwrap();
        let expected = -c * Window::cube(1).indicator_ft(&[0.0]) * s.sum_mass_double;
        assert_relative_eq!(s.contract(&zero).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn broken_symmetry_is_detected() {
        let s = TensorSampler::prepare(&tensor_cfg(1, 0.5, 16.0, 1, 0)).unwrap();
        let mut a = s.noise(5);
        a[s.cells()] += C64::new(0.0, 1.0); // corrupt one positive cell only
        match s.contract(&a) {
            Err(LimitError::HermitianViolation { residual }) => {
                assert!(residual > HERMITIAN_TOL)
            }
            other => panic!("expected HermitianViolation, got {other:?}"),
        }
    }

    #[test]
    fn batches_are_reproducible() {
        let cfg = tensor_cfg(2, 0.3, 16.0, 10, 4242);
        let a = sample_limit_tensor(&cfg).unwrap();
        let b = sample_limit_tensor(&cfg).unwrap();
        assert_eq!(a.values, b.values);
        let sampler = TensorSampler::prepare(&cfg).unwrap();
        for (i, &v) in a.values.iter().enumerate() {
            assert_eq!(v, sampler.sample(seeding::derive(cfg.seed, i as u64)).unwrap());
        }
    }

    #[test]
    fn third_order_sampling_smoke() {
        // κ = 3 marginal: mean near zero, variance near the exact discrete
        // value (loose band: the squared third-order chaos is heavy-tailed)
        let cfg = tensor_cfg(3, 0.2, 64.0, 2000, seeding::derive(0x5EED_F0A1, 12));
        let batch = sample_limit_tensor(&cfg).unwrap();
        let sampler = TensorSampler::prepare(&cfg).unwrap();
        let exact = sampler.exact_variance();
        let var = batch.sample_variance();
        assert!(
            (var / exact - 1.0).abs() < 0.4,
            "sample variance {var} vs exact {exact}"
        );
        assert!(
            batch.mean().abs() < 4.0 * (exact / 2000.0).sqrt(),
            "mean {} too far from zero",
            batch.mean()
        );
    }

    #[test]
    fn second_order_variance_matches_limit() {
        // spec example seed policy: master derive(0x5EED_F0A1, 6), trial 0
        let cfg = tensor_cfg(2, 0.3, 1024.0, 40_000, seeding::derive(0x5EED_F0A1, 6));
        let batch = sample_limit_tensor(&cfg).unwrap();
        let target = limit_variance(&cfg).unwrap();
        assert_relative_eq!(target, 50.0 / 7.0, max_relative = 1e-9);
        let var = batch.sample_variance();
        assert!(
            (var / target - 1.0).abs() < 0.05,
            "sample variance {var} not within 5% of {target}"
        );
        let se = (target / 40_000.0f64).sqrt();
        assert!(batch.mean().abs() < 3.0 * se, "mean {} beyond 3 SE", batch.mean());
    }
}
