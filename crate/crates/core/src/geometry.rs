//! Observation windows and their analytic companions.
//!
//! A window is a unit-size convex body (unit ball or unit cube, both centered
//! at the origin) observed at a scale `r > 0` through the homothety
//! `Δ(r) = rΔ`. Everything downstream needs exactly three things from it:
//!
//! * the volume `|Δ|` (and `|Δ(r)| = r^d |Δ|`),
//! * the Fourier transform `K_Δ(x) = ∫_Δ e^{i⟨x,u⟩} du` of the indicator,
//! * the distance density `ψ_Δ(r)(z)`: the pdf of `‖X - Y‖` for independent
//!   uniform points of `Δ(r)`.
//!
//! The distance density turns double integrals of radial functions into
//! one-dimensional ones,
//!
//! ```text
//! ∫∫_{Δ(r)²} Υ(‖x-y‖) dx dy = |Δ|² r^{2d} ∫₀^{diam Δ(r)} Υ(z) ψ_Δ(r)(z) dz,
//! ```
//!
//! which is how every singular variance integral in this crate is computed
//! ([`Window::reduce_double_integral`]).

use crate::quad::{self, QuadError};
use crate::special::bessel_j;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("{name} = {value} is outside the valid range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("distance must be nonnegative, got {z}")]
    NegativeDistance { z: f64 },
    #[error("quadrature failure: {0}")]
    QuadratureFailure(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Unit ball `{‖u‖ ≤ 1}`.
    Ball,
    /// Unit cube `(-1/2, 1/2)^d`.
    Cube,
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let d = d as f64;
    std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0)
}

/// Surface area of the unit sphere `S^{d-1}` in `R^d`.
pub fn unit_sphere_area(d: usize) -> f64 {
    let d = d as f64;
    2.0 * std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0)
}

/// A unit window (ball or cube) in dimension `d`; the observation scale `r`
/// stays a separate parameter so all `r`-dependence is analytic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Window {
    pub shape: Shape,
    pub d: usize,
}

impl Window {
    pub fn ball(d: usize) -> Self {
        assert!(d >= 1);
        Self { shape: Shape::Ball, d }
    }

    pub fn cube(d: usize) -> Self {
        assert!(d >= 1);
        Self { shape: Shape::Cube, d }
    }

    /// `|Δ|` for the unit window.
    pub fn volume(&self) -> f64 {
        match self.shape {
            Shape::Ball => unit_ball_volume(self.d),
            Shape::Cube => 1.0,
        }
    }

    /// Diameter of the unit window.
    pub fn diameter(&self) -> f64 {
        match self.shape {
            Shape::Ball => 2.0,
            Shape::Cube => (self.d as f64).sqrt(),
        }
    }

    /// `K_Δ(x) = ∫_Δ e^{i⟨x,u⟩} du`; real because Δ is symmetric.
    ///
    /// Cube: `∏_i 2 sin(x_i/2)/x_i`. Ball: `(2π)^{d/2} J_{d/2}(‖x‖)/‖x‖^{d/2}`.
    /// Both equal `|Δ|` at `x = 0`.
    pub fn indicator_ft(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d, "point dimension mismatch");
        match self.shape {
            Shape::Cube => x
                .iter()
                .map(|&xi| {
                    if xi.abs() < 1e-8 {
                        1.0 - xi * xi / 24.0
                    } else {
                        2.0 * (xi / 2.0).sin() / xi
                    }
                })
                .product(),
            Shape::Ball => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < 1e-10 {
                    return self.volume();
                }
                let d = self.d as f64;
                (2.0 * std::f64::consts::PI).powf(d / 2.0) * bessel_j(self.d as i32, norm)
                    / norm.powf(d / 2.0)
            }
        }
    }
}

/// Regularized incomplete beta `I_μ(p,q)`; requires `μ ∈ (0,1]`, `p,q > 0`.
pub fn incomplete_beta(mu: f64, p: f64, q: f64) -> Result<f64, GeometryError> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(GeometryError::OutOfRange { name: "mu", value: mu });
    }
    if p <= 0.0 {
        return Err(GeometryError::OutOfRange { name: "p", value: p });
    }
    if q <= 0.0 {
        return Err(GeometryError::OutOfRange { name: "q", value: q });
    }
    Ok(beta_reg(p, q, mu))
}

/// Kernel density estimate of the distance pdf of the unit cube, `d >= 2`,
/// where no simple closed form is wired in. Fixed seed, 10^6 point pairs,
/// Gaussian kernel with the Scott/Silverman bandwidth `1.06 σ n^{-1/5}`
/// (accuracy ~1e-2; used by tests and cube reductions only).
struct CubeDistanceKde {
    sorted: Vec<f64>,
    bandwidth: f64,
}

impl CubeDistanceKde {
    const PAIRS: usize = 1_000_000;

    fn build(d: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cb0e_d157_a9ce ^ d as u64);
        let mut dist = Vec::with_capacity(Self::PAIRS);
        for _ in 0..Self::PAIRS {
            let mut s = 0.0;
            for _ in 0..d {
                let delta: f64 = rng.gen::<f64>() - rng.gen::<f64>();
                s += delta * delta;
            }
            dist.push(s.sqrt());
        }
        dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = dist.len() as f64;
        let mean = dist.iter().sum::<f64>() / n;
        let var = dist.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (n - 1.0);
        let bandwidth = 1.06 * var.sqrt() * n.powf(-0.2);
        Self { sorted: dist, bandwidth }
    }

    fn eval(&self, z: f64) -> f64 {
        let h = self.bandwidth;
        let lo = self.sorted.partition_point(|&v| v < z - 8.0 * h);
        let hi = self.sorted.partition_point(|&v| v <= z + 8.0 * h);
        let norm = 1.0 / (self.sorted.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
        self.sorted[lo..hi]
            .iter()
            .map(|&v| {
                let t = (z - v) / h;
                (-0.5 * t * t).exp()
            })
            .sum::<f64>()
            * norm
    }
}

fn cube_kde(d: usize) -> Arc<CubeDistanceKde> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CubeDistanceKde>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(d).or_insert_with(|| Arc::new(CubeDistanceKde::build(d))).clone()
}

impl Window {
    /// `ψ_Δ(r)(z)`: pdf of the distance of two uniform points of `Δ(r)`.
    ///
    /// Ball: `d r^{-d} z^{d-1} I_{1-(z/2r)²}((d+1)/2, 1/2)`. Cube `d = 1`:
    /// triangle `2(r-z)/r²`. Cubes `d >= 2`: Monte Carlo kernel density
    /// (see [`CubeDistanceKde`]). Zero beyond the diameter.
    pub fn distance_density(&self, r: f64, z: f64) -> Result<f64, GeometryError> {
        if z < 0.0 {
            return Err(GeometryError::NegativeDistance { z });
        }
        if r <= 0.0 {
            return Err(GeometryError::OutOfRange { name: "r", value: r });
        }
        if z >= r * self.diameter() {
            return Ok(0.0);
        }
        let d = self.d as f64;
        match self.shape {
            Shape::Ball => {
                let mu = 1.0 - (z / (2.0 * r)).powi(2);
                if mu <= 0.0 {
                    return Ok(0.0);
                }
                let i = incomplete_beta(mu, (d + 1.0) / 2.0, 0.5)?;
                Ok(d * r.powf(-d) * z.powf(d - 1.0) * i)
            }
            Shape::Cube if self.d == 1 => Ok(2.0 * (r - z) / (r * r)),
            Shape::Cube => Ok(cube_kde(self.d).eval(z / r) / r),
        }
    }

    /// `∫∫_{Δ(r)²} Υ(‖x-y‖) dx dy` via the distance-density reduction
    /// `|Δ|² r^{2d} ∫₀^{diam} Υ ψ`. `Υ` may have an integrable singularity
    /// at zero (the long-range dependent case `Υ(z) = z^{-β}`, `β < d`).
    pub fn reduce_double_integral<F: Fn(f64) -> f64>(
        &self,
        r: f64,
        upsilon: F,
    ) -> Result<f64, GeometryError> {
        if r <= 0.0 {
            return Err(GeometryError::OutOfRange { name: "r", value: r });
        }
        let diam = r * self.diameter();
        let integral = quad::tanh_sinh(
            |z| upsilon(z) * self.distance_density(r, z).unwrap_or(f64::NAN),
            0.0,
            diam,
            1e-10,
        )?;
        Ok(self.volume().powi(2) * r.powf(2.0 * self.d as f64) * integral)
    }
}
