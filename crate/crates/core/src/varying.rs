//! Slowly varying functions and quantitative remainder conditions.
//!
//! A positive measurable `L` is slowly varying (at infinity) when
//! `L(tr)/L(r) → 1` for every fixed `t > 0`. The rate results need more: a
//! remainder bound
//!
//! ```text
//! |1 - L(tr)/L(r)|  <=  C · g(r) · h_tau(t),      t >= 1, r large,      (*)
//! ```
//!
//! with `g` vanishing at infinity and `h_tau(t) = ln t` for `tau = 0`,
//! `(t^tau - 1)/tau` otherwise. Not every slowly varying function with a
//! second-order expansion satisfies (*) uniformly in `t`: the classic
//! counterexample is `ln²`, whose normalized remainder grows like
//! `2 + ln t / ln r` — bounded on any fixed scan but unbounded in `t`.
//! [`check_remainder_condition`] therefore reports both the maximum
//! normalized ratio and whether the ratio is still growing at the largest
//! scanned scale.

use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VaryingError {
    #[error("argument must be positive, got {value}")]
    NonPositiveArgument { value: f64 },
    #[error("scan grid is degenerate: {reason}")]
    DegenerateGrid { reason: String },
}

/// `h_tau(x)`: the canonical comparison function of the remainder condition.
///
/// `ln x` at `tau = 0`, `(x^tau - 1)/tau` otherwise; continuous in `tau`.
pub fn h_tau(tau: f64, x: f64) -> Result<f64, VaryingError> {
    if x <= 0.0 {
        return Err(VaryingError::NonPositiveArgument { value: x });
    }
    if tau == 0.0 {
        Ok(x.ln())
    } else {
        // expm1 keeps precision as tau -> 0 where x^tau - 1 cancels.
        Ok((tau * x.ln()).exp_m1() / tau)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SvKind {
    /// `L ≡ c`
    Constant(f64),
    /// `L(r) = ln^p(r)` (clamped to a tiny positive value for r <= 1)
    LogPower(f64),
    /// `L(r) = 1 + c·r^tau`, `tau < 0`
    PowerRemainder { c: f64, tau: f64 },
    /// caller-supplied closures
    Custom,
}

/// A slowly varying function together with its remainder data: the decay
/// envelope `g` and the exponent `tau` entering `h_tau`.
#[derive(Clone)]
pub struct SlowlyVarying {
    pub kind: SvKind,
    /// Remainder exponent used in `h_tau` comparisons.
    pub tau: f64,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    remainder_g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub description: String,
}

impl std::fmt::Debug for SlowlyVarying {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SlowlyVarying")
            .field("kind", &self.kind)
            .field("tau", &self.tau)
            .field("description", &self.description)
            .finish()
    }
}

impl SlowlyVarying {
    /// `L ≡ c`. The remainder is identically zero; `g` is a dummy `r^-1`.
    pub fn constant(c: f64) -> Self {
        assert!(c > 0.0);
        Self {
            kind: SvKind::Constant(c),
            tau: -1.0,
            eval: Arc::new(move |_| c),
            remainder_g: Arc::new(|r| 1.0 / r),
            description: format!("constant {c}"),
        }
    }

    /// `L(r) = ln^p r` with `g(r) = 1/ln r`, `tau = 0`.
    ///
    /// For `p = 1` the normalized remainder equals 1 exactly; for `p != 1`
    /// the remainder condition fails uniformly in `t` (see module docs).
    pub fn log_power(p: f64) -> Self {
        Self {
            kind: SvKind::LogPower(p),
            tau: 0.0,
            eval: Arc::new(move |r: f64| r.ln().max(1e-12).powf(p)),
            remainder_g: Arc::new(|r: f64| 1.0 / r.ln().max(1e-12)),
            description: format!("ln^{p}"),
        }
    }

    /// `L(r) = 1 + c·r^tau` with `g(r) = r^tau`; requires `tau < 0`.
    pub fn power_remainder(c: f64, tau: f64) -> Self {
        assert!(tau < 0.0, "power remainder needs tau < 0");
        Self {
            kind: SvKind::PowerRemainder { c, tau },
            tau,
            eval: Arc::new(move |r: f64| 1.0 + c * r.powf(tau)),
            remainder_g: Arc::new(move |r: f64| r.powf(tau)),
            description: format!("1 + {c}·r^{tau}"),
        }
    }

    /// Arbitrary closures; the caller vouches for slow variation.
    pub fn custom<L, G>(eval: L, remainder_g: G, tau: f64, description: impl Into<String>) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: SvKind::Custom,
            tau,
            eval: Arc::new(eval),
            remainder_g: Arc::new(remainder_g),
            description: description.into(),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    pub fn remainder_g(&self, r: f64) -> f64 {
        (self.remainder_g)(r)
    }
}

/// Result of scanning the remainder condition over an `(r, t)` grid.
#[derive(Debug, Clone)]
pub struct RemainderReport {
    /// Largest normalized ratio `|1 - L(tr)/L(r)| / (g(r)·h_tau(t))` seen.
    pub max_ratio: f64,
    /// Scale/argument where the maximum occurred.
    pub worst_r: f64,
    pub worst_t: f64,
    /// Whether the ratio is still increasing in `t` at the largest `r`:
    /// the signature of a function violating the condition uniformly.
    pub diverging: bool,
    /// `max_ratio <= cap` and not diverging.
    pub holds: bool,
    /// Cap the scan compared against.
    pub cap: f64,
}

/// Scan `|1 - L(tr)/L(r)| / (g(r)·h_tau(t))` over the grid.
///
/// `t` entries must be `>= 1`; entries equal to 1 are skipped (the ratio is
/// 0/0 there). The divergence heuristic looks at the largest `r`: if the
/// normalized ratio climbs by more than 0.5 from the smallest to the largest
/// `t` and ends above 1.5, the condition is flagged as failing even when the
/// scan maximum stays under `cap`. Calibration: `ln` gives a constant ratio
/// 1, `1 + c·r^tau` a constant `-tau·c/L(r)`, while `ln²` climbs from ~2 to
/// 3 on any scan with `t` reaching `r`.
pub fn check_remainder_condition(
    sv: &SlowlyVarying,
    r_grid: &[f64],
    t_grid: &[f64],
    cap: Option<f64>,
) -> Result<RemainderReport, VaryingError> {
    let cap = cap.unwrap_or(1e3);
    if r_grid.len() < 2 || t_grid.len() < 2 {
        return Err(VaryingError::DegenerateGrid {
            reason: "need at least two r and two t points".into(),
        });
    }
    if r_grid.iter().any(|&r| r <= 0.0) {
        return Err(VaryingError::DegenerateGrid { reason: "nonpositive r entry".into() });
    }
    if t_grid.iter().any(|&t| t < 1.0) {
        return Err(VaryingError::DegenerateGrid { reason: "t entries must be >= 1".into() });
    }

    let ratio = |r: f64, t: f64| -> Result<Option<f64>, VaryingError> {
        if t == 1.0 {
            return Ok(None);
        }
        let h = h_tau(sv.tau, t)?;
        let denom = sv.remainder_g(r) * h;
        if denom == 0.0 || !denom.is_finite() {
            return Err(VaryingError::DegenerateGrid {
                reason: format!("degenerate remainder denominator at r={r}, t={t}"),
            });
        }
        Ok(Some((1.0 - sv.eval(t * r) / sv.eval(r)).abs() / denom))
    };

    let mut max_ratio = 0.0;
    let mut worst = (r_grid[0], t_grid[0]);
    for &r in r_grid {
        for &t in t_grid {
            if let Some(q) = ratio(r, t)? {
                if q > max_ratio {
                    max_ratio = q;
                    worst = (r, t);
                }
            }
        }
    }

    // Divergence probe at the largest scanned scale.
    let r_max = r_grid.iter().cloned().fold(f64::MIN, f64::max);
    let mut ts: Vec<f64> = t_grid.iter().cloned().filter(|&t| t > 1.0).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let first = ratio(r_max, ts[0])?.unwrap();
    let last = ratio(r_max, *ts.last().unwrap())?.unwrap();
    let diverging = last - first > 0.5 && last > 1.5;

    Ok(RemainderReport {
        max_ratio,
        worst_r: worst.0,
        worst_t: worst.1,
        diverging,
        holds: max_ratio <= cap && !diverging,
        cap,
    })
}

/// Normalized remainder of a power of `L`:
/// `|1 - L^{k/2}(tr)/L^{k/2}(r)| / (g(r)·h_tau(t)·t^delta)`.
///
/// Finiteness of this ratio (uniformly in `t`) is what the variance bounds
/// actually consume; the extra `t^delta` buys room for any `delta > 0`.
pub fn lemma0_ratio(
    sv: &SlowlyVarying,
    k: u32,
    delta: f64,
    r: f64,
    t: f64,
) -> Result<f64, VaryingError> {
    if r <= 0.0 {
        return Err(VaryingError::NonPositiveArgument { value: r });
    }
    if t <= 1.0 {
        return Err(VaryingError::NonPositiveArgument { value: t - 1.0 });
    }
    assert!(delta > 0.0, "delta must be positive");
    let p = k as f64 / 2.0;
    let h = h_tau(sv.tau, t)?;
    let num = (1.0 - (sv.eval(t * r) / sv.eval(r)).powf(p)).abs();
    Ok(num / (sv.remainder_g(r) * h * t.powf(delta)))
}
