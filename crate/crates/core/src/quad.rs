//! Quadrature routines shared by the covariance, geometry and limit modules.
//!
//! Three integrators cover every integral in this crate:
//!
//! * [`tanh_sinh`] — double-exponential rule on a finite interval. Converges
//!   at spectral rate for smooth integrands and still converges for
//!   integrable algebraic endpoint singularities such as `z^(a-1)`, `a > 0`,
//!   which show up in every long-range dependent radial integral.
//! * [`composite_gl`] — fixed-order Gauss–Legendre on equal panels, for
//!   oscillatory but smooth integrands where the caller knows the frequency
//!   and picks the panel count.
//! * [`semi_infinite_decaying`] — panel sweep over `[a, ∞)` for integrands
//!   with an eventually dominating decay factor.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("quadrature did not converge: estimate {estimate}, last correction {correction}")]
    NotConverged { estimate: f64, correction: f64 },
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`.
///
/// The integrand is evaluated strictly inside the interval; distances to the
/// endpoints are computed in a cancellation-free form, so `f` may blow up at
/// `a` or `b` as long as the integral exists.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64, QuadError> {
    assert!(b > a, "tanh_sinh: empty interval [{a}, {b}]");
    let half = 0.5 * (b - a);
    const T_MAX: f64 = 4.0;
    const MAX_LEVEL: u32 = 10;

    // One abscissa: t -> (weight, offset from a, offset from b).
    // x = tanh(u), u = (pi/2) sinh t; 1 +- x written via exp(-2|u|) to keep
    // points near the endpoints exact.
    let node = |t: f64| -> (f64, f64, f64) {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let lo = 2.0 * e / (1.0 + e); // 1 - |x|
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() * (2.0 * (e.sqrt() / (1.0 + e))).powi(2);
        // (sech u)^2 = (2 e^{-|u|} / (1+e^{-2|u|}))^2
        if t >= 0.0 {
            (w, 2.0 - lo, lo)
        } else {
            (w, lo, 2.0 - lo)
        }
    };

    let eval = |t: f64| -> Result<f64, QuadError> {
        let (w, from_a, from_b) = node(t);
        if w < 1e-280 {
            return Ok(0.0);
        }
        // Evaluate against the nearer endpoint to keep the offset exact.
        let x = if from_a <= from_b { a + half * from_a } else { b - half * from_b };
        if x == a || x == b {
            // offset underflowed below the float spacing at the endpoint;
            // for any integrable singularity the lost mass is ~ w·f(x) -> 0
            return Ok(0.0);
        }
        let v = f(x);
        if !v.is_finite() {
            return Err(QuadError::NonFinite { x });
        }
        Ok(w * v)
    };

    let mut h = 1.0f64;
    let mut n = (T_MAX / h).ceil() as i64;
    let mut sum = eval(0.0)?;
    for k in 1..=n {
        sum += eval(k as f64 * h)? + eval(-(k as f64) * h)?;
    }
    let mut estimate = half * h * sum;

    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        n = (T_MAX / h).ceil() as i64;
        let mut odd = 0.0;
        let mut k = 1;
        while k <= n {
            odd += eval(k as f64 * h)? + eval(-(k as f64) * h)?;
            k += 2;
        }
        sum += odd;
        let refined = half * h * sum;
        let correction = (refined - estimate).abs();
        estimate = refined;
        if correction <= rel_tol * estimate.abs().max(1e-300) || correction == 0.0 {
            return Ok(estimate);
        }
    }
    // One more comparison at the final level before giving up.
    Err(QuadError::NotConverged { estimate, correction: f64::NAN })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre three-term recurrence; standard cosine
/// initial guesses. Exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    nodes[n / 2] = if n % 2 == 1 { 0.0 } else { nodes[n / 2] };
    (nodes, weights)
}

/// Composite Gauss–Legendre: 16-point rule on `panels` equal subintervals.
pub fn composite_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    composite_gl_order(f, a, b, panels, 16)
}

/// Composite Gauss–Legendre with a caller-chosen node count per panel.
pub fn composite_gl_order<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> f64 {
    let rule = gl_cached(order);
    let (xs, ws) = (&rule.0, &rule.1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(ws.iter()) {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

fn gl_cached(order: usize) -> std::sync::Arc<(Vec<f64>, Vec<f64>)> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(gauss_legendre(order)))
        .clone()
}

/// Integral over `[a, ∞)` of an eventually decaying integrand.
///
/// Sums 24-point Gauss–Legendre panels of width `panel_width` until four
/// consecutive panels each contribute less than `rel_tol` of the running
/// total in absolute value.
pub fn semi_infinite_decaying<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    panel_width: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<f64, QuadError> {
    assert!(panel_width > 0.0);
    let mut total = 0.0;
    let mut quiet = 0;
    for p in 0..max_panels {
        let lo = a + p as f64 * panel_width;
        let contribution = composite_gl_order(&f, lo, lo + panel_width, 1, 24);
        if !contribution.is_finite() {
            return Err(QuadError::NonFinite { x: lo });
        }
        total += contribution;
        if contribution.abs() <= rel_tol * total.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 4 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
    }
    Err(QuadError::NotConverged { estimate: total, correction: f64::NAN })
}
