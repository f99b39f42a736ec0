//! Gauss–Hermite quadrature.
//!
//! Nodes are found by Newton iteration on the orthonormal Hermite recurrence,
//! which keeps every intermediate value O(1) — no factorial overflow even at
//! order several hundred. The physicists' rule integrates against exp(-x^2);
//! the probabilists' wrapper rescales so that
//!
//!   ∫ g(w) φ(w) dw  ≈  Σ w_i g(x_i),   φ = standard normal density,
//!
//! with the weights summing to one.

/// Nodes and weights for ∫ f(x) exp(-x^2) dx, exact for degree 2n-1.
pub fn gauss_hermite_physicists(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least a 2-point rule");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut last = 0.0f64; // previous root
    let mut before_last = 0.0f64; // root before that
    for i in 0..m {
        // Stroud–Secrest style initial guesses, largest root first.
        let mut z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => last - 1.14 * nf.powf(0.426) / last,
            2 => 1.86 * last - 0.86 * before_last,
            3 => 1.91 * last - 0.91 * before_last,
            _ => 2.0 * last - before_last,
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            // Orthonormal recurrence: p_j(z), values stay O(1).
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        before_last = last;
        last = z;
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = 2.0 / (pp * pp);
        weights[i] = weights[n - 1 - i];
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and weights for expectations under the standard normal law.
pub fn gauss_hermite_probabilists(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_hermite_physicists(n);
    let s = std::f64::consts::PI.sqrt();
    let nodes = x.iter().map(|v| std::f64::consts::SQRT_2 * v).collect();
    let weights = w.iter().map(|v| v / s).collect();
    (nodes, weights)
}
