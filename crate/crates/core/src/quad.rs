//! Gauss–Legendre rules and a panel-based adaptive integrator.
//!
//! Nodes and weights are generated at first use by Newton iteration on the
//! Legendre polynomials, then cached, so there are no hard-coded tables.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

type Rule = (&'static [f64], &'static [f64]);

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
/// Computed rules are leaked; only a handful of orders are ever requested.
pub fn gauss_legendre(n: usize) -> Rule {
    static LEAKED: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let map = LEAKED.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().expect("gauss rule cache poisoned");
    if let Some(&rule) = guard.get(&n) {
        return rule;
    }
    let (x, w) = compute_gauss_legendre(n);
    let rule = (
        &*Box::leak(x.into_boxed_slice()),
        &*Box::leak(w.into_boxed_slice()),
    );
    guard.insert(n, rule);
    rule
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based starting guess for the i-th root.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // Legendre recurrence for P_n(z) and P_{n-1}(z).
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let z1 = z;
            z -= p0 / dp;
            if (z - z1).abs() < 1e-15 {
                let dp = {
                    let (mut p0, mut p1) = (1.0, 0.0);
                    for j in 0..n {
                        let p2 = p1;
                        p1 = p0;
                        p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
                    }
                    n as f64 * (z * p0 - p1) / (z * z - 1.0)
                };
                x[i] = -z;
                x[n - 1 - i] = z;
                let wi = 2.0 / ((1.0 - z * z) * dp * dp);
                w[i] = wi;
                w[n - 1 - i] = wi;
                break;
            }
        }
    }
    (x, w)
}

/// ∫_a^b f dx with the cached n-point rule.
pub fn fixed_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (&xi, &wi) in x.iter().zip(w) {
        acc += wi * f(mid + half * xi);
    }
    acc * half
}

/// Result of [`adaptive_panel`].
#[derive(Debug, Clone, Copy)]
pub struct PanelEstimate {
    pub value: f64,
    pub error: f64,
    /// Number of leaf panels evaluated.
    pub panels: usize,
}

/// Adaptive bisection of [a, b]: each panel is accepted when the 15- and
/// 31-point Gauss values agree to `rel_tol` (or the panel stops mattering
/// against `floor`).
pub fn adaptive_panel<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    floor: f64,
    max_depth: usize,
) -> PanelEstimate {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        rel_tol: f64,
        floor: f64,
        depth: usize,
        out: &mut PanelEstimate,
    ) {
        let coarse = fixed_panel(f, a, b, 15);
        let fine = fixed_panel(f, a, b, 31);
        let err = (fine - coarse).abs();
        if depth == 0 || err <= rel_tol * fine.abs() + floor {
            out.value += fine;
            out.error += err;
            out.panels += 1;
            return;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, rel_tol, floor, depth - 1, out);
        recurse(f, mid, b, rel_tol, floor, depth - 1, out);
    }
    let mut out = PanelEstimate {
        value: 0.0,
        error: 0.0,
        panels: 0,
    };
    recurse(f, a, b, rel_tol, floor, max_depth, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        // 15-point rule is exact through degree 29.
        let f = |x: f64| x.powi(12) - 3.0 * x.powi(5) + 2.0;
        let got = fixed_panel(&f, -1.0, 1.0, 15);
        let want = 2.0 / 13.0 + 4.0;
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        for n in [15, 24, 31] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫₀^1 e^{-1000 (x-0.3)²} dx = sqrt(pi/1000) (tails negligible)
        let f = |x: f64| (-1000.0 * (x - 0.3f64).powi(2)).exp();
        let est = adaptive_panel(&f, 0.0, 1.0, 1e-12, 0.0, 30);
        let want = (std::f64::consts::PI / 1000.0).sqrt();
        assert!(((est.value - want) / want).abs() < 1e-10);
    }
}
