//! Gauss-Legendre panel quadrature with geometric grading toward the origin.
//!
//! The radial weight `r^{N-1}` is smooth on any panel bounded away from zero
//! but has unbounded derivatives at the origin for fractional N. A short
//! geometric ladder of octave panels below the first bulk panel restores full
//! Gauss-Legendre convergence there; the stub below the ladder carries mass
//! O(2^{-60 N}) and is dropped.

use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_newton(order: usize) -> GaussRule {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (pn, dpn) = legendre_and_derivative(n, x);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dpn) = legendre_and_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dpn * dpn);
    }
    GaussRule { nodes, weights }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Returns the cached rule for the supported orders 8, 16, 32.
pub fn gauss_rule(order: usize) -> &'static GaussRule {
    static RULE8: OnceLock<GaussRule> = OnceLock::new();
    static RULE16: OnceLock<GaussRule> = OnceLock::new();
    static RULE32: OnceLock<GaussRule> = OnceLock::new();
    match order {
        8 => RULE8.get_or_init(|| legendre_newton(8)),
        16 => RULE16.get_or_init(|| legendre_newton(16)),
        32 => RULE32.get_or_init(|| legendre_newton(32)),
        _ => panic!("unsupported Gauss-Legendre order {order}"),
    }
}

/// Single Gauss-Legendre panel on [a, b].
pub fn gauss_panel(f: impl Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let rule = gauss_rule(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
        acc += w * f(mid + half * x);
    }
    half * acc
}

/// Composite rule: `panels` equal panels on [a, b].
pub fn gauss_legendre_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, order: usize, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    // pairwise tree sum keeps the reduction order independent of evaluation
    // order, so parallel panel evaluation stays reproducible
    let partial: Vec<f64> = (0..panels)
        .map(|i| {
            let lo = a + i as f64 * width;
            gauss_panel(&f, lo, lo + width, order)
        })
        .collect();
    pairwise_sum(&partial)
}

/// Composite rule on [0, b] with `panels` bulk panels plus a geometric octave
/// ladder below the first bulk panel.
pub fn graded_panels(f: impl Fn(f64) -> f64, b: f64, order: usize, panels: usize) -> f64 {
    const LADDER: usize = 60;
    if b <= 0.0 {
        return 0.0;
    }
    let inner = b / panels as f64;
    let mut partial = Vec::with_capacity(panels + LADDER);
    let width = (b - inner) / panels as f64;
    for i in 0..panels {
        let lo = inner + i as f64 * width;
        partial.push(gauss_panel(&f, lo, lo + width, order));
    }
    let mut hi = inner;
    for _ in 0..LADDER {
        let lo = 0.5 * hi;
        partial.push(gauss_panel(&f, lo, hi, order));
        hi = lo;
    }
    pairwise_sum(&partial)
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nodes_of_low_order_rules() {
        let rule = gauss_rule(8);
        assert_eq!(rule.nodes.len(), 8);
        // classical 8-point extreme node
        assert_relative_eq!(rule.nodes[0], -0.9602898564975362, max_relative = 1e-13);
        assert_relative_eq!(rule.weights[0], 0.1012285362903763, max_relative = 1e-12);
        let total: f64 = rule.weights.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn panel_exact_on_polynomials() {
        // degree 15 polynomial is exact for the 8-point rule
        let f = |x: f64| x.powi(15) - 3.0 * x.powi(7) + x;
        let value = gauss_panel(f, 0.0, 2.0, 8);
        let exact = 2.0f64.powi(16) / 16.0 - 3.0 * 2.0f64.powi(8) / 8.0 + 2.0;
        assert_relative_eq!(value, exact, max_relative = 1e-13);
    }

    #[test]
    fn graded_handles_fractional_power() {
        // int_0^1 r^{1.5} dr = 0.4
        let value = graded_panels(|r| r.powf(1.5), 1.0, 32, 16);
        assert_relative_eq!(value, 0.4, max_relative = 1e-13);
        // int_0^1 r^{0.2} dr = 1/1.2
        let value = graded_panels(|r| r.powf(0.2), 1.0, 32, 16);
        assert_relative_eq!(value, 1.0 / 1.2, max_relative = 1e-12);
    }

    #[test]
    fn composite_gaussian_integral() {
        let value = gauss_legendre_panels(|x| (-x * x).exp(), 0.0, 10.0, 32, 32);
        assert_relative_eq!(value, 0.5 * std::f64::consts::PI.sqrt(), max_relative = 1e-14);
    }
}
