//! Quadrature rules on the base manifolds.
//!
//! Intervals use composite Gauss-Legendre, the circle the periodic trapezoid
//! rule, and the 2-sphere a product of Gauss-Legendre in colatitude with the
//! trapezoid rule in longitude. Weights are with respect to the reference
//! volume (Lebesgue, arc length, surface area).

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A one-dimensional rule: `(node, weight)` pairs.
pub type Rule1d = Vec<(f64, f64)>;

/// Composite Gauss-Legendre on `[a, b]` with `panels` equal panels.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> Rule1d {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut rule = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let lo = a + h * k as f64;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            rule.push((mid + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    rule
}

/// Periodic trapezoid rule with `n` nodes on `[0, period)`.
pub fn periodic_trapezoid(period: f64, n: usize) -> Rule1d {
    let h = period / n as f64;
    (0..n).map(|k| (h * k as f64, h)).collect()
}

/// Panel order used by every composite Gauss-Legendre rule in the crate.
pub const PANEL_ORDER: usize = 8;

/// Resolution control for the refinement loop: start at a resolution,
/// double until two successive estimates agree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSpec {
    /// Minimum resolution (panels per interval dimension, or nodes on a circle).
    pub min_resolution: usize,
    /// Multiplier applied to the automatically chosen starting resolution.
    pub oversample: f64,
    /// Maximum number of doublings before giving up.
    pub max_doublings: u32,
    /// Relative tolerance of the N vs 2N comparison.
    pub tolerance: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { min_resolution: 16, oversample: 1.0, max_doublings: 8, tolerance: 1e-6 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1, 2, 5, 8, 20] {
            let (x, w) = gauss_legendre(order);
            for deg in 0..(2 * order) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "order {order} deg {deg}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn high_order_nodes_are_sorted_and_weights_sum_to_two() {
        let (x, w) = gauss_legendre(200);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn composite_rule_integrates_exp() {
        let rule = composite_gauss_legendre(0.0, 1.0, 4, PANEL_ORDER);
        let got: f64 = rule.iter().map(|(x, w)| w * x.exp()).sum();
        assert!((got - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_is_spectral_on_periodic_functions() {
        let rule = periodic_trapezoid(2.0 * PI, 32);
        let got: f64 = rule.iter().map(|(t, w)| w * (t.cos()).exp()).sum();
        // 2 pi I_0(1)
        let want = 2.0 * PI * 1.266_065_877_752_008_4;
        assert!((got - want).abs() < 1e-13);
    }
}
