//! Gauss–Legendre rules on the reference interval and affine images of it.

use gauss_quad::GaussLegendre;

/// A Gauss–Legendre rule with `order` points on `[-1, 1]`, nodes ascending.
///
/// Integrates polynomials of degree `2 * order - 1` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_legendre(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        if order == 1 {
            return Self {
                nodes: vec![0.0],
                weights: vec![2.0],
            };
        }
        let rule = GaussLegendre::new(order).expect("order >= 2 is always valid");
        let mut pairs: Vec<(f64, f64)> = rule.into_node_weight_pairs();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_positive_and_sum_to_length() {
        for q in 1..=12 {
            let rule = QuadratureRule::gauss_legendre(q);
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            let total: f64 = rule.on_interval(0.25, 0.75).map(|(_, w)| w).sum();
            assert!((total - 0.5).abs() < 1e-14, "q={q}: {total}");
            assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn exact_for_degree_two_q_minus_one() {
        for q in 1..=10 {
            let rule = QuadratureRule::gauss_legendre(q);
            for deg in 0..(2 * q) {
                let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                let want = 1.0 / (deg as f64 + 1.0);
                assert!((got - want).abs() < 1e-14, "q={q} deg={deg}: {got} vs {want}");
            }
        }
    }
}
