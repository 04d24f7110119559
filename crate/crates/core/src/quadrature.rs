//! Rules for the `s`-integral over the real line.
//!
//! On a periodic grid `|e^{isΔ}ǧ|⁴` does not decay in `s`: the discrete
//! propagator recurs. The default rule therefore never samples large `|s|`.
//! It integrates `|s| ≤ S` directly and maps `|s| > S` through the
//! pseudo-conformal (lens) transform to `|σ| < 1/(4S)` with `σ = 1/(4s)`,
//! where `e^{isΔ}ǧ` is a rescaled Fourier transform of `e^{iσ|x|²}ǧ`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadratureRule {
    /// Gauss–Legendre on `[-S, S]` plus mirrored Gauss–Legendre in
    /// `σ ∈ (-1/(4S), 1/(4S))` for the exterior.
    PseudoConformalSplit,
    /// Gauss–Legendre on `[-S, S]` only; valid while the propagated field
    /// has not reached the periodic boundary.
    GaussLegendreTruncated,
    /// Tanh–sinh in `θ` with `s = S·tan θ`; same caveat as the truncated rule.
    TanhSinhMapped,
}

impl QuadratureRule {
    pub fn name(self) -> &'static str {
        match self {
            QuadratureRule::PseudoConformalSplit => "split",
            QuadratureRule::GaussLegendreTruncated => "gauss_legendre",
            QuadratureRule::TanhSinhMapped => "tanh_sinh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "split" => Some(QuadratureRule::PseudoConformalSplit),
            "gauss_legendre" => Some(QuadratureRule::GaussLegendreTruncated),
            "tanh_sinh" => Some(QuadratureRule::TanhSinhMapped),
            _ => None,
        }
    }
}

/// Nodes and weights for the direct `s` samples and, for the split rule, the
/// inverted `σ` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureScheme {
    rule: QuadratureRule,
    s_max: f64,
    node_count: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    inverted_nodes: Vec<f64>,
    inverted_weights: Vec<f64>,
}

pub const DEFAULT_NODES: usize = 64;
pub const DEFAULT_S_MAX: f64 = 0.5;

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self::new(QuadratureRule::PseudoConformalSplit, DEFAULT_NODES, DEFAULT_S_MAX)
            .expect("default quadrature is valid")
    }
}

impl QuadratureScheme {
    /// `node_count` is the total number of propagations per evaluation. For
    /// the split rule `2⌊K/4⌋` of them go to the inverted part.
    pub fn new(rule: QuadratureRule, node_count: usize, s_max: f64) -> Result<Self> {
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature s_max must be positive, got {s_max}"
            )));
        }
        let (nodes, weights, inverted_nodes, inverted_weights) = match rule {
            QuadratureRule::PseudoConformalSplit => {
                if node_count < 4 {
                    return Err(Error::InvalidParameter(format!(
                        "split rule needs at least 4 nodes, got {node_count}"
                    )));
                }
                let half = node_count / 4;
                let (s, w) = gauss_legendre(node_count - 2 * half, -s_max, s_max);
                let (a, b) = gauss_legendre(half, 0.0, 0.25 / s_max);
                let mut sig: Vec<f64> = a.iter().rev().map(|v| -v).collect();
                sig.extend_from_slice(&a);
                let mut sw: Vec<f64> = b.iter().rev().copied().collect();
                sw.extend_from_slice(&b);
                (s, w, sig, sw)
            }
            QuadratureRule::GaussLegendreTruncated => {
                if node_count < 2 {
                    return Err(Error::InvalidParameter("need at least 2 nodes".into()));
                }
                let (s, w) = gauss_legendre(node_count, -s_max, s_max);
                (s, w, Vec::new(), Vec::new())
            }
            QuadratureRule::TanhSinhMapped => {
                if node_count < 3 || node_count % 2 == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "tanh-sinh needs an odd node count >= 3, got {node_count}"
                    )));
                }
                let (s, w) = tanh_sinh_tan(node_count, s_max);
                (s, w, Vec::new(), Vec::new())
            }
        };
        Ok(Self {
            rule,
            s_max,
            node_count,
            nodes,
            weights,
            inverted_nodes,
            inverted_weights,
        })
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn inverted_nodes(&self) -> &[f64] {
        &self.inverted_nodes
    }

    pub fn inverted_weights(&self) -> &[f64] {
        &self.inverted_weights
    }

    /// Integrates `f(s)` over the real line, using `f_inverted(σ)` for the
    /// exterior when the rule is split. `f_inverted` must already carry the
    /// Jacobian of the change of variables.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, f_inverted: impl Fn(f64) -> f64) -> f64 {
        let a: f64 = self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w * f(s)).sum();
        let b: f64 = self
            .inverted_nodes
            .iter()
            .zip(&self.inverted_weights)
            .map(|(&s, &w)| w * f_inverted(s))
            .sum();
        a + b
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let Some(deg) = NonZeroUsize::new(n) else {
        return (Vec::new(), Vec::new());
    };
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(deg)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Tanh–sinh rule in `θ ∈ (-π/2, π/2)` pushed through `s = scale·tan θ`.
fn tanh_sinh_tan(n: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let m = (n / 2) as i64;
    let h = 3.0 / m as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in -m..=m {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let theta = 0.5 * PI * u.tanh();
        let dtheta = 0.5 * PI * 0.5 * PI * t.cosh() / u.cosh().powi(2);
        let c = theta.cos();
        if c <= 0.0 {
            continue;
        }
        nodes.push(scale * theta.tan());
        weights.push(h * dtheta * scale / (c * c));
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(6, -2.0, 3.0);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(11)).sum();
        let exact = (3f64.powi(12) - 2f64.powi(12)) / 12.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn nodes_are_symmetric() {
        for rule in [
            QuadratureRule::PseudoConformalSplit,
            QuadratureRule::GaussLegendreTruncated,
            QuadratureRule::TanhSinhMapped,
        ] {
            let q = QuadratureScheme::new(rule, 33, 0.7).unwrap();
            for (list, wts) in [
                (q.nodes(), q.weights()),
                (q.inverted_nodes(), q.inverted_weights()),
            ] {
                let k = list.len();
                for i in 0..k {
                    assert!((list[i] + list[k - 1 - i]).abs() < 1e-14);
                    assert!((wts[i] - wts[k - 1 - i]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn split_rule_integrates_algebraic_tail() {
        // ∫ (1+4s²)^{-1} ds = π/2; exterior in σ = 1/(4s): ds = dσ/(4σ²),
        // (1+4s²)^{-1} = 4σ²/(4σ²+1), so the σ-integrand is 1/(4σ²+1).
        let q = QuadratureScheme::new(QuadratureRule::PseudoConformalSplit, 64, 0.5).unwrap();
        let v = q.integrate(|s| 1.0 / (1.0 + 4.0 * s * s), |t| 1.0 / (4.0 * t * t + 1.0));
        assert!((v - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_integrates_whole_line() {
        let q = QuadratureScheme::new(QuadratureRule::TanhSinhMapped, 81, 1.0).unwrap();
        let v = q.integrate(|s| 1.0 / (1.0 + s * s), |_| 0.0);
        assert!((v - PI).abs() < 1e-8, "{v}");
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(QuadratureScheme::new(QuadratureRule::PseudoConformalSplit, 3, 0.5).is_err());
        assert!(QuadratureScheme::new(QuadratureRule::TanhSinhMapped, 10, 0.5).is_err());
        assert!(QuadratureScheme::new(QuadratureRule::GaussLegendreTruncated, 8, -1.0).is_err());
    }
}
