//! Composite Gauss-Legendre rules on intervals and on the ordered triangle
//! `a <= t2 <= t1 <= b`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operator::C64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
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

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

// P_n(x) and P_n'(x) by the three-term recurrence
fn legendre(n: usize, x: f64) -> (f64, f64) {
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
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Node counts for one- and two-dimensional rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    pub nodes_1d: usize,
    pub nodes_2d: usize,
}

pub const PANEL_ORDER: usize = 16;

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes_1d: 2048,
            nodes_2d: 2048,
        }
    }
}

impl QuadratureConfig {
    pub fn doubled(&self) -> Self {
        QuadratureConfig {
            nodes_1d: 2 * self.nodes_1d,
            nodes_2d: 2 * self.nodes_2d,
        }
    }
}

/// Composite rule: panels between ordered breakpoints, each carrying the same
/// Gauss-Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    rule: GaussLegendre,
    edges: Vec<f64>,
}

impl CompositeRule {
    /// About `nodes` points on `[a, b]`, panels of order [`PANEL_ORDER`].
    pub fn uniform(a: f64, b: f64, nodes: usize) -> Result<Self> {
        Self::with_breaks(&[a, b], nodes)
    }

    /// Like `uniform` but every breakpoint is a panel edge, so piecewise
    /// smooth integrands are integrated spectrally.
    pub fn with_breaks(breaks: &[f64], nodes: usize) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "quadrature breakpoints must be strictly increasing".into(),
            ));
        }
        let intervals = breaks.len() - 1;
        let panels_total = (nodes / PANEL_ORDER).max(intervals);
        let per = panels_total.div_ceil(intervals);
        let mut edges = Vec::with_capacity(intervals * per + 1);
        for w in breaks.windows(2) {
            for k in 0..per {
                edges.push(w[0] + (w[1] - w[0]) * k as f64 / per as f64);
            }
        }
        edges.push(*breaks.last().unwrap());
        Ok(CompositeRule {
            rule: GaussLegendre::new(PANEL_ORDER),
            edges,
        })
    }

    pub fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.panels() * self.rule.order()
    }

    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for p in self.edges.windows(2) {
            for (t, w) in self.rule.mapped(p[0], p[1]) {
                total += f(t) * w;
            }
        }
        total
    }

    pub fn integrate_real<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.integrate(|t| C64::new(f(t), 0.0)).re
    }

    /// `∫ dt1 ∫_{a}^{t1} dt2 f(t1, t2)`.
    pub fn triangle<F: Fn(f64, f64) -> C64>(&self, f: F) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for (p, outer) in self.edges.windows(2).enumerate() {
            for (t1, w1) in self.rule.mapped(outer[0], outer[1]) {
                let mut inner = C64::new(0.0, 0.0);
                for q in self.edges[..=p].windows(2) {
                    for (t2, w2) in self.rule.mapped(q[0], q[1]) {
                        inner += f(t1, t2) * w2;
                    }
                }
                for (t2, w2) in self.rule.mapped(outer[0], t1) {
                    inner += f(t1, t2) * w2;
                }
                total += inner * w1;
            }
        }
        total
    }

    /// `∫ dt1 a(t1) ∫_{a}^{t1} dt2 b(t2)` in `O(nodes · order)` evaluations,
    /// on the same nodes as [`CompositeRule::triangle`].
    pub fn triangle_separable<A, B>(&self, a: A, b: B) -> C64
    where
        A: Fn(f64) -> C64,
        B: Fn(f64) -> C64,
    {
        let mut total = C64::new(0.0, 0.0);
        let mut prefix = C64::new(0.0, 0.0);
        for outer in self.edges.windows(2) {
            let mut panel_b = C64::new(0.0, 0.0);
            for (t1, w1) in self.rule.mapped(outer[0], outer[1]) {
                panel_b += b(t1) * w1;
                let mut partial = C64::new(0.0, 0.0);
                for (t2, w2) in self.rule.mapped(outer[0], t1) {
                    partial += b(t2) * w2;
                }
                total += a(t1) * (prefix + partial) * w1;
            }
            prefix += panel_b;
        }
        total
    }
}
