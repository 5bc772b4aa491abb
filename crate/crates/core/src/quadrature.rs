//! Gauss–Legendre rules and composite integration over panels.

use crate::error::{Error, Result};

/// Gauss–Legendre rule on the reference interval `[-1, 1]`.
///
/// An `order`-point rule integrates polynomials of degree `2 * order - 1`
/// exactly. Nodes are found by Newton iteration on the Legendre
/// three-term recurrence, seeded with the Chebyshev-like initial guess.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub const DEFAULT_ORDER: usize = 5;

    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::parameter("order", format!("need at least 2 points, got {order}")));
        }
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(order, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Ok(Self {
            order,
            nodes,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[lo, hi]` with a single panel.
    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Calls `visit(t, weight)` for every mapped node of the panel `[lo, hi]`.
    pub fn for_each_node<F: FnMut(f64, f64)>(&self, lo: f64, hi: f64, mut visit: F) {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            visit(mid + half * x, w * half);
        }
    }

    /// Composite integration over `panels` equal panels of `[lo, hi]`, with
    /// panels additionally split at every breakpoint that falls inside them.
    pub fn integrate_composite<F: Fn(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        panels: usize,
        breakpoints: &[f64],
        f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let width = (hi - lo) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let a = lo + p as f64 * width;
            let b = if p + 1 == panels { hi } else { a + width };
            for (u, v) in split_at(a, b, breakpoints) {
                acc += self.integrate(u, v, &f);
            }
        }
        acc
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_legendre(Self::DEFAULT_ORDER).expect("default order is valid")
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Splits `[a, b]` at every breakpoint strictly inside it. Breakpoints need
/// not be sorted.
pub fn split_at(a: f64, b: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&c| c > a && c < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut left = a;
    for c in cuts {
        out.push((left, c));
        left = c;
    }
    out.push((left, b));
    out
}
