//! Composite quadrature on a bounded interval.
//!
//! Gauss–Legendre nodes are computed by Newton iteration on the three-term
//! recurrence for `P_n`; the composite rule repeats them on equal panels.

use crate::error::{Error, Result};
use crate::numerics::Grid1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    Trapezoid,
    GaussLegendreComposite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub panels: usize,
    pub points_per_panel: usize,
}

impl QuadratureRule {
    pub fn gauss_legendre(panels: usize, points_per_panel: usize) -> Self {
        Self {
            kind: QuadratureKind::GaussLegendreComposite,
            panels: panels.max(1),
            points_per_panel: points_per_panel.max(1),
        }
    }

    /// Trapezoid rule with `panels` equal intervals.
    pub fn trapezoid(panels: usize) -> Self {
        Self {
            kind: QuadratureKind::Trapezoid,
            panels: panels.max(1),
            points_per_panel: 2,
        }
    }

    /// The same rule with twice as many panels.
    pub fn refined(&self) -> Self {
        Self {
            panels: self.panels * 2,
            ..*self
        }
    }

    /// Nodes and weights of the rule on `[lo, hi]`.
    pub fn nodes_weights(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let width = (hi - lo) / self.panels as f64;
        match self.kind {
            QuadratureKind::Trapezoid => {
                let n = self.panels + 1;
                let nodes: Vec<f64> = (0..n)
                    .map(|i| if i + 1 == n { hi } else { lo + i as f64 * width })
                    .collect();
                let mut weights = vec![width; n];
                weights[0] = 0.5 * width;
                weights[n - 1] = 0.5 * width;
                (nodes, weights)
            }
            QuadratureKind::GaussLegendreComposite => {
                let (ref_nodes, ref_weights) = gauss_legendre_nodes(self.points_per_panel);
                let mut nodes = Vec::with_capacity(self.panels * ref_nodes.len());
                let mut weights = Vec::with_capacity(nodes.capacity());
                for p in 0..self.panels {
                    let a = lo + p as f64 * width;
                    let mid = a + 0.5 * width;
                    for (t, w) in ref_nodes.iter().zip(&ref_weights) {
                        nodes.push(mid + 0.5 * width * t);
                        weights.push(0.5 * width * w);
                    }
                }
                (nodes, weights)
            }
        }
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_legendre(512, 8)
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
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
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Approximates `∫_{lo}^{hi} f` over the grid's interval with the given rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, grid: &Grid1D, rule: &QuadratureRule) -> Result<f64> {
    let (nodes, weights) = rule.nodes_weights(grid.lo(), grid.hi());
    let mut terms = Vec::with_capacity(nodes.len());
    for (&x, &w) in nodes.iter().zip(&weights) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { x });
        }
        terms.push(w * v);
    }
    Ok(compensated_sum(terms))
}
