//! A one-dimensional exponential family member truncated to a bounded domain,
//! with log-partition, moments and inverse-CDF sampling by quadrature.

use std::sync::{Arc, OnceLock};

use super::density::Density1D;
use super::statistic::SufficientStatistic;
use crate::error::{Error, Result};
use crate::numerics::quadrature::compensated_sum;
use crate::numerics::{Grid1D, QuadratureRule, RngStream, SymMatrix};

/// Density ratio to the maximum below which an endpoint counts as negligible.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Default number of grid nodes used for the CDF table.
pub const DEFAULT_GRID_NODES: usize = 8192;

/// `log ∫ exp(⟨θ, F(x)⟩ + b(x)) dx` over the grid's interval, computed with a max shift.
pub fn log_partition(stat: &SufficientStatistic, theta: &[f64], domain: &Grid1D, quad: &QuadratureRule) -> Result<f64> {
    let (nodes, weights) = quad.nodes_weights(domain.lo(), domain.hi());
    let logw = log_weights_at(stat, theta, &nodes)?;
    check_growth(stat, theta, domain, &logw)?;
    Ok(shifted_log_sum(&logw, &weights))
}

fn log_weights_at(stat: &SufficientStatistic, theta: &[f64], nodes: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != stat.dim() {
        return Err(Error::invalid(format!(
            "theta has length {} but the statistic has dimension {}",
            theta.len(),
            stat.dim()
        )));
    }
    nodes
        .iter()
        .map(|&x| {
            let v = stat.log_weight(theta, x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteIntegrand { x })
            }
        })
        .collect()
}

fn shifted_log_sum(logw: &[f64], weights: &[f64]) -> f64 {
    let m = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + compensated_sum(logw.iter().zip(weights).map(|(l, w)| w * (l - m).exp())).ln()
}

/// Rejects integrands that are non-negligible at an endpoint and still growing toward it.
fn check_growth(stat: &SufficientStatistic, theta: &[f64], domain: &Grid1D, logw: &[f64]) -> Result<()> {
    let h = domain.spacing();
    let (lo, hi) = (domain.lo(), domain.hi());
    let ends = [
        (lo, stat.log_weight(theta, lo), stat.log_weight(theta, lo + h)),
        (hi, stat.log_weight(theta, hi), stat.log_weight(theta, hi - h)),
    ];
    let m = logw
        .iter()
        .cloned()
        .chain(ends.iter().map(|e| e.1))
        .fold(f64::NEG_INFINITY, f64::max);
    for (x, at_end, inside) in ends {
        if !at_end.is_finite() {
            return Err(Error::NonFiniteIntegrand { x });
        }
        if at_end - m > TRUNCATION_TOL.ln() && at_end > inside + 1e-12 * inside.abs().max(1.0) {
            return Err(Error::DivergentIntegral(format!("integrand grows toward the endpoint x = {x}")));
        }
    }
    Ok(())
}

/// Expectations under the model needed by the efficiency formulas.
#[derive(Debug, Clone)]
pub struct Moments {
    /// `𝔼F`.
    pub mean_f: Vec<f64>,
    /// `Σ_F`.
    pub cov_f: SymMatrix,
    /// `A = 𝔼[(JF)(JF)ᵀ]`.
    pub a_matrix: SymMatrix,
    /// `𝔼ΔF` (with a base measure, `𝔼[ΔF + (JF)·∇b]`).
    pub mean_lap: Vec<f64>,
    /// Mean of the drift `(JF)(JF)ᵀθ + ΔF`.
    pub mean_drift: Vec<f64>,
    /// Covariance of the drift.
    pub cov_drift: SymMatrix,
    /// `𝔼‖(JF)_X‖⁴_OP`.
    pub e_jf4: f64,
    /// `𝔼‖ΔF‖₂²`.
    pub e_lap2: f64,
}

/// `p_θ(x) ∝ exp(⟨θ, F(x)⟩ + b(x))` on a truncated domain.
#[derive(Debug, Clone)]
pub struct ExpFamilyModel {
    stat: Arc<SufficientStatistic>,
    theta: Vec<f64>,
    domain: Grid1D,
    quad: QuadratureRule,
    log_z: f64,
    nodes: Vec<f64>,
    /// Quadrature weight times normalized density at each node.
    masses: Vec<f64>,
    cdf_table: OnceLock<Vec<f64>>,
}

impl ExpFamilyModel {
    pub fn new(stat: Arc<SufficientStatistic>, theta: Vec<f64>, domain: Grid1D, quad: QuadratureRule) -> Result<Self> {
        let (nodes, weights) = quad.nodes_weights(domain.lo(), domain.hi());
        let logw = log_weights_at(&stat, &theta, &nodes)?;
        check_growth(&stat, &theta, &domain, &logw)?;
        let log_z = shifted_log_sum(&logw, &weights);
        let max_node = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for x in [domain.lo(), domain.hi()] {
            let rel = stat.log_weight(&theta, x) - max_node;
            if rel > TRUNCATION_TOL.ln() {
                return Err(Error::DivergentIntegral(format!(
                    "density at truncation endpoint x = {x} is {:.3e} of its maximum",
                    rel.exp()
                )));
            }
        }
        let mut masses: Vec<f64> = logw.iter().zip(&weights).map(|(l, w)| w * (l - log_z).exp()).collect();
        let total = compensated_sum(masses.iter().cloned());
        masses.iter_mut().for_each(|m| *m /= total);
        Ok(Self {
            stat,
            theta,
            domain,
            quad,
            log_z,
            nodes,
            masses,
            cdf_table: OnceLock::new(),
        })
    }

    /// Uses a uniform grid with [`DEFAULT_GRID_NODES`] nodes and the default quadrature.
    pub fn on_interval(stat: Arc<SufficientStatistic>, theta: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        Self::new(stat, theta, Grid1D::new(lo, hi, DEFAULT_GRID_NODES)?, QuadratureRule::default())
    }

    /// Same statistic, domain and quadrature with a different parameter.
    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::new(self.stat.clone(), theta, self.domain.clone(), self.quad)
    }

    /// Doubles both the quadrature panels and the grid resolution.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.stat.clone(), self.theta.clone(), self.domain.refined(), self.quad.refined())
    }

    pub fn stat(&self) -> &SufficientStatistic {
        &self.stat
    }

    pub fn stat_arc(&self) -> Arc<SufficientStatistic> {
        self.stat.clone()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn domain(&self) -> &Grid1D {
        &self.domain
    }

    pub fn quad(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// `𝔼 f(X)` by the model's quadrature.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        compensated_sum(self.nodes.iter().zip(&self.masses).map(|(&x, &m)| m * f(x)))
    }

    /// `∫_a^b f(x) p(x) dx` with a Gauss–Legendre rule restricted to `[a, b]`,
    /// using the same panel width as the model's quadrature.
    pub fn expect_on(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let a = a.max(self.domain.lo());
        let b = b.min(self.domain.hi());
        if b <= a {
            return 0.0;
        }
        let frac = (b - a) / (self.domain.hi() - self.domain.lo());
        let panels = ((self.quad.panels as f64 * frac).ceil() as usize).max(16);
        let rule = QuadratureRule::gauss_legendre(panels, self.quad.points_per_panel);
        let (nodes, weights) = rule.nodes_weights(a, b);
        compensated_sum(nodes.iter().zip(&weights).map(|(&x, &w)| w * self.density(x) * f(x)))
    }

    /// `P(X > t)`.
    pub fn prob_above(&self, t: f64) -> f64 {
        self.expect_on(|_| 1.0, t, self.domain.hi())
    }

    /// `(𝔼F, Σ_F)` only; cheaper than [`Self::moments`].
    pub fn mean_cov_f(&self) -> (Vec<f64>, SymMatrix) {
        let m = self.stat.dim();
        let fs: Vec<Vec<f64>> = self.nodes.iter().map(|&x| self.stat.eval(x)).collect();
        let mut mean = vec![0.0; m];
        for (f, p) in fs.iter().zip(&self.masses) {
            for r in 0..m {
                mean[r] += p * f[r];
            }
        }
        let mut cov = vec![0.0; m * m];
        for (f, p) in fs.iter().zip(&self.masses) {
            for r in 0..m {
                for c in r..m {
                    cov[r * m + c] += p * (f[r] - mean[r]) * (f[c] - mean[c]);
                }
            }
        }
        (mean, SymMatrix::from_fn(m, |r, c| cov[r * m + c]))
    }

    pub fn moments(&self) -> Moments {
        let m = self.stat.dim();
        let mut mean_f = vec![0.0; m];
        let mut mean_lap = vec![0.0; m];
        let mut mean_drift = vec![0.0; m];
        let mut a = vec![0.0; m * m];
        let mut e_jf4 = 0.0;
        let mut e_lap2 = 0.0;
        let mut evals = Vec::with_capacity(self.nodes.len());
        for (&x, &p) in self.nodes.iter().zip(&self.masses) {
            let f = self.stat.eval(x);
            let j = self.stat.jac(x);
            let g = self.stat.effective_lap(x);
            let jt: f64 = j.iter().zip(&self.theta).map(|(a, b)| a * b).sum();
            let drift: Vec<f64> = j.iter().zip(&g).map(|(ji, gi)| ji * jt + gi).collect();
            let jn2: f64 = j.iter().map(|v| v * v).sum();
            e_jf4 += p * jn2 * jn2;
            e_lap2 += p * g.iter().map(|v| v * v).sum::<f64>();
            for r in 0..m {
                mean_f[r] += p * f[r];
                mean_lap[r] += p * g[r];
                mean_drift[r] += p * drift[r];
                for c in r..m {
                    a[r * m + c] += p * j[r] * j[c];
                }
            }
            evals.push((p, f, drift));
        }
        let mut cov_f = vec![0.0; m * m];
        let mut cov_d = vec![0.0; m * m];
        for (p, f, d) in &evals {
            for r in 0..m {
                let fr = f[r] - mean_f[r];
                let dr = d[r] - mean_drift[r];
                for c in r..m {
                    cov_f[r * m + c] += p * fr * (f[c] - mean_f[c]);
                    cov_d[r * m + c] += p * dr * (d[c] - mean_drift[c]);
                }
            }
        }
        let sym = |v: &[f64]| SymMatrix::from_fn(m, |r, c| v[r * m + c]);
        Moments {
            mean_f,
            cov_f: sym(&cov_f),
            a_matrix: sym(&a),
            mean_lap,
            mean_drift,
            cov_drift: sym(&cov_d),
            e_jf4,
            e_lap2,
        }
    }

    /// CDF at the grid nodes; built on first use.
    pub fn cdf_table(&self) -> &[f64] {
        self.cdf_table.get_or_init(|| self.build_cdf())
    }

    fn build_cdf(&self) -> Vec<f64> {
        let (t, w) = crate::numerics::quadrature::gauss_legendre_nodes(4);
        let nodes = self.domain.nodes();
        let h = self.domain.spacing();
        let mut cdf = Vec::with_capacity(nodes.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..nodes.len() - 1 {
            let mid = 0.5 * (nodes[i] + nodes[i + 1]);
            let piece: f64 = t
                .iter()
                .zip(&w)
                .map(|(ti, wi)| 0.5 * h * wi * self.density(mid + 0.5 * h * ti))
                .sum();
            acc += piece;
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        let last = cdf.len() - 1;
        cdf[last] = 1.0;
        cdf
    }

    /// CDF by linear interpolation of the table.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.domain.lo() {
            return 0.0;
        }
        if x >= self.domain.hi() {
            return 1.0;
        }
        let table = self.cdf_table();
        let nodes = self.domain.nodes();
        let i = self.domain.interval_of(x);
        let s = (x - nodes[i]) / self.domain.spacing();
        table[i] + s * (table[i + 1] - table[i])
    }

    /// Inverse of the interpolated CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        let table = self.cdf_table();
        let nodes = self.domain.nodes();
        let u = u.clamp(0.0, 1.0);
        let k = table.partition_point(|&c| c <= u);
        if k == 0 {
            return nodes[0];
        }
        if k >= table.len() {
            return nodes[nodes.len() - 1];
        }
        let (c0, c1) = (table[k - 1], table[k]);
        if c1 <= c0 {
            return nodes[k - 1];
        }
        nodes[k - 1] + (u - c0) / (c1 - c0) * self.domain.spacing()
    }

    /// `n` i.i.d. draws by inverse-CDF sampling.
    pub fn sample(&self, stream: &mut RngStream, n: usize) -> Vec<f64> {
        self.cdf_table();
        (0..n).map(|_| self.quantile(stream.uniform())).collect()
    }
}

impl Density1D for ExpFamilyModel {
    fn log_density(&self, x: f64) -> f64 {
        self.stat.log_weight(&self.theta, x) - self.log_z
    }

    fn score(&self, x: f64) -> f64 {
        self.stat.score(&self.theta, x)
    }
}
