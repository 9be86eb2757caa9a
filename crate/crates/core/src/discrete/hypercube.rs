use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::compensated_sum;
use crate::numerics::RngStream;

pub const MAX_DIM: usize = 12;

/// Spin of coordinate `i` in configuration `x`: bit 1 is `+1`, bit 0 is `−1`.
#[inline]
pub fn spin(x: u32, i: usize) -> f64 {
    if (x >> i) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn flip(x: u32, i: usize) -> u32 {
    x ^ (1 << i)
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + compensated_sum(v.iter().map(|x| (x - m).exp())).ln()
}

/// A distribution on `{±1}^d` stored as a table of unnormalized log weights
/// indexed by little-endian bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeModel {
    d: usize,
    log_weights: Vec<f64>,
    log_z: f64,
}

impl HypercubeModel {
    pub fn new(d: usize, log_weights: Vec<f64>) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::invalid(format!("hypercube dimension must be in 1..={MAX_DIM}, got {d}")));
        }
        if log_weights.len() != 1 << d {
            return Err(Error::invalid(format!("expected {} log weights, got {}", 1usize << d, log_weights.len())));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::invalid("log weights must be finite or -inf"));
        }
        let log_z = log_sum_exp(&log_weights);
        if !log_z.is_finite() {
            return Err(Error::invalid("all log weights are -inf"));
        }
        Ok(Self { d, log_weights, log_z })
    }

    pub fn from_probs(d: usize, probs: &[f64]) -> Result<Self> {
        Self::new(d, probs.iter().map(|p| p.ln()).collect())
    }

    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(d, vec![0.0; 1 << d])
    }

    /// Random table with log weights i.i.d. `N(0, scale²)`.
    pub fn random(d: usize, scale: f64, stream: &mut RngStream) -> Result<Self> {
        Self::new(d, (0..1 << d).map(|_| scale * stream.std_normal()).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn log_prob(&self, x: u32) -> f64 {
        self.log_weights[x as usize] - self.log_z
    }

    pub fn prob(&self, x: u32) -> f64 {
        self.log_prob(x).exp()
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.size() as u32).map(|x| self.prob(x)).collect()
    }

    /// `p(Xᵢ = +1 | X_{∼i} = x_{∼i})`; the value of bit `i` in `x` is ignored.
    pub fn prob_plus(&self, i: usize, x: u32) -> f64 {
        let plus = self.log_weights[(x | (1 << i)) as usize];
        let minus = self.log_weights[(x & !(1 << i)) as usize];
        match (plus == f64::NEG_INFINITY, minus == f64::NEG_INFINITY) {
            (true, true) => 0.5,
            (true, false) => 0.0,
            (false, true) => 1.0,
            _ => 1.0 / (1.0 + (minus - plus).exp()),
        }
    }

    /// `log p(xᵢ | x_{∼i})` for the spin actually present in `x`.
    pub fn log_conditional(&self, i: usize, x: u32) -> f64 {
        let own = self.log_weights[x as usize];
        let other = self.log_weights[flip(x, i) as usize];
        if own == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        if other == f64::NEG_INFINITY {
            return 0.0;
        }
        -(other - own).exp().ln_1p()
    }

    pub fn conditional(&self, i: usize, x: u32) -> ConditionalQuery {
        ConditionalQuery { i, x_rest: x & !(1 << i), prob_plus: self.prob_plus(i, x) }
    }

    /// I.i.d. exact draws by inverse CDF over the table.
    pub fn sample(&self, stream: &mut RngStream, n: usize) -> Vec<u32> {
        let mut cdf = Vec::with_capacity(self.size());
        let mut acc = 0.0;
        for p in self.probs() {
            acc += p;
            cdf.push(acc);
        }
        let total = acc;
        (0..n)
            .map(|_| {
                let u = stream.uniform() * total;
                cdf.partition_point(|&c| c <= u).min(self.size() - 1) as u32
            })
            .collect()
    }

    pub fn kl(&self, other: &HypercubeModel) -> Result<f64> {
        self.check_same_dim(other)?;
        let mut terms = Vec::with_capacity(self.size());
        for x in 0..self.size() as u32 {
            let p = self.prob(x);
            if p == 0.0 {
                continue;
            }
            let lq = other.log_prob(x);
            if lq == f64::NEG_INFINITY {
                return Ok(f64::INFINITY);
            }
            terms.push(p * (self.log_prob(x) - lq));
        }
        Ok(compensated_sum(terms))
    }

    pub(crate) fn check_same_dim(&self, other: &HypercubeModel) -> Result<()> {
        if self.d != other.d {
            return Err(Error::invalid(format!("dimension mismatch: {} vs {}", self.d, other.d)));
        }
        Ok(())
    }
}

/// One exact single-site conditional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalQuery {
    pub i: usize,
    /// Configuration with bit `i` cleared.
    pub x_rest: u32,
    pub prob_plus: f64,
}

impl ConditionalQuery {
    pub fn prob_minus(&self) -> f64 {
        1.0 - self.prob_plus
    }
}

/// One Glauber update: a uniformly random site is resampled from its
/// conditional law.
pub fn glauber_step(model: &HypercubeModel, x: u32, stream: &mut RngStream) -> u32 {
    let i = stream.below(model.dim());
    if stream.uniform() < model.prob_plus(i, x) {
        x | (1 << i)
    } else {
        x & !(1 << i)
    }
}

/// `sweeps·d` Glauber steps from `start`.
pub fn glauber_run(model: &HypercubeModel, start: u32, sweeps: usize, stream: &mut RngStream) -> u32 {
    (0..sweeps * model.dim()).fold(start, |x, _| glauber_step(model, x, stream))
}

/// Exact one-step transition probability of the Glauber chain.
pub fn glauber_transition(model: &HypercubeModel, x: u32, y: u32) -> f64 {
    let d = model.dim() as f64;
    let diff = x ^ y;
    let resample = |i: usize| {
        let p = model.prob_plus(i, x);
        if (y >> i) & 1 == 1 {
            p
        } else {
            1.0 - p
        }
    };
    match diff.count_ones() {
        0 => (0..model.dim()).map(resample).sum::<f64>() / d,
        1 => resample(diff.trailing_zeros() as usize) / d,
        _ => 0.0,
    }
}

/// Ising model `log w(x) = Σᵢ hᵢxᵢ + Σ_{(i,j)} J_{ij} xᵢxⱼ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingFamily {
    pub d: usize,
    pub edges: Vec<(usize, usize)>,
    pub h: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
}

impl IsingFamily {
    pub fn new(d: usize, edges: Vec<(usize, usize)>, h: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        let out = Self { d, edges, h, j };
        out.validate()?;
        Ok(out)
    }

    /// Shape only, all parameters zero.
    pub fn shape(d: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let m = edges.len();
        Self::new(d, edges, vec![0.0; d], vec![0.0; m])
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > MAX_DIM {
            return Err(Error::invalid(format!("Ising dimension must be in 1..={MAX_DIM}")));
        }
        if self.h.len() != self.d || self.j.len() != self.edges.len() {
            return Err(Error::invalid("need one field per site and one coupling per edge"));
        }
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a >= b || b >= self.d {
                return Err(Error::invalid(format!("edge {k} = ({a}, {b}) must satisfy i < j < d")));
            }
            if self.edges[..k].contains(&(a, b)) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.d + self.edges.len()
    }

    /// `(h, J)` flattened.
    pub fn params(&self) -> Vec<f64> {
        self.h.iter().chain(&self.j).copied().collect()
    }

    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        if params.len() != self.n_params() {
            return Err(Error::invalid("parameter vector has the wrong length"));
        }
        Ok(Self { d: self.d, edges: self.edges.clone(), h: params[..self.d].to_vec(), j: params[self.d..].to_vec() })
    }

    pub fn log_weight(&self, x: u32) -> f64 {
        let field: f64 = (0..self.d).map(|i| self.h[i] * spin(x, i)).sum();
        let pair: f64 = self.edges.iter().zip(&self.j).map(|(&(a, b), j)| j * spin(x, a) * spin(x, b)).sum();
        field + pair
    }

    pub fn model(&self) -> Result<HypercubeModel> {
        self.validate()?;
        HypercubeModel::new(self.d, (0..1u32 << self.d).map(|x| self.log_weight(x)).collect())
    }

    /// Local fields `mᵢ = hᵢ + Σ_{j∼i} J_{ij} xⱼ`, so that
    /// `q(xᵢ | x_{∼i}) = e^{xᵢmᵢ} / (2 cosh mᵢ)`.
    pub fn local_fields(&self, x: u32) -> Vec<f64> {
        let mut m = self.h.clone();
        for (&(a, b), j) in self.edges.iter().zip(&self.j) {
            m[a] += j * spin(x, b);
            m[b] += j * spin(x, a);
        }
        m
    }
}

/// JSON form of a hypercube model: either Ising parameters or a raw table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HypercubeSpec {
    Ising(IsingFamily),
    Table { d: usize, log_weights: Vec<f64> },
}

impl HypercubeSpec {
    pub fn model(&self) -> Result<HypercubeModel> {
        match self {
            HypercubeSpec::Ising(f) => f.model(),
            HypercubeSpec::Table { d, log_weights } => HypercubeModel::new(*d, log_weights.clone()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("hypercube model: {e}")))
    }
}

impl From<&HypercubeModel> for HypercubeSpec {
    fn from(m: &HypercubeModel) -> Self {
        HypercubeSpec::Table { d: m.d, log_weights: m.log_weights.clone() }
    }
}

/// `q ∝ (1−ε)/2·(δ₊ + δ₋) + ε·uniform` on `{±1}^d`, where `δ±` are the
/// all-plus and all-minus configurations.
pub fn two_point_mixture(d: usize, eps: f64) -> Result<HypercubeModel> {
    if !(0.0 < eps && eps <= 1.0) {
        return Err(Error::invalid("leakage must lie in (0, 1]"));
    }
    let size = 1usize << d;
    let all_plus = size - 1;
    let probs: Vec<f64> = (0..size)
        .map(|x| eps / size as f64 + if x == 0 || x == all_plus { 0.5 * (1.0 - eps) } else { 0.0 })
        .collect();
    HypercubeModel::from_probs(d, &probs)
}
