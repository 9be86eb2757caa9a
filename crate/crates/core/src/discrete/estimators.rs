//! Pseudolikelihood and ratio matching: objectives on arbitrary tables and
//! fits over Ising families. Samples are reduced to configuration
//! frequencies first, so every objective is an exact weighted sum over the
//! `2^d` table.

use serde::Serialize;

use super::hypercube::{flip, spin, HypercubeModel, IsingFamily};
use crate::error::{Error, Result};
use crate::numerics::quadrature::compensated_sum;

/// Frequencies of each configuration among `samples`.
pub fn empirical_distribution(d: usize, samples: &[u32]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid("need at least one sample"));
    }
    let size = 1usize << d;
    let mut counts = vec![0usize; size];
    for &x in samples {
        if x as usize >= size {
            return Err(Error::invalid(format!("configuration {x} out of range for d = {d}")));
        }
        counts[x as usize] += 1;
    }
    let n = samples.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// `Σ_x w(x) Σᵢ log q(xᵢ | x_{∼i})`.
pub fn pseudolikelihood_weighted(q: &HypercubeModel, weights: &[f64]) -> Result<f64> {
    let mut terms = Vec::with_capacity(weights.len() * q.dim());
    for (x, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for i in 0..q.dim() {
            let l = q.log_conditional(i, x as u32);
            if l == f64::NEG_INFINITY {
                return Err(Error::ZeroConditional);
            }
            terms.push(w * l);
        }
    }
    Ok(compensated_sum(terms))
}

/// Empirical pseudolikelihood `L̂(q)`.
pub fn pseudolikelihood_objective(q: &HypercubeModel, samples: &[u32]) -> Result<f64> {
    pseudolikelihood_weighted(q, &empirical_distribution(q.dim(), samples)?)
}

/// `Σ_x w(x) Σᵢ (1(xᵢ = +1) − q(Xᵢ = +1 | x_{∼i}))²`.
pub fn ratio_matching_weighted(q: &HypercubeModel, weights: &[f64]) -> f64 {
    let mut terms = Vec::with_capacity(weights.len() * q.dim());
    for (x, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for i in 0..q.dim() {
            let ind = if spin(x as u32, i) > 0.0 { 1.0 } else { 0.0 };
            terms.push(w * (ind - q.prob_plus(i, x as u32)).powi(2));
        }
    }
    let value = compensated_sum(terms);
    #[cfg(test)]
    {
        let odds = ratio_matching_odds_weighted(q, weights);
        assert!((value - odds).abs() <= 1e-12 * value.abs().max(1.0), "{value} vs {odds}");
    }
    value
}

/// The same objective through odds ratios:
/// `Σ_x w(x) Σᵢ (1 / (1 + q(x)/q(x^{(i)})))²` with `x^{(i)}` the configuration
/// with spin `i` flipped.
pub fn ratio_matching_odds_weighted(q: &HypercubeModel, weights: &[f64]) -> f64 {
    let lw = q.log_weights();
    let mut terms = Vec::with_capacity(weights.len() * q.dim());
    for (x, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for i in 0..q.dim() {
            let log_odds = lw[x] - lw[flip(x as u32, i) as usize];
            let t = if log_odds.is_nan() { 0.5 } else { 1.0 / (1.0 + log_odds.exp()) };
            terms.push(w * t * t);
        }
    }
    compensated_sum(terms)
}

/// Empirical ratio matching objective `M̂(q)`.
pub fn ratio_matching_objective(q: &HypercubeModel, samples: &[u32]) -> Result<f64> {
    Ok(ratio_matching_weighted(q, &empirical_distribution(q.dim(), samples)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscreteMethod {
    Pseudolikelihood,
    RatioMatching,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteFit {
    pub family: IsingFamily,
    pub method: DiscreteMethod,
    pub objective: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

pub const FIT_GRAD_TOL: f64 = 1e-7;
pub const FIT_MAX_ITERS: usize = 50_000;
/// Parameters beyond this magnitude mean the optimum is at infinity
/// (separated data).
pub const FIT_PARAM_BOUND: f64 = 12.0;

/// Objective values this close to their perfect-fit value (0 for both
/// methods) mean separated data.
pub const SEPARATION_TOL: f64 = 1e-6;

/// Objective (to maximize) and its gradient over `(h, J)`.
fn objective_and_grad(shape: &IsingFamily, params: &[f64], weights: &[f64], method: DiscreteMethod) -> (f64, Vec<f64>) {
    let fam = shape.with_params(params).expect("parameter length checked by caller");
    let d = fam.d;
    let mut value = Vec::with_capacity(weights.len());
    let mut grad = vec![0.0; fam.n_params()];
    for (x, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let x = x as u32;
        let m = fam.local_fields(x);
        let mut v = 0.0;
        let mut dm = vec![0.0; d];
        for i in 0..d {
            let s = spin(x, i);
            let t = m[i].tanh();
            match method {
                DiscreteMethod::Pseudolikelihood => {
                    let a = m[i].abs();
                    v += s * m[i] - (a + (-2.0 * a).exp().ln_1p());
                    dm[i] = s - t;
                }
                DiscreteMethod::RatioMatching => {
                    // (1(s=+1) − σ(2m))² = (s − tanh m)²/4, negated for ascent.
                    v -= 0.25 * (s - t).powi(2);
                    dm[i] = 0.5 * (s - t) * (1.0 - t * t);
                }
            }
        }
        value.push(w * v);
        for i in 0..d {
            grad[i] += w * dm[i];
        }
        for (k, &(a, b)) in fam.edges.iter().enumerate() {
            grad[d + k] += w * (dm[a] * spin(x, b) + dm[b] * spin(x, a));
        }
    }
    (compensated_sum(value), grad)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Gradient ascent with backtracking from zero parameters.
pub fn fit_weighted(shape: &IsingFamily, weights: &[f64], method: DiscreteMethod) -> Result<DiscreteFit> {
    shape.validate()?;
    if weights.len() != 1 << shape.d {
        return Err(Error::invalid("weights must cover the whole hypercube"));
    }
    let what = match method {
        DiscreteMethod::Pseudolikelihood => "pseudolikelihood fit",
        DiscreteMethod::RatioMatching => "ratio matching fit",
    };
    let mut params = vec![0.0; shape.n_params()];
    let (mut f, mut g) = objective_and_grad(shape, &params, weights, method);
    let mut step = 1.0;
    for iter in 0..FIT_MAX_ITERS {
        let gn = norm(&g);
        if gn < FIT_GRAD_TOL {
            // Every observed conditional predicted with certainty: the data
            // are separated and the stationary point is an artifact of the
            // flat tail.
            if f > -SEPARATION_TOL {
                return Err(Error::NoConvergence { what, residual: gn });
            }
            let sign = if method == DiscreteMethod::RatioMatching { -1.0 } else { 1.0 };
            return Ok(DiscreteFit { family: shape.with_params(&params)?, method, objective: sign * f, iterations: iter, grad_norm: gn });
        }
        if params.iter().any(|p| p.abs() > FIT_PARAM_BOUND) {
            return Err(Error::NoConvergence { what, residual: gn });
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(&g).map(|(p, gi)| p + step * gi).collect();
            let (ft, gt) = objective_and_grad(shape, &trial, weights, method);
            if ft >= f + 1e-4 * step * gn * gn {
                params = trial;
                f = ft;
                g = gt;
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { what, residual: gn });
        }
    }
    Err(Error::NoConvergence { what, residual: norm(&g) })
}

pub fn pseudolikelihood_fit(shape: &IsingFamily, samples: &[u32]) -> Result<DiscreteFit> {
    fit_weighted(shape, &empirical_distribution(shape.d, samples)?, DiscreteMethod::Pseudolikelihood)
}

pub fn ratio_matching_fit(shape: &IsingFamily, samples: &[u32]) -> Result<DiscreteFit> {
    fit_weighted(shape, &empirical_distribution(shape.d, samples)?, DiscreteMethod::RatioMatching)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn enumerate(m: &HypercubeModel) -> Vec<f64> {
        m.probs()
    }

    #[test]
    fn uniform_values() {
        let u = HypercubeModel::uniform(4).unwrap();
        let samples = [0u32, 3, 7, 15, 9];
        let pl = pseudolikelihood_objective(&u, &samples).unwrap();
        assert!((pl + 4.0 * std::f64::consts::LN_2).abs() < 1e-14);
        assert_eq!(ratio_matching_objective(&u, &samples).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_two_site_table() {
        // p ∝ (1, 2, 3, 4) over x = 0b00, 0b01, 0b10, 0b11.
        let q = HypercubeModel::from_probs(2, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        // Samples {0b01, 0b11}: site 0 is + in both; site 1 is − then +.
        // q(x0=+ | x1=−) = 2/3, q(x0=+ | x1=+) = 4/7, q(x1=− | x0=+) = 1/3, q(x1=+ | x0=+) = 2/3.
        let pl = pseudolikelihood_objective(&q, &[1, 3]).unwrap();
        let expect = 0.5 * ((2.0f64 / 3.0).ln() + (1.0f64 / 3.0).ln()) + 0.5 * ((4.0f64 / 7.0).ln() + (2.0f64 / 3.0).ln());
        assert!((pl - expect).abs() < 1e-15);
        let rm = ratio_matching_objective(&q, &[1, 3]).unwrap();
        let expect = 0.5 * ((1.0 - 2.0 / 3.0f64).powi(2) + (2.0 / 3.0f64).powi(2))
            + 0.5 * ((1.0 - 4.0 / 7.0f64).powi(2) + (1.0 - 2.0 / 3.0f64).powi(2));
        assert!((rm - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_conditional_is_reported() {
        let q = HypercubeModel::new(1, vec![f64::NEG_INFINITY, 0.0]).unwrap();
        assert!(matches!(pseudolikelihood_objective(&q, &[0]), Err(Error::ZeroConditional)));
    }

    #[test]
    fn truth_maximizes_expected_pseudolikelihood() {
        let mut s = RngStream::new(21, 0);
        let p = HypercubeModel::random(3, 1.0, &mut s).unwrap();
        let w = enumerate(&p);
        let lp = pseudolikelihood_weighted(&p, &w).unwrap();
        for _ in 0..100 {
            let q = HypercubeModel::random(3, 1.0, &mut s).unwrap();
            assert!(pseudolikelihood_weighted(&q, &w).unwrap() <= lp + 1e-14);
        }
    }

    #[test]
    fn ratio_matching_forms_and_truth_value() {
        let mut s = RngStream::new(22, 0);
        for _ in 0..100 {
            let p = HypercubeModel::random(3, 1.5, &mut s).unwrap();
            let q = HypercubeModel::random(3, 1.5, &mut s).unwrap();
            let w = enumerate(&p);
            let a = ratio_matching_weighted(&q, &w);
            assert!((a - ratio_matching_odds_weighted(&q, &w)).abs() < 1e-12);
        }
        // M_p(p) = Σᵢ 𝔼 Var(1(Xᵢ=+1) | X_{∼i}).
        let p = HypercubeModel::random(3, 1.0, &mut s).unwrap();
        let w = enumerate(&p);
        let mut oracle = 0.0;
        for x in 0..8u32 {
            for i in 0..3 {
                let pp = p.prob_plus(i, x);
                oracle += w[x as usize] * pp * (1.0 - pp);
            }
        }
        assert!((ratio_matching_weighted(&p, &w) - oracle).abs() < 1e-14);
    }

    #[test]
    fn ratio_matching_flip_symmetry() {
        // q symmetric under global spin flip; flipping every sample leaves M unchanged.
        let q = IsingFamily::new(3, vec![(0, 1), (0, 2)], vec![0.0; 3], vec![0.7, -0.4]).unwrap().model().unwrap();
        let samples = [0u32, 1, 5, 6, 6, 7];
        let flipped: Vec<u32> = samples.iter().map(|x| !x & 7).collect();
        let a = ratio_matching_objective(&q, &samples).unwrap();
        let b = ratio_matching_objective(&q, &flipped).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn fits_on_exact_weights_recover_truth() {
        let truth = IsingFamily::new(3, vec![(0, 1), (1, 2)], vec![0.2, -0.1, 0.4], vec![0.8, -0.3]).unwrap();
        let w = truth.model().unwrap().probs();
        let shape = IsingFamily::shape(3, truth.edges.clone()).unwrap();
        for method in [DiscreteMethod::Pseudolikelihood, DiscreteMethod::RatioMatching] {
            let fit = fit_weighted(&shape, &w, method).unwrap();
            for (a, b) in fit.family.params().iter().zip(truth.params()) {
                assert!((a - b).abs() < 1e-6, "{method:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fits_from_samples() {
        let mut rng = RngStream::new(42, 3);
        let prod = IsingFamily::new(2, vec![], vec![0.5, -0.5], vec![]).unwrap();
        let samples = prod.model().unwrap().sample(&mut rng, 100_000);
        let pl = pseudolikelihood_fit(&prod, &samples).unwrap();
        let rm = ratio_matching_fit(&prod, &samples).unwrap();
        for k in 0..2 {
            assert!((pl.family.h[k] - prod.h[k]).abs() < 0.03);
            assert!((rm.family.h[k] - prod.h[k]).abs() < 0.05);
            assert!((rm.family.h[k] - pl.family.h[k]).abs() < 0.02);
        }
        let edge = IsingFamily::new(2, vec![(0, 1)], vec![0.0, 0.0], vec![0.8]).unwrap();
        let samples = edge.model().unwrap().sample(&mut rng, 100_000);
        assert!((pseudolikelihood_fit(&edge, &samples).unwrap().family.j[0] - 0.8).abs() < 0.05);
        assert!((ratio_matching_fit(&edge, &samples).unwrap().family.j[0] - 0.8).abs() < 0.08);
    }

    #[test]
    fn separated_data_is_flagged() {
        let shape = IsingFamily::shape(2, vec![(0, 1)]).unwrap();
        let samples = vec![3u32; 50];
        assert!(matches!(pseudolikelihood_fit(&shape, &samples), Err(Error::NoConvergence { .. })));
        assert!(matches!(ratio_matching_fit(&shape, &samples), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn fit_objective_matches_table_objective() {
        let truth = IsingFamily::new(2, vec![(0, 1)], vec![0.1, -0.3], vec![0.5]).unwrap();
        let w = truth.model().unwrap().probs();
        let shape = IsingFamily::shape(2, truth.edges.clone()).unwrap();
        let pl = fit_weighted(&shape, &w, DiscreteMethod::Pseudolikelihood).unwrap();
        let table = pseudolikelihood_weighted(&pl.family.model().unwrap(), &w).unwrap();
        assert!((pl.objective - table).abs() < 1e-12);
        let rm = fit_weighted(&shape, &w, DiscreteMethod::RatioMatching).unwrap();
        assert!((rm.objective - ratio_matching_weighted(&rm.family.model().unwrap(), &w)).abs() < 1e-12);
    }
}
