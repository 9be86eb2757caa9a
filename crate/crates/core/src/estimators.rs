//! Score matching and maximum likelihood fits for one-dimensional
//! exponential families, plus the empirical score matching loss.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expfam::{ExpFamilyModel, SufficientStatistic};
use crate::numerics::quadrature::compensated_sum;
use crate::numerics::{solve_spd, sym_eig, Grid1D, QuadratureRule, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    ScoreMatching,
    Mle,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub theta_hat: Vec<f64>,
    pub n_samples: usize,
    pub method: FitMethod,
    /// Empirical score matching loss (SM) or average log-likelihood (MLE) at `theta_hat`.
    pub objective_value: f64,
    pub newton_iters: usize,
    pub converged: bool,
    /// Linear-solve residual (SM) or final gradient norm (MLE).
    pub residual: f64,
}

/// Relative threshold on `λ_min/λ_max` of the empirical matrix below which it is
/// treated as singular, scaled by the dimension.
fn singular_threshold(dim: usize) -> f64 {
    dim as f64 * f64::EPSILON
}

/// `Ê[(JF)(JF)ᵀ]` and `Ê[ΔF + (JF)∇b]` over the samples.
pub fn empirical_sm_terms(stat: &SufficientStatistic, samples: &[f64]) -> (SymMatrix, Vec<f64>) {
    let m = stat.dim();
    let n = samples.len() as f64;
    let mut a_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(samples.len()); m * m];
    let mut g_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(samples.len()); m];
    for &x in samples {
        let j = stat.jac(x);
        let g = stat.effective_lap(x);
        for r in 0..m {
            g_cols[r].push(g[r]);
            for c in r..m {
                a_cols[r * m + c].push(j[r] * j[c]);
            }
        }
    }
    let a = SymMatrix::from_fn(m, |r, c| compensated_sum(a_cols[r * m + c].iter().cloned()) / n);
    let g = g_cols.into_iter().map(|col| compensated_sum(col) / n).collect();
    (a, g)
}

/// The closed-form score matching estimator `θ̂ = −Ê[(JF)(JF)ᵀ]⁻¹ Ê ΔF`.
pub fn score_matching_fit(stat: &SufficientStatistic, samples: &[f64]) -> Result<FitReport> {
    let m = stat.dim();
    if samples.len() < m {
        return Err(Error::invalid(format!("need at least {m} samples, got {}", samples.len())));
    }
    let (a, g) = empirical_sm_terms(stat, samples);
    let eig = sym_eig(&a)?;
    let (lmin, lmax) = (eig.values[0], eig.values[m - 1]);
    if !(lmax > 0.0) || lmin <= singular_threshold(m) * lmax {
        return Err(Error::SingularEmpiricalMatrix { smallest_eigenvalue: lmin });
    }
    let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
    let theta = solve_spd(&a, &rhs).map_err(|_| Error::SingularEmpiricalMatrix { smallest_eigenvalue: lmin })?;
    let ax = a.matvec(&theta);
    let residual = ax.iter().zip(&rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let scale = a.frobenius() * theta.iter().map(|v| v * v).sum::<f64>().sqrt() + rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let objective_value = sm_empirical_loss(stat, &theta, samples);
    Ok(FitReport {
        theta_hat: theta,
        n_samples: samples.len(),
        method: FitMethod::ScoreMatching,
        objective_value,
        newton_iters: 0,
        converged: residual <= 1e-10 * scale.max(f64::MIN_POSITIVE),
        residual,
    })
}

/// `(1/n) Σᵢ [Tr ∇² log q(xᵢ) + ½ ‖∇ log q(xᵢ)‖²]` for `log q = ⟨θ, F⟩ + b`.
pub fn sm_empirical_loss(stat: &SufficientStatistic, theta: &[f64], samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let terms = samples.iter().map(|&x| {
        let lap: f64 = stat.lap(x).iter().zip(theta).map(|(l, t)| l * t).sum::<f64>() + stat.base_d2(x);
        let s = stat.score(theta, x);
        lap + 0.5 * s * s
    });
    compensated_sum(terms) / samples.len() as f64
}

/// Gradient of [`sm_empirical_loss`] in `θ`: `Â θ + Ê[ΔF + (JF)∇b]`.
pub fn sm_loss_gradient(stat: &SufficientStatistic, theta: &[f64], samples: &[f64]) -> Vec<f64> {
    let (a, g) = empirical_sm_terms(stat, samples);
    a.matvec(theta).iter().zip(&g).map(|(p, q)| p + q).collect()
}

/// Newton iteration limits for the MLE.
pub const MLE_MAX_ITERS: usize = 100;
pub const MLE_GRAD_TOL: f64 = 1e-8;
pub const MLE_MAX_HALVINGS: usize = 30;

/// Maximum likelihood by Newton's method on `θ ↦ ⟨θ, ÊF⟩ − log Z(θ)`.
pub fn mle_fit(
    stat: &SufficientStatistic,
    samples: &[f64],
    domain: &Grid1D,
    quad: &QuadratureRule,
    theta_init: &[f64],
) -> Result<FitReport> {
    let m = stat.dim();
    if samples.is_empty() {
        return Err(Error::invalid("MLE needs at least one sample"));
    }
    if theta_init.len() != m {
        return Err(Error::invalid("theta_init has the wrong length"));
    }
    let stat = Arc::new(stat.clone());
    let n = samples.len() as f64;
    let mean_hat: Vec<f64> = (0..m)
        .map(|k| compensated_sum(samples.iter().map(|&x| stat.components()[k].value(x))) / n)
        .collect();
    let base_hat = compensated_sum(samples.iter().map(|&x| stat.base_value(x))) / n;
    let objective = |model: &ExpFamilyModel| -> f64 {
        model.theta().iter().zip(&mean_hat).map(|(t, f)| t * f).sum::<f64>() + base_hat - model.log_z()
    };
    let mut model = ExpFamilyModel::new(stat.clone(), theta_init.to_vec(), domain.clone(), *quad)?;
    let mut value = objective(&model);
    let mut grad_norm = f64::INFINITY;
    for iter in 0..=MLE_MAX_ITERS {
        let (mean, cov) = model.mean_cov_f();
        let grad: Vec<f64> = mean_hat.iter().zip(&mean).map(|(a, b)| a - b).collect();
        grad_norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm < MLE_GRAD_TOL {
            return Ok(FitReport {
                theta_hat: model.theta().to_vec(),
                n_samples: samples.len(),
                method: FitMethod::Mle,
                objective_value: value,
                newton_iters: iter,
                converged: true,
                residual: grad_norm,
            });
        }
        if iter == MLE_MAX_ITERS {
            break;
        }
        let step = solve_spd(&cov, &grad)?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MLE_MAX_HALVINGS {
            let trial: Vec<f64> = model.theta().iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            if let Ok(candidate) = model.with_theta(trial) {
                let v = objective(&candidate);
                if v >= value {
                    accepted = Some((candidate, v));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((candidate, v)) => {
                model = candidate;
                value = v;
            }
            None => {
                return Err(Error::NoConvergence {
                    what: "MLE Newton line search",
                    residual: grad_norm,
                })
            }
        }
    }
    Err(Error::NoConvergence {
        what: "MLE Newton iteration",
        residual: grad_norm,
    })
}

/// MLE on the template model's domain and quadrature. Start points are tried in
/// order: the score matching estimate, score matching on each leading
/// sub-family padded with zeros, then zero. The first start from which Newton
/// converges wins; the objective is concave so the maximizer does not depend on it.
pub fn mle_fit_default_init(template: &ExpFamilyModel, samples: &[f64]) -> Result<FitReport> {
    let stat = template.stat();
    let m = stat.dim();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for k in (1..=m).rev() {
        let sub = if k == m { stat.clone() } else { stat.leading(k, format!("{}[..{k}]", stat.name())) };
        if let Ok(r) = score_matching_fit(&sub, samples) {
            let mut t = r.theta_hat;
            t.resize(m, 0.0);
            starts.push(t);
        }
    }
    starts.push(vec![0.0; m]);
    let mut first_err = None;
    for init in starts {
        if template.with_theta(init.clone()).is_err() {
            continue;
        }
        match mle_fit(stat, samples, template.domain(), template.quad(), &init) {
            Ok(r) => return Ok(r),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| Error::invalid("no admissible MLE start point")))
}
