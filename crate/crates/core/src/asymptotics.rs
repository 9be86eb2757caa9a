//! Asymptotic covariances of the score matching and maximum likelihood
//! estimators, their worst-direction ratio, the Poincaré-type upper bound on
//! `‖Γ_SM‖`, and diagnostics for the half-line cut `S = {x > cut}`.

use serde::Serialize;

use crate::error::Result;
use crate::expfam::{ExpFamilyModel, Moments, SufficientStatistic};
use crate::numerics::{gen_eig_max, sym_eig, RngStream, SymMatrix};

/// Relative slack used by the inequality checks.
pub const CHECK_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct Smoothness {
    /// `𝔼‖(JF)_X‖⁴_OP`.
    pub e_jf4: f64,
    /// `𝔼‖ΔF‖₂²`.
    pub e_lap2: f64,
}

#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    pub gamma_sm: SymMatrix,
    pub gamma_mle: SymMatrix,
    /// Unit-norm maximizer of `⟨w, Γ_SM w⟩ / ⟨w, Γ_MLE w⟩`.
    pub worst_direction: Vec<f64>,
    pub worst_ratio: f64,
    /// Restricted Poincaré constant `max_w Var⟨w,F⟩ / 𝔼‖∇⟨w,F⟩‖²`.
    pub c_p_restricted: f64,
    /// Right-hand side of the `‖Γ_SM‖_OP` bound evaluated with `c_p_restricted`.
    pub poincare_bound: f64,
    pub smoothness: Smoothness,
}

impl AsymptoticReport {
    pub fn compute(model: &ExpFamilyModel) -> Result<Self> {
        Self::from_moments(&model.moments(), model.theta())
    }

    pub fn from_moments(mo: &Moments, theta: &[f64]) -> Result<Self> {
        let gamma_mle = gamma_mle_from(mo)?;
        let gamma_sm = gamma_sm_from(mo)?;
        let (worst_ratio, worst_direction) = relative_efficiency(&gamma_sm, &gamma_mle)?;
        let c_p_restricted = restricted_poincare(mo)?;
        let smoothness = Smoothness {
            e_jf4: mo.e_jf4,
            e_lap2: mo.e_lap2,
        };
        let poincare_bound = poincare_rhs(c_p_restricted, &gamma_mle, theta, &smoothness)?;
        Ok(Self {
            gamma_sm,
            gamma_mle,
            worst_direction,
            worst_ratio,
            c_p_restricted,
            poincare_bound,
            smoothness,
        })
    }
}

/// `Γ_MLE = Σ_F⁻¹`.
pub fn gamma_mle(model: &ExpFamilyModel) -> Result<SymMatrix> {
    gamma_mle_from(&model.moments())
}

pub fn gamma_mle_from(mo: &Moments) -> Result<SymMatrix> {
    mo.cov_f.inverse_spd()
}

/// `Γ_SM = A⁻¹ Σ_drift A⁻¹` with `A = 𝔼[(JF)(JF)ᵀ]`.
pub fn gamma_sm(model: &ExpFamilyModel) -> Result<SymMatrix> {
    gamma_sm_from(&model.moments())
}

pub fn gamma_sm_from(mo: &Moments) -> Result<SymMatrix> {
    sandwich(&mo.a_matrix, &mo.cov_drift)
}

fn sandwich(a: &SymMatrix, middle: &SymMatrix) -> Result<SymMatrix> {
    let a_inv = a.inverse_spd()?;
    Ok(middle.congruence(a_inv.as_rows()))
}

/// Largest ratio `⟨w, Γ_SM w⟩ / ⟨w, Γ_MLE w⟩` and its unit-norm direction
/// (sign fixed so the largest-magnitude entry is positive).
pub fn relative_efficiency(gamma_sm: &SymMatrix, gamma_mle: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    let (ratio, w) = gen_eig_max(gamma_sm, gamma_mle)?;
    Ok((ratio, unit_direction(w)))
}

pub(crate) fn unit_direction(mut w: Vec<f64>) -> Vec<f64> {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        w.iter_mut().for_each(|v| *v /= norm);
    }
    let imax = (0..w.len()).max_by(|&i, &j| w[i].abs().total_cmp(&w[j].abs())).unwrap_or(0);
    if w.get(imax).is_some_and(|v| *v < 0.0) {
        w.iter_mut().for_each(|v| *v = -*v);
    }
    w
}

/// Restricted Poincaré constant: the top eigenvalue of the pencil `(Σ_F, A)`.
pub fn restricted_poincare(mo: &Moments) -> Result<f64> {
    Ok(gen_eig_max(&mo.cov_f, &mo.a_matrix)?.0)
}

fn poincare_rhs(c_p: f64, gamma_mle: &SymMatrix, theta: &[f64], s: &Smoothness) -> Result<f64> {
    let g = gamma_mle.op_norm()?;
    let theta2: f64 = theta.iter().map(|t| t * t).sum();
    Ok(2.0 * c_p * c_p * g * g * (theta2 * s.e_jf4 + s.e_lap2))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `‖Γ_SM‖_OP ≤ 2 C_P² ‖Γ_MLE‖²_OP (‖θ‖² 𝔼‖JF‖⁴_OP + 𝔼‖ΔF‖²)` for a supplied `C_P`.
pub fn poincare_bound_check(model: &ExpFamilyModel, c_p: f64) -> Result<BoundCheck> {
    let mo = model.moments();
    let gsm = gamma_sm_from(&mo)?;
    let gmle = gamma_mle_from(&mo)?;
    let smooth = Smoothness {
        e_jf4: mo.e_jf4,
        e_lap2: mo.e_lap2,
    };
    let lhs = gsm.op_norm()?;
    let rhs = poincare_rhs(c_p, &gmle, model.theta(), &smooth)?;
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + CHECK_SLACK),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PencilCheck {
    /// Top eigenvalue of the pencil `(A⁻¹, Σ_F⁻¹)`.
    pub pencil_max: f64,
    pub c_p_restricted: f64,
    pub holds: bool,
}

/// Checks `A⁻¹ ⪯ C_P Σ_F⁻¹` via the pencil `(A⁻¹, Σ_F⁻¹)`.
pub fn pencil_check(mo: &Moments, c_p_restricted: f64) -> Result<PencilCheck> {
    let a_inv = mo.a_matrix.inverse_spd()?;
    let s_inv = mo.cov_f.inverse_spd()?;
    let (pencil_max, _) = gen_eig_max(&a_inv, &s_inv)?;
    Ok(PencilCheck {
        pencil_max,
        c_p_restricted,
        holds: pencil_max <= c_p_restricted * (1.0 + CHECK_SLACK),
    })
}

/// Sample covariance of row vectors.
pub fn empirical_covariance(rows: &[Vec<f64>]) -> SymMatrix {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for k in 0..d {
            mean[k] += r[k] / n;
        }
    }
    let centered: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&mean).map(|(a, b)| a - b).collect()).collect();
    SymMatrix::outer_sum(d, centered.iter().map(|c| (1.0 / n, c.as_slice())))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SumCovarianceCheck {
    pub pairs: usize,
    /// Smallest eigenvalue of `2Σ_A + 2Σ_B − Σ_{A+B}` over all pairs.
    pub min_eigenvalue: f64,
    pub holds: bool,
}

/// Property check of `Σ_{A+B} ⪯ 2Σ_A + 2Σ_B` on random correlated pairs.
pub fn sum_covariance_check(stream: &RngStream, pairs: usize, draws: usize) -> Result<SumCovarianceCheck> {
    let mut min_eigenvalue = f64::INFINITY;
    for p in 0..pairs {
        let mut rng = stream.substream(p as u64);
        let dim = 1 + rng.below(5);
        let mix: Vec<f64> = (0..4 * dim * dim).map(|_| rng.std_normal()).collect();
        let coupling = rng.uniform_range(-2.0, 2.0);
        let mut a_rows = Vec::with_capacity(draws);
        let mut b_rows = Vec::with_capacity(draws);
        let mut s_rows = Vec::with_capacity(draws);
        for _ in 0..draws {
            let z: Vec<f64> = (0..2 * dim).map(|_| rng.std_normal()).collect();
            let a: Vec<f64> = (0..dim).map(|i| (0..2 * dim).map(|k| mix[i * 2 * dim + k] * z[k]).sum()).collect();
            let b: Vec<f64> = (0..dim)
                .map(|i| coupling * a[i] + (0..2 * dim).map(|k| mix[(dim + i) * 2 * dim + k] * z[k]).sum::<f64>())
                .collect();
            s_rows.push(a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<f64>>());
            a_rows.push(a);
            b_rows.push(b);
        }
        let diff = empirical_covariance(&a_rows)
            .scaled(2.0)
            .add(&empirical_covariance(&b_rows).scaled(2.0))
            .sub(&empirical_covariance(&s_rows));
        min_eigenvalue = min_eigenvalue.min(sym_eig(&diff)?.values[0]);
    }
    Ok(SumCovarianceCheck {
        pairs,
        min_eigenvalue,
        holds: min_eigenvalue >= -1e-10,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutDiagnostics {
    /// `1 − cᵀ Σ_{F₁}⁻¹ c / Var(1_S)` with `c = Cov(F₁, 1_S)`.
    pub delta1: f64,
    pub var_cut: f64,
    pub prob_s: f64,
    /// Density at the cut point (the 1-D surface mass of `∂S`).
    pub surface_mass: f64,
}

/// Cut diagnostics for `S = {x > cut}` under a model whose statistic is `F₁` alone.
pub fn cut_diagnostics(model: &ExpFamilyModel, cut: f64) -> Result<CutDiagnostics> {
    let mo = model.moments();
    let m = model.stat().dim();
    let prob_s = model.prob_above(cut);
    let hi = model.domain().hi();
    let c: Vec<f64> = (0..m)
        .map(|k| {
            let fk = |x: f64| model.stat().components()[k].value(x);
            model.expect_on(fk, cut, hi) - mo.mean_f[k] * prob_s
        })
        .collect();
    let var_cut = prob_s * (1.0 - prob_s);
    let explained = if c.iter().all(|v| *v == 0.0) {
        0.0
    } else {
        let sol = crate::numerics::solve_spd(&mo.cov_f, &c)?;
        sol.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>()
    };
    Ok(CutDiagnostics {
        delta1: 1.0 - explained / var_cut,
        var_cut,
        prob_s,
        surface_mass: model.density(cut),
    })
}

/// Plug-in sandwich estimate of `Γ_SM` from samples: empirical `A` and empirical
/// covariance of the drift at the supplied `θ`.
pub fn gamma_sm_monte_carlo(stat: &SufficientStatistic, theta: &[f64], samples: &[f64]) -> Result<SymMatrix> {
    let m = stat.dim();
    let n = samples.len() as f64;
    let mut a = SymMatrix::zeros(m);
    let mut drifts = Vec::with_capacity(samples.len());
    for &x in samples {
        let j = stat.jac(x);
        let g = stat.effective_lap(x);
        let jt: f64 = j.iter().zip(theta).map(|(p, q)| p * q).sum();
        for r in 0..m {
            for c in r..m {
                a.set(r, c, a.get(r, c) + j[r] * j[c] / n);
            }
        }
        drifts.push(j.iter().zip(&g).map(|(ji, gi)| ji * jt + gi).collect::<Vec<f64>>());
    }
    sandwich(&a, &empirical_covariance(&drifts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfam::catalog;

    #[test]
    fn gaussian_location_reports_unit_everything() {
        let model = catalog::gaussian_mean_1d(0.0).model().unwrap();
        let r = AsymptoticReport::compute(&model).unwrap();
        assert!((r.gamma_mle.get(0, 0) - 1.0).abs() < 1e-9);
        // Hand computation: the drift is θ − x, so Σ_drift = Var(X) = 1 and A = 1.
        assert!((r.gamma_sm.get(0, 0) - 1.0).abs() < 1e-9);
        assert!((r.worst_ratio - 1.0).abs() < 1e-9);
        assert!((r.c_p_restricted - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_poincare_bound_arithmetic() {
        let model = catalog::gaussian_mean_1d(0.0).model().unwrap();
        let b = poincare_bound_check(&model, 1.0).unwrap();
        // rhs = 2·1·1·(0·1 + 𝔼X²) = 2.
        assert!((b.lhs - 1.0).abs() < 1e-9);
        assert!((b.rhs - 2.0).abs() < 1e-9);
        assert!(b.holds);
    }

    #[test]
    fn theta_doubling_quadruples_theta_term() {
        let fam = catalog::bimodal_quartic(2.0);
        let mo = fam.model().unwrap().moments();
        let s = Smoothness { e_jf4: mo.e_jf4, e_lap2: 0.0 };
        let g = gamma_mle_from(&mo).unwrap();
        let r1 = poincare_rhs(1.0, &g, &[1.0], &s).unwrap();
        let r2 = poincare_rhs(1.0, &g, &[2.0], &s).unwrap();
        assert!((r2 / r1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn efficiency_trivial_pencils() {
        let g = SymMatrix::from_rows(2, vec![2.0, 0.3, 0.3, 1.0]).unwrap();
        assert!((relative_efficiency(&g, &g).unwrap().0 - 1.0).abs() < 1e-12);
        assert!((relative_efficiency(&g.scaled(4.0), &g).unwrap().0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn worst_ratio_congruence_invariant() {
        let model = catalog::bimodal_with_cut(3.0).model().unwrap();
        let r = AsymptoticReport::compute(&model).unwrap();
        let m = [1.3, -0.4, 0.7, 2.1];
        let (ratio, _) = relative_efficiency(&r.gamma_sm.congruence(&m), &r.gamma_mle.congruence(&m)).unwrap();
        assert!(((ratio - r.worst_ratio) / r.worst_ratio).abs() < 1e-8);
    }

    #[test]
    fn bound_and_pencil_hold_on_catalog() {
        for fam in catalog::standard_instances() {
            let model = fam.model().unwrap();
            let mo = model.moments();
            let r = AsymptoticReport::from_moments(&mo, model.theta()).unwrap();
            let b = poincare_bound_check(&model, r.c_p_restricted).unwrap();
            assert!(b.holds, "{}: {} > {}", fam.label, b.lhs, b.rhs);
            let l = pencil_check(&mo, r.c_p_restricted).unwrap();
            assert!(l.holds, "{}", fam.label);
            assert!(((l.pencil_max - r.c_p_restricted) / r.c_p_restricted).abs() < 1e-8, "{}", fam.label);
        }
    }

    #[test]
    fn sum_covariance_property_and_cases() {
        let r = sum_covariance_check(&RngStream::new(42, 0), 200, 1000).unwrap();
        assert!(r.holds, "{}", r.min_eigenvalue);
        // B = −A: Σ_{A+B} = 0.
        let mut rng = RngStream::new(1, 1);
        let a: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.std_normal(), rng.std_normal()]).collect();
        let neg: Vec<Vec<f64>> = a.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
        let zero: Vec<Vec<f64>> = a.iter().map(|_| vec![0.0, 0.0]).collect();
        assert!(empirical_covariance(&zero).frobenius() == 0.0);
        let ca = empirical_covariance(&a);
        let cn = empirical_covariance(&neg);
        assert!(ca.sub(&cn).frobenius() < 1e-12);
        // B = A: Σ_{2A} = 4Σ_A exactly the right-hand side.
        let twice: Vec<Vec<f64>> = a.iter().map(|v| v.iter().map(|x| 2.0 * x).collect()).collect();
        let lhs = empirical_covariance(&twice);
        assert!(lhs.sub(&ca.scaled(4.0)).frobenius() < 1e-10 * lhs.frobenius());
    }

    #[test]
    fn cut_diagnostics_even_and_erf() {
        let model = catalog::bimodal_quartic(3.0).model().unwrap();
        let d = cut_diagnostics(&model, 0.0).unwrap();
        assert!((d.delta1 - 1.0).abs() < 1e-8);
        assert!((d.prob_s - 0.5).abs() < 1e-10);
        assert!((d.var_cut - d.prob_s * (1.0 - d.prob_s)).abs() < 1e-10);

        let fam = catalog::bimodal_with_cut(2.0);
        let m = fam.model_at(vec![1.0, 0.3]).unwrap();
        let d = cut_diagnostics(&m, 0.0).unwrap();
        assert!(d.delta1 < 1.0 && d.delta1 >= -1e-8, "{}", d.delta1);
    }

    #[test]
    fn cut_diagnostics_against_trapezoid_oracle() {
        // δ₁ for F₁ = (x, erf x) under N(0.4, 1)-like weights, recomputed on a fine trapezoid grid.
        use crate::expfam::{Erf, Polynomial, SufficientStatistic};
        use std::sync::Arc;
        let stat = Arc::new(SufficientStatistic::new(
            "x_erf",
            vec![Arc::new(Polynomial::new(vec![0.0, 0.0, -0.5])), Arc::new(Erf)],
        ));
        let model = crate::expfam::ExpFamilyModel::on_interval(stat, vec![1.0, 1.0], -12.0, 12.0).unwrap();
        let d = cut_diagnostics(&model, 0.0).unwrap();
        let n = 400_000;
        let h = 24.0 / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| -12.0 + i as f64 * h).collect();
        let w: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let t = if i == 0 || i == n { 0.5 } else { 1.0 };
                t * (-0.5 * x * x + libm::erf(x)).exp()
            })
            .collect();
        let z: f64 = w.iter().sum();
        let e = |f: &dyn Fn(f64) -> f64| xs.iter().zip(&w).map(|(&x, &wi)| wi * f(x)).sum::<f64>() / z;
        let f1 = |x: f64| -0.5 * x * x;
        let f2 = |x: f64| libm::erf(x);
        let ind = |x: f64| if x > 0.0 { 1.0 } else if x == 0.0 { 0.5 } else { 0.0 };
        let (m1, m2, ps) = (e(&f1), e(&f2), e(&ind));
        let s11 = e(&|x| f1(x) * f1(x)) - m1 * m1;
        let s12 = e(&|x| f1(x) * f2(x)) - m1 * m2;
        let s22 = e(&|x| f2(x) * f2(x)) - m2 * m2;
        let c1 = e(&|x| f1(x) * ind(x)) - m1 * ps;
        let c2 = e(&|x| f2(x) * ind(x)) - m2 * ps;
        let det = s11 * s22 - s12 * s12;
        let q = (s22 * c1 * c1 - 2.0 * s12 * c1 * c2 + s11 * c2 * c2) / det;
        let delta = 1.0 - q / (ps * (1.0 - ps));
        assert!((d.prob_s - ps).abs() < 1e-8);
        assert!((d.delta1 - delta).abs() < 1e-6, "{} vs {delta}", d.delta1);
        assert!(d.delta1 < 1.0);
    }

    #[test]
    fn monte_carlo_sandwich_agrees_with_quadrature() {
        for fam in [catalog::bimodal_quartic(1.0), catalog::oscillating(2.0), catalog::bimodal_with_cut(2.0)] {
            let model = fam.model().unwrap();
            let xs = model.sample(&mut RngStream::new(77, 0), 1_000_000);
            let mc = gamma_sm_monte_carlo(&fam.stat, &fam.theta, &xs).unwrap();
            let q = gamma_sm(&model).unwrap();
            let rel = mc.sub(&q).frobenius() / q.frobenius();
            assert!(rel < 0.05, "{}: {rel}", fam.label);
        }
    }
}
