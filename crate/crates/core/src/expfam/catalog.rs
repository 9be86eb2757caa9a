//! Named statistics with their default parameters and truncation domains.

use std::sync::Arc;

use super::mollifier::MollifierStat;
use super::model::ExpFamilyModel;
use super::statistic::{Erf, Polynomial, ScalarFeature, Sine, SufficientStatistic, SumFeature};
use crate::error::{Error, Result};

/// Half-width added around the modes of the bimodal families.
pub const BIMODAL_MARGIN: f64 = 10.0;
/// Half-width of the domain for the Gaussian and oscillating families.
pub const GAUSSIAN_HALF_WIDTH: f64 = 12.0;

/// A statistic together with a parameter and the interval it is truncated to.
#[derive(Debug, Clone)]
pub struct CatalogFamily {
    pub label: String,
    pub stat: Arc<SufficientStatistic>,
    pub theta: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl CatalogFamily {
    pub fn model(&self) -> Result<ExpFamilyModel> {
        ExpFamilyModel::on_interval(self.stat.clone(), self.theta.clone(), self.lo, self.hi)
    }

    pub fn model_at(&self, theta: Vec<f64>) -> Result<ExpFamilyModel> {
        ExpFamilyModel::on_interval(self.stat.clone(), theta, self.lo, self.hi)
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Self {
        Self { theta, ..self.clone() }
    }
}

fn bimodal_domain(a: f64) -> (f64, f64) {
    (-(a + BIMODAL_MARGIN), a + BIMODAL_MARGIN)
}

fn check_offset(a: f64) {
    assert!(a > 0.0 && a.is_finite(), "offset must be positive");
}

/// `F₁(x) = −x⁴/(8a²) + x²/4 − a²/8`; at `θ = 1` the density has modes near `±a`
/// separated by a barrier of height `a²/8`.
pub fn bimodal_quartic_stat(a: f64) -> SufficientStatistic {
    check_offset(a);
    let poly = Polynomial::new(vec![-a * a / 8.0, 0.0, 0.25, 0.0, -1.0 / (8.0 * a * a)]);
    SufficientStatistic::new(format!("bimodal_quartic(a={a})"), vec![Arc::new(poly)])
}

pub fn bimodal_quartic(a: f64) -> CatalogFamily {
    let (lo, hi) = bimodal_domain(a);
    CatalogFamily {
        label: format!("bimodal_quartic(a={a})"),
        stat: Arc::new(bimodal_quartic_stat(a)),
        theta: vec![1.0],
        lo,
        hi,
    }
}

fn double_well(a: f64) -> Polynomial {
    Polynomial::new(vec![0.0, 0.0, 1.0, 0.0, -1.0 / (2.0 * a * a)])
}

/// Components `(x² − x⁴/(2a²), x² − x⁴/(2a²) + erf(x))`.
pub fn bimodal_with_cut_stat(a: f64) -> SufficientStatistic {
    check_offset(a);
    let well: Arc<dyn ScalarFeature> = Arc::new(double_well(a));
    let cut: Arc<dyn ScalarFeature> = Arc::new(SumFeature::new(vec![well.clone(), Arc::new(Erf)]));
    SufficientStatistic::new(format!("bimodal_with_cut(a={a})"), vec![well, cut])
}

/// The two-statistic family at `θ = (1, 0)`.
pub fn bimodal_with_cut(a: f64) -> CatalogFamily {
    let (lo, hi) = bimodal_domain(a);
    CatalogFamily {
        label: format!("bimodal_with_cut(a={a})"),
        stat: Arc::new(bimodal_with_cut_stat(a)),
        theta: vec![1.0, 0.0],
        lo,
        hi,
    }
}

/// The single statistic `x² − x⁴/(2a²)` at `θ = 1` (the cut family with the erf component removed).
pub fn bimodal_single(a: f64) -> CatalogFamily {
    check_offset(a);
    let (lo, hi) = bimodal_domain(a);
    CatalogFamily {
        label: format!("bimodal_single(a={a})"),
        stat: Arc::new(SufficientStatistic::new(
            format!("bimodal_single(a={a})"),
            vec![Arc::new(double_well(a))],
        )),
        theta: vec![1.0],
        lo,
        hi,
    }
}

/// Location family of `N(μ, 1)`: `F(x) = x` with base measure `−x²/2`, `θ = μ`.
pub fn gaussian_mean_stat() -> SufficientStatistic {
    SufficientStatistic::new("gaussian_mean(d=1)", vec![Arc::new(Polynomial::new(vec![0.0, 1.0]))])
        .with_base(Arc::new(Polynomial::new(vec![0.0, 0.0, -0.5])))
}

pub fn gaussian_mean_1d(mu: f64) -> CatalogFamily {
    CatalogFamily {
        label: format!("gaussian_mean(mu={mu})"),
        stat: Arc::new(gaussian_mean_stat()),
        theta: vec![mu],
        lo: mu - GAUSSIAN_HALF_WIDTH,
        hi: mu + GAUSSIAN_HALF_WIDTH,
    }
}

/// Components `(−x²/2, −sin(ωx))` at `θ = (1, 1)`.
pub fn oscillating_stat(omega: f64) -> SufficientStatistic {
    assert!(omega.is_finite(), "frequency must be finite");
    SufficientStatistic::new(
        format!("oscillating(omega={omega})"),
        vec![
            Arc::new(Polynomial::new(vec![0.0, 0.0, -0.5])),
            Arc::new(Sine { omega, amplitude: -1.0 }),
        ],
    )
}

pub fn oscillating(omega: f64) -> CatalogFamily {
    CatalogFamily {
        label: format!("oscillating(omega={omega})"),
        stat: Arc::new(oscillating_stat(omega)),
        theta: vec![1.0, 1.0],
        lo: -GAUSSIAN_HALF_WIDTH,
        hi: GAUSSIAN_HALF_WIDTH,
    }
}

/// `F₂ = 1_{x>0} ∗ ψ_γ` as a one-component statistic.
pub fn mollifier_cut_stat(gamma: f64) -> SufficientStatistic {
    SufficientStatistic::new(format!("mollifier_cut(gamma={gamma})"), vec![Arc::new(MollifierStat::new(gamma))])
}

/// `bimodal_quartic(a)` stacked with the mollified cut, at `θ = (1, 0)`.
pub fn bimodal_mollified(a: f64, gamma: f64) -> CatalogFamily {
    let (lo, hi) = bimodal_domain(a);
    let stat = bimodal_quartic_stat(a).stack(
        &mollifier_cut_stat(gamma),
        format!("bimodal_mollified(a={a},gamma={gamma})"),
    );
    CatalogFamily {
        label: stat.name().to_string(),
        stat: Arc::new(stat),
        theta: vec![1.0, 0.0],
        lo,
        hi,
    }
}

/// Builds a statistic by catalog name.
pub fn statistic(name: &str, params: &[f64]) -> Result<SufficientStatistic> {
    match name {
        "mollifier_cut" => {
            let [gamma] = expect_params::<1>(name, params)?;
            if !(gamma > 0.0) {
                return Err(Error::invalid("mollifier_cut needs gamma > 0"));
            }
            Ok(mollifier_cut_stat(gamma))
        }
        _ => Ok(family(name, params)?.stat.as_ref().clone()),
    }
}

/// Builds a family by catalog name with its default parameter and domain.
pub fn family(name: &str, params: &[f64]) -> Result<CatalogFamily> {
    let positive = |v: f64, what: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid(format!("{name} needs {what} > 0, got {v}")))
        }
    };
    match name {
        "gaussian_mean" => {
            let [d] = expect_params::<1>(name, params)?;
            if d != 1.0 {
                return Err(Error::invalid(
                    "gaussian_mean with d > 1 is the closed-form GaussianLocation type, not a quadrature family",
                ));
            }
            Ok(gaussian_mean_1d(0.0))
        }
        "bimodal_quartic" => Ok(bimodal_quartic(positive(expect_params::<1>(name, params)?[0], "a")?)),
        "bimodal_single" => Ok(bimodal_single(positive(expect_params::<1>(name, params)?[0], "a")?)),
        "bimodal_with_cut" => Ok(bimodal_with_cut(positive(expect_params::<1>(name, params)?[0], "a")?)),
        "oscillating" => Ok(oscillating(positive(expect_params::<1>(name, params)?[0], "omega")?)),
        "bimodal_mollified" => {
            let [a, gamma] = expect_params::<2>(name, params)?;
            Ok(bimodal_mollified(positive(a, "a")?, positive(gamma, "gamma")?))
        }
        "mollifier_cut" => Err(Error::invalid("mollifier_cut is a statistic, not a normalizable family")),
        other => Err(Error::invalid(format!("unknown catalog entry `{other}`"))),
    }
}

fn expect_params<const N: usize>(name: &str, params: &[f64]) -> Result<[f64; N]> {
    params
        .try_into()
        .map_err(|_| Error::invalid(format!("{name} takes {N} parameter(s), got {}", params.len())))
}

/// Catalog names accepted by [`family`] and [`statistic`].
pub const NAMES: &[&str] = &[
    "gaussian_mean",
    "bimodal_quartic",
    "bimodal_single",
    "bimodal_with_cut",
    "oscillating",
    "mollifier_cut",
    "bimodal_mollified",
];

/// A representative instance set used wherever a property must hold for
/// "every catalog family".
pub fn standard_instances() -> Vec<CatalogFamily> {
    let mut v = vec![gaussian_mean_1d(0.0), gaussian_mean_1d(1.5)];
    for a in [1.0, 2.0, 4.0, 7.0] {
        v.push(bimodal_quartic(a));
    }
    for a in [1.0, 3.0, 5.0, 7.0] {
        v.push(bimodal_single(a));
    }
    for a in 1..=7 {
        v.push(bimodal_with_cut(a as f64));
    }
    for omega in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        v.push(oscillating(omega));
    }
    v.push(bimodal_mollified(3.0, 0.5));
    v.push(bimodal_mollified(5.0, 1.0));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistic_derivatives_match_finite_differences() {
        let mut rng = crate::numerics::RngStream::new(5, 0);
        for fam in standard_instances() {
            let s = &fam.stat;
            for _ in 0..100 {
                let x = rng.uniform_range(fam.lo, fam.hi);
                let h1 = 1e-5;
                let h2 = 1e-3;
                let (p1, m1) = (s.eval(x + h1), s.eval(x - h1));
                let (p2, m2) = (s.eval(x + h2), s.eval(x - h2));
                let f0 = s.eval(x);
                let j = s.jac(x);
                let l = s.lap(x);
                for k in 0..s.dim() {
                    let fd1 = (p1[k] - m1[k]) / (2.0 * h1);
                    assert!((fd1 - j[k]).abs() <= 1e-5 * j[k].abs().max(1.0), "{} jac at {x}: {fd1} vs {}", fam.label, j[k]);
                    let fd2 = (p2[k] - 2.0 * f0[k] + m2[k]) / (h2 * h2);
                    assert!((fd2 - l[k]).abs() <= 1e-4 * l[k].abs().max(1.0), "{} lap at {x}: {fd2} vs {}", fam.label, l[k]);
                }
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(family("bimodal_with_cut", &[3.0]).unwrap().theta, vec![1.0, 0.0]);
        assert!(family("bimodal_quartic", &[]).is_err());
        assert!(family("nope", &[1.0]).is_err());
        assert_eq!(statistic("mollifier_cut", &[0.5]).unwrap().dim(), 1);
        for name in NAMES {
            let params: &[f64] = match *name {
                "bimodal_mollified" => &[3.0, 0.5],
                "gaussian_mean" => &[1.0],
                _ => &[2.0],
            };
            assert!(statistic(name, params).is_ok(), "{name}");
        }
    }

    #[test]
    fn quartic_constant_places_barrier() {
        // F₁(0) = −a²/8 and F₁(±a) = 0.
        let s = bimodal_quartic_stat(3.0);
        assert!((s.eval(0.0)[0] + 9.0 / 8.0).abs() < 1e-15);
        assert!(s.eval(3.0)[0].abs() < 1e-14);
    }
}
