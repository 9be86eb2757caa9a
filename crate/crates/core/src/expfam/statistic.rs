//! Sufficient statistics on the real line, built from scalar features that
//! know their first two derivatives.

use std::fmt;
use std::sync::Arc;

/// A smooth scalar function with analytic first and second derivatives.
pub trait ScalarFeature: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn describe(&self) -> String;
}

/// `Σ_k c_k x^k`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    fn horner(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn derivative_coeffs(coeffs: &[f64]) -> Vec<f64> {
        coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
    }
}

impl ScalarFeature for Polynomial {
    fn value(&self, x: f64) -> f64 {
        Self::horner(&self.coeffs, x)
    }

    fn d1(&self, x: f64) -> f64 {
        Self::horner(&Self::derivative_coeffs(&self.coeffs), x)
    }

    fn d2(&self, x: f64) -> f64 {
        let d = Self::derivative_coeffs(&self.coeffs);
        Self::horner(&Self::derivative_coeffs(&d), x)
    }

    fn describe(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| format!("{c}*x^{k}"))
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// The error function.
#[derive(Debug, Clone, Copy)]
pub struct Erf;

impl ScalarFeature for Erf {
    fn value(&self, x: f64) -> f64 {
        super::special::erf(x)
    }

    fn d1(&self, x: f64) -> f64 {
        super::special::erf_d1(x)
    }

    fn d2(&self, x: f64) -> f64 {
        -2.0 * x * super::special::erf_d1(x)
    }

    fn describe(&self) -> String {
        "erf(x)".into()
    }
}

/// `amplitude · sin(ω x)`.
#[derive(Debug, Clone, Copy)]
pub struct Sine {
    pub omega: f64,
    pub amplitude: f64,
}

impl ScalarFeature for Sine {
    fn value(&self, x: f64) -> f64 {
        self.amplitude * (self.omega * x).sin()
    }

    fn d1(&self, x: f64) -> f64 {
        self.amplitude * self.omega * (self.omega * x).cos()
    }

    fn d2(&self, x: f64) -> f64 {
        -self.amplitude * self.omega * self.omega * (self.omega * x).sin()
    }

    fn describe(&self) -> String {
        format!("{}*sin({}x)", self.amplitude, self.omega)
    }
}

/// Pointwise sum of features.
#[derive(Clone)]
pub struct SumFeature {
    parts: Vec<Arc<dyn ScalarFeature>>,
}

impl SumFeature {
    pub fn new(parts: Vec<Arc<dyn ScalarFeature>>) -> Self {
        Self { parts }
    }
}

impl ScalarFeature for SumFeature {
    fn value(&self, x: f64) -> f64 {
        self.parts.iter().map(|p| p.value(x)).sum()
    }

    fn d1(&self, x: f64) -> f64 {
        self.parts.iter().map(|p| p.d1(x)).sum()
    }

    fn d2(&self, x: f64) -> f64 {
        self.parts.iter().map(|p| p.d2(x)).sum()
    }

    fn describe(&self) -> String {
        self.parts.iter().map(|p| p.describe()).collect::<Vec<_>>().join(" + ")
    }
}

/// Point evaluation of a statistic and its derivatives at one `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatEval {
    pub f: Vec<f64>,
    /// `(JF)_x`, an `m × 1` Jacobian stored as a vector.
    pub jac: Vec<f64>,
    /// `ΔF(x)`.
    pub lap: Vec<f64>,
}

/// `F: ℝ → ℝ^m` together with an optional base log-measure `b`, so that the
/// family is `p_θ(x) ∝ exp(⟨θ, F(x)⟩ + b(x))`.
#[derive(Clone)]
pub struct SufficientStatistic {
    name: String,
    components: Vec<Arc<dyn ScalarFeature>>,
    base: Option<Arc<dyn ScalarFeature>>,
}

impl fmt::Debug for SufficientStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SufficientStatistic")
            .field("name", &self.name)
            .field("components", &self.components.iter().map(|c| c.describe()).collect::<Vec<_>>())
            .field("base", &self.base.as_ref().map(|b| b.describe()))
            .finish()
    }
}

impl SufficientStatistic {
    pub fn new(name: impl Into<String>, components: Vec<Arc<dyn ScalarFeature>>) -> Self {
        assert!(!components.is_empty(), "a statistic needs at least one component");
        Self {
            name: name.into(),
            components,
            base: None,
        }
    }

    pub fn with_base(mut self, base: Arc<dyn ScalarFeature>) -> Self {
        self.base = Some(base);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Output dimension `m`.
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Input dimension; only scalar inputs are supported by this type.
    pub fn input_dim(&self) -> usize {
        1
    }

    pub fn components(&self) -> &[Arc<dyn ScalarFeature>] {
        &self.components
    }

    pub fn has_base(&self) -> bool {
        self.base.is_some()
    }

    /// The first `k` components, keeping the base measure.
    pub fn leading(&self, k: usize, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            components: self.components[..k].to_vec(),
            base: self.base.clone(),
        }
    }

    /// Concatenation of two statistics. The base measures must not both be present.
    pub fn stack(&self, other: &Self, name: impl Into<String>) -> Self {
        assert!(
            !(self.base.is_some() && other.base.is_some()),
            "cannot stack two statistics that both carry a base measure"
        );
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Self {
            name: name.into(),
            components,
            base: self.base.clone().or_else(|| other.base.clone()),
        }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    pub fn jac(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.d1(x)).collect()
    }

    pub fn lap(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.d2(x)).collect()
    }

    pub fn eval_all(&self, x: f64) -> StatEval {
        StatEval {
            f: self.eval(x),
            jac: self.jac(x),
            lap: self.lap(x),
        }
    }

    pub fn base_value(&self, x: f64) -> f64 {
        self.base.as_ref().map_or(0.0, |b| b.value(x))
    }

    pub fn base_d1(&self, x: f64) -> f64 {
        self.base.as_ref().map_or(0.0, |b| b.d1(x))
    }

    pub fn base_d2(&self, x: f64) -> f64 {
        self.base.as_ref().map_or(0.0, |b| b.d2(x))
    }

    /// `ΔF + (JF)·∇b`: the term that plays the role of `ΔF` once a base
    /// measure is present. Equals `ΔF` when there is none.
    pub fn effective_lap(&self, x: f64) -> Vec<f64> {
        let b1 = self.base_d1(x);
        self.components.iter().map(|c| c.d2(x) + c.d1(x) * b1).collect()
    }

    /// Unnormalized log-density `⟨θ, F(x)⟩ + b(x)`.
    pub fn log_weight(&self, theta: &[f64], x: f64) -> f64 {
        debug_assert_eq!(theta.len(), self.dim());
        self.components.iter().zip(theta).map(|(c, t)| t * c.value(x)).sum::<f64>() + self.base_value(x)
    }

    /// `d/dx` of the log-density: `⟨θ, (JF)_x⟩ + b′(x)`.
    pub fn score(&self, theta: &[f64], x: f64) -> f64 {
        self.components.iter().zip(theta).map(|(c, t)| t * c.d1(x)).sum::<f64>() + self.base_d1(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        // 1 + 2x + 3x² − x⁴
        let p = Polynomial::new(vec![1.0, 2.0, 3.0, 0.0, -1.0]);
        let x = 1.5;
        assert!((p.value(x) - (1.0 + 3.0 + 6.75 - 5.0625)).abs() < 1e-14);
        assert!((p.d1(x) - (2.0 + 9.0 - 13.5)).abs() < 1e-14);
        assert!((p.d2(x) - (6.0 - 27.0)).abs() < 1e-13);
    }

    #[test]
    fn sine_derivatives() {
        let s = Sine { omega: 3.0, amplitude: -1.0 };
        let x = 0.3f64;
        assert!((s.value(x) + (0.9f64).sin()).abs() < 1e-15);
        assert!((s.d1(x) + 3.0 * (0.9f64).cos()).abs() < 1e-15);
        assert!((s.d2(x) - 9.0 * (0.9f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn stacking_and_leading() {
        let a = SufficientStatistic::new("a", vec![Arc::new(Polynomial::new(vec![0.0, 1.0]))]);
        let b = SufficientStatistic::new("b", vec![Arc::new(Erf)]);
        let s = a.stack(&b, "ab");
        assert_eq!(s.dim(), 2);
        assert_eq!(s.eval(0.0), vec![0.0, 0.0]);
        assert_eq!(s.leading(1, "a").dim(), 1);
    }

    #[test]
    fn base_enters_score_and_effective_lap() {
        let s = SufficientStatistic::new("loc", vec![Arc::new(Polynomial::new(vec![0.0, 1.0]))])
            .with_base(Arc::new(Polynomial::new(vec![0.0, 0.0, -0.5])));
        // score of N(μ, 1) at x is μ − x
        assert!((s.score(&[0.7], 2.0) - (0.7 - 2.0)).abs() < 1e-15);
        assert_eq!(s.effective_lap(2.0), vec![-2.0]);
    }
}
