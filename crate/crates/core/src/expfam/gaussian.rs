//! The isotropic Gaussian location family `N(μ, I_d)` in closed form:
//! `F(x) = x`, base measure `−‖x‖²/2`, natural parameter `θ = μ`.

use crate::numerics::{RngStream, SymMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLocation {
    pub mu: Vec<f64>,
}

impl GaussianLocation {
    pub fn new(mu: Vec<f64>) -> Self {
        assert!(!mu.is_empty(), "dimension must be positive");
        Self { mu }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `log ∫ exp(⟨μ, x⟩ − ‖x‖²/2) dx = ‖μ‖²/2 + (d/2) log 2π`.
    pub fn log_partition(&self) -> f64 {
        let d = self.dim() as f64;
        0.5 * self.mu.iter().map(|m| m * m).sum::<f64>() + 0.5 * d * (2.0 * std::f64::consts::PI).ln()
    }

    /// `Σ_F = I`.
    pub fn cov_f(&self) -> SymMatrix {
        SymMatrix::identity(self.dim())
    }

    /// `A = 𝔼[(JF)(JF)ᵀ] = I`.
    pub fn a_matrix(&self) -> SymMatrix {
        SymMatrix::identity(self.dim())
    }

    /// `𝔼[ΔF + (JF)∇b] = −μ`.
    pub fn mean_lap(&self) -> Vec<f64> {
        self.mu.iter().map(|m| -m).collect()
    }

    /// The drift `μ − x` has covariance `I`.
    pub fn cov_drift(&self) -> SymMatrix {
        SymMatrix::identity(self.dim())
    }

    pub fn sample(&self, stream: &mut RngStream, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| self.mu.iter().map(|m| m + stream.std_normal()).collect())
            .collect()
    }

    /// The score matching estimator, which for this family is the sample mean.
    pub fn score_matching_estimate(samples: &[Vec<f64>]) -> Option<Vec<f64>> {
        let first = samples.first()?;
        let mut mean = vec![0.0; first.len()];
        for s in samples {
            for (m, v) in mean.iter_mut().zip(s) {
                *m += v;
            }
        }
        let n = samples.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        Some(mean)
    }

    /// `D_KL(N(a, I), N(b, I)) = ‖a − b‖²/2`.
    pub fn kl(a: &[f64], b: &[f64]) -> f64 {
        0.5 * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let g = GaussianLocation::new(vec![0.0; 3]);
        assert!((g.log_partition() - 1.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
        assert_eq!(g.cov_f(), SymMatrix::identity(3));
        let h = GaussianLocation::new(vec![1.0, -2.0]);
        let consistency: Vec<f64> = h.a_matrix().matvec(&h.mu).iter().zip(h.mean_lap()).map(|(a, b)| a + b).collect();
        assert_eq!(consistency, vec![0.0, 0.0]);
    }

    #[test]
    fn estimate_is_sample_mean() {
        let g = GaussianLocation::new(vec![0.5, -0.5]);
        let xs = g.sample(&mut RngStream::new(1, 0), 20_000);
        let m = GaussianLocation::score_matching_estimate(&xs).unwrap();
        assert!((m[0] - 0.5).abs() < 0.05 && (m[1] + 0.5).abs() < 0.05);
        assert!(GaussianLocation::score_matching_estimate(&[]).is_none());
    }
}
