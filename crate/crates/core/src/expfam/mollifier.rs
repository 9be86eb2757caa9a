//! The standard bump `ψ(y) ∝ exp(−1/(1 − y²))` on `(−1, 1)`, its rescaling
//! `ψ_γ(x) = ψ(x/γ)/γ`, and the smoothed half-line indicator `F₂ = 1_{x>0} ∗ ψ_γ`.

use std::sync::OnceLock;

use super::statistic::ScalarFeature;
use crate::numerics::quadrature::{compensated_sum, gauss_legendre_nodes};

/// Unnormalized bump on `(−1, 1)`.
fn bump(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Derivative of the unnormalized bump.
fn bump_d1(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - y * y;
        bump(y) * (-2.0 * y / (s * s))
    }
}

/// `∫_{lo}^{hi} bump` by composite Gauss–Legendre.
fn bump_integral(lo: f64, hi: f64) -> f64 {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (t, w) = RULE.get_or_init(|| gauss_legendre_nodes(20));
    if hi <= lo {
        return 0.0;
    }
    let panels = 8;
    let width = (hi - lo) / panels as f64;
    compensated_sum((0..panels).flat_map(|p| {
        let mid = lo + (p as f64 + 0.5) * width;
        t.iter().zip(w).map(move |(ti, wi)| 0.5 * width * wi * bump(mid + 0.5 * width * ti))
    }))
}

/// `I₁ = ∫_{−1}^{1} exp(−1/(1 − y²)) dy`.
pub fn bump_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| 2.0 * bump_integral(-1.0, 0.0))
}

/// `ψ_γ` together with its normalizing constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierStat {
    pub gamma: f64,
    pub psi_norm: f64,
}

impl MollifierStat {
    pub fn new(gamma: f64) -> Self {
        assert!(gamma > 0.0 && gamma.is_finite(), "mollifier scale must be positive");
        Self {
            gamma,
            psi_norm: bump_norm(),
        }
    }

    /// `ψ_γ(x)`.
    pub fn psi(&self, x: f64) -> f64 {
        bump(x / self.gamma) / (self.psi_norm * self.gamma)
    }

    /// `ψ_γ′(x)`.
    pub fn psi_d1(&self, x: f64) -> f64 {
        bump_d1(x / self.gamma) / (self.psi_norm * self.gamma * self.gamma)
    }

    /// `F₂(x) = ∫_{−∞}^{x} ψ_γ`, which equals `∫_0^∞ ψ_γ(x − y) dy`.
    pub fn smoothed_step(&self, x: f64) -> f64 {
        let y = x / self.gamma;
        if y <= -1.0 {
            0.0
        } else if y >= 1.0 {
            1.0
        } else if y <= 0.0 {
            bump_integral(-1.0, y) / self.psi_norm
        } else {
            1.0 - bump_integral(-1.0, -y) / self.psi_norm
        }
    }
}

impl ScalarFeature for MollifierStat {
    fn value(&self, x: f64) -> f64 {
        self.smoothed_step(x)
    }

    fn d1(&self, x: f64) -> f64 {
        self.psi(x)
    }

    fn d2(&self, x: f64) -> f64 {
        self.psi_d1(x)
    }

    fn describe(&self) -> String {
        format!("1_(x>0)*psi_{}", self.gamma)
    }
}
