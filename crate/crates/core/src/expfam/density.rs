//! A minimal interface for normalized 1-D densities with known score.

/// A normalized density on the real line.
pub trait Density1D: Send + Sync {
    fn log_density(&self, x: f64) -> f64;

    /// `d/dx log p(x)`.
    fn score(&self, x: f64) -> f64;

    fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }
}

/// `N(mean, sd²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Self {
        assert!(sd > 0.0, "standard deviation must be positive");
        Self { mean, sd }
    }

    pub fn standard() -> Self {
        Self::new(0.0, 1.0)
    }
}

impl Density1D for Normal {
    fn log_density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        -0.5 * z * z - self.sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    fn score(&self, x: f64) -> f64 {
        -(x - self.mean) / (self.sd * self.sd)
    }
}

impl<T: Density1D + ?Sized> Density1D for &T {
    fn log_density(&self, x: f64) -> f64 {
        (**self).log_density(x)
    }

    fn score(&self, x: f64) -> f64 {
        (**self).score(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_values() {
        let n = Normal::standard();
        assert!((n.density(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(n.score(2.0), -2.0);
        let s = Normal::new(1.0, 2.0);
        assert!((s.score(3.0) + 0.5).abs() < 1e-15);
    }
}
