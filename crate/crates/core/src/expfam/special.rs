//! Special functions. `erf` is the `libm` port of the FreeBSD msun
//! implementation (piecewise rational approximations, error below 1 ulp).

use std::f64::consts::PI;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// `d/dx erf(x) = (2/√π) e^{−x²}`.
pub fn erf_d1(x: f64) -> f64 {
    2.0 / PI.sqrt() * (-x * x).exp()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
