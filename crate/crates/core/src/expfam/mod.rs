//! Exponential families on the real line: statistics with derivatives,
//! log-partition and moments by quadrature, inverse-CDF sampling, and the
//! closed-form isotropic Gaussian location family in any dimension.

pub mod catalog;
mod density;
mod gaussian;
mod model;
mod mollifier;
pub mod special;
mod statistic;

pub use catalog::CatalogFamily;
pub use density::{Density1D, Normal};
pub use gaussian::GaussianLocation;
pub use model::{log_partition, ExpFamilyModel, Moments, DEFAULT_GRID_NODES, TRUNCATION_TOL};
pub use mollifier::{bump_norm, MollifierStat};
pub use statistic::{Erf, Polynomial, ScalarFeature, Sine, StatEval, SufficientStatistic, SumFeature};

/// `F₂ = 1_{x>0} ∗ ψ_γ` as a statistic.
pub fn mollifier_cut_stat(gamma: f64) -> SufficientStatistic {
    catalog::mollifier_cut_stat(gamma)
}
