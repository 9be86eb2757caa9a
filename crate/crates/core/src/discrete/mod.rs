//! Distributions on the hypercube `{±1}^d`: Glauber dynamics, the
//! pseudolikelihood and ratio matching estimators, and enumeration-based
//! checks of approximate tensorization of entropy.

mod estimators;
mod hypercube;
mod tensorization;

pub use estimators::{
    empirical_distribution, fit_weighted, pseudolikelihood_fit, pseudolikelihood_objective, pseudolikelihood_weighted,
    ratio_matching_fit, ratio_matching_objective, ratio_matching_odds_weighted, ratio_matching_weighted, DiscreteFit,
    DiscreteMethod, FIT_GRAD_TOL, FIT_PARAM_BOUND,
};
pub use hypercube::{
    flip, glauber_run, glauber_step, glauber_transition, spin, two_point_mixture, ConditionalQuery, HypercubeModel,
    HypercubeSpec, IsingFamily, MAX_DIM,
};
pub use tensorization::{
    at_constant_search, conditional_kl_sum, marton_tv_check, tensorization_check, AtSearch, MartonReport, TensorizationReport,
};
