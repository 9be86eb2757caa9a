//! Score matching versus maximum likelihood: estimators, asymptotic
//! efficiency, functional inequalities and the experiment harness built on them.

pub mod asymptotics;
pub mod discrete;
pub mod error;
pub mod estimators;
pub mod expcli;
pub mod expfam;
pub mod functional;
pub mod neuralscore;
pub mod numerics;

pub use error::{Error, Result};
