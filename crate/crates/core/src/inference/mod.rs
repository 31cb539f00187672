//! Posterior of the hidden matching and the estimators built on it.
//!
//! - [`likelihood`]: the edge likelihood ratio `ℓ`, the constants `P, Q, R` and the
//!   log-likelihood ratio of a candidate matching;
//! - [`posterior`]: exact posterior tables at `n ≤ 7` and the overlap masses `M`, `W`;
//! - [`estimators`]: the common-edge maximizer and the reasonable-candidate estimator;
//! - [`tv`]: total variation between the independent and correlated laws;
//! - [`truncated`]: the truncated mixture sums `f` and `g`.

use thiserror::Error;

use crate::admissibility::AdmissibilityError;
use crate::density::DensityError;
use crate::model::ModelError;

pub mod estimators;
pub mod likelihood;
pub mod posterior;
pub mod truncated;
pub mod tv;

pub use estimators::{
    map_estimator, reasonable_candidate_check, reasonable_candidate_search, CandidateCheck, EstimatorConfig,
    MapEstimate, SearchStrategy,
};
pub use likelihood::{edge_ll, log_likelihood_ratio, LikelihoodConstants};
pub use posterior::{
    exact_posterior, ln_mixture_ratio, posterior_overlap_mass, posterior_w, posterior_w_argmax, PosteriorTable,
};
pub use truncated::{truncated_mass_f, truncated_mass_g};
pub use tv::{tv_exact, tv_mc, TvEstimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("{what} limited to n ≤ {max}, got {n}")]
    TooLarge { what: &'static str, n: usize, max: usize },
    #[error("likelihood routes disagree: product {product}, closed form {closed}")]
    Inconsistent { product: f64, closed: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Admissibility(#[from] AdmissibilityError),
}

pub(crate) fn check_size(what: &'static str, n: usize, max: usize) -> Result<(), InferenceError> {
    if n > max {
        Err(InferenceError::TooLarge { what, n, max })
    } else {
        Ok(())
    }
}

/// `⌈δn⌉`, guarding against `δn` landing a rounding error above an integer.
pub fn overlap_threshold(delta: f64, n: usize) -> usize {
    let x = delta * n as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}
