//! Smoothed weighted empirical likelihood ratio confidence intervals for
//! quantiles of a lifetime distribution observed under censoring.
//!
//! The pipeline is:
//!
//! 1. reduce the data of any supported [`Scheme`] to censoring intervals and
//!    fit the adjusted NPMLE ([`fit_npmle`]);
//! 2. smooth it piecewise-linearly ([`smoothing`]) and evaluate the weighted
//!    log-likelihood ratio of a probe quantile ([`welr`]);
//! 3. calibrate the likelihood threshold by the bootstrap ([`calibration`]);
//! 4. invert the ratio at that threshold ([`interval`]).
//!
//! [`pipeline::fit_interval`] runs all four steps; [`simlab`] wraps them in
//! Monte Carlo coverage studies.

pub mod baselines;
pub mod calibration;
pub mod censoring;
pub mod error;
pub mod interval;
pub mod npmle;
pub mod pipeline;
pub mod resample;
pub mod rng;
pub mod simlab;
pub mod smoothing;
pub mod welr;

pub use censoring::{parse_sample, CensoredSample, CensoringInterval, Observation, Scheme};
pub use error::{Error, Result};
pub use interval::{welrci, ConfidenceInterval};
pub use npmle::{fit_npmle, DiscreteDistribution, EmOptions, EmReport};
pub use pipeline::{fit_interval, FitOptions, FitOutput};
pub use smoothing::MomentSet;
