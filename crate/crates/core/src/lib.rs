//! Max-spectrum estimation of the heavy-tail exponent α.
//!
//! A positive time series is summarised by its dyadic *max-spectrum*: for each
//! scale `j` the mean of `log2` of the maxima over consecutive blocks of `2^j`
//! observations. For data with Pareto-type tails the spectrum is asymptotically
//! linear in `j` with slope `H = 1/α`, and dependence only bends the small
//! scales. The crate provides
//!
//! * batch and O(log n) streaming computation of the spectrum ([`spectrum`]),
//! * constrained OLS/WLS/GLS regression over a scale range, the asymptotic
//!   covariance `Σ₁`, asymptotic and Monte-Carlo confidence intervals
//!   ([`estimator`]),
//! * automatic selection of the cut-off scale `j1` ([`autoselect`]),
//! * the Hill estimator as a baseline ([`hill`]),
//! * synthetic heavy-tailed generators with known α ([`generators`]),
//! * a replicate-parallel coverage and MSE harness ([`experiments`]).
//!
//! Replicate loops run on rayon when the default `parallel` feature is on and
//! fall back to plain iteration otherwise. Every replicate draws from its own
//! ChaCha8 stream, so results never depend on the worker count.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autoselect;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod frechet;
pub mod generators;
pub mod hill;
pub mod par;
pub mod rng;
pub mod spectrum;
pub mod stats;

pub use autoselect::{select_j1, AutoSelectConfig, Selection, SelectionStep};
pub use error::{Error, Result};
pub use estimator::{
    asymptotic_ci, estimate, montecarlo_ci, regression_weights, sigma1_matrix, CiKind,
    ConfidenceInterval, CovarianceMode, CovarianceModel, McCiConfig, Method, ScaleRange,
    TailEstimate, WeightVector,
};
pub use frechet::{log2_frechet_moments, FrechetParams, ParetoParams};
pub use generators::{extremal_index_moving_maxima, gen_series, Innovation, Model, ModelConfig};
pub use hill::{hill_estimate, hill_plot, HillPlot, HillPoint};
pub use par::Execution;
pub use spectrum::{compute_spectrum_batch, MaxSpectrum, ScaleStat, StreamState};
