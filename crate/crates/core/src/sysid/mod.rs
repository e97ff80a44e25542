//! Coefficient estimation from capture-volume data: file formats, numeric
//! differentiation into body-frame accelerations, the quadratic residual
//! objective, the Metropolis-Hastings sampler, and posterior summaries.

pub mod differentiate;
pub mod mcmc;
pub mod mocap;
pub mod objective;
pub mod summary;

pub use differentiate::{
    reconstruct_observations, unwrap_angles, wrap_to_pi, DifferentiationReport, Observation,
    MAX_JITTER_FRACTION, SMOOTH_WINDOW,
};
pub use mcmc::{
    acceptance_probability, log_target, propose, run_chain, Chain, McmcConfig, PriorBox,
};
pub use mocap::{
    ActuatorRecord, ActuatorSeries, MocapSample, MocapSeries, ACTUATOR_HEADER, MOCAP_HEADER,
};
pub use objective::{direct_sum_squares, QuadraticObjective};
pub use summary::{
    histogram, quantile, summarize, CoefficientSummary, Histogram, PosteriorSummary,
};
