//! Priors, posterior evaluation, adaptive block Metropolis-Hastings and
//! convergence diagnostics.

mod derived;
mod diagnostics;
mod draws;
mod params;
mod posterior;
mod prior;
mod sampler;

pub use derived::{derived_quantities, DerivedQuantities};
pub use diagnostics::{
    diagnostics, effective_sample_size, split_potential_scale_reduction, DiagnosticsReport, ParamDiagnostic,
    PSRF_THRESHOLD,
};
pub use draws::{ChainDraws, PosteriorDraws};
pub use params::{ModelConstants, Param, ParamVector, N_PARAMS, POPULATION_2012_13, POPULATION_2013_14, POPULATION_2014_15};
pub use posterior::{PosteriorModel, PosteriorWorkspace};
pub use prior::{log_prior, Prior, PriorScenario, PriorSpec};
pub use sampler::{default_blocks, mh_sample, ChainRng, LogDensity, SamplerConfig};
