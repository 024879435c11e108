//! Bayesian SEEIIR influenza model fitted to weekly severe-case counts.
//!
//! The transmission and observation layers are generic over the float type;
//! inference, forecasting and synthetic data work in `f64`.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod epi;
pub mod error;
pub mod forecast;
pub mod inference;
pub mod num;
pub mod observation;
pub mod series;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use num::Real;

pub type EpiParams = epi::EpiParams<f64>;
pub type CompartmentState = epi::CompartmentState<f64>;
pub type Trajectory = epi::Trajectory<f64>;
pub type DelayKernel = observation::DelayKernel<f64>;
pub type ObsParams = observation::ObsParams<f64>;
