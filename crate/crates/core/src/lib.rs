//! Secure multiuser massive-MIMO downlink with a limited number of RF chains.
//!
//! Analog, hybrid and full-digital data precoders with artificial-noise (AN)
//! precoders, Monte Carlo ergodic rates, closed-form SINR and secrecy bounds,
//! and a one-dimensional search for the data/AN power split.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod montecarlo;
pub mod numkernel;
pub mod optimizer;
pub mod precoder;

pub use channel::{generate_channels, validate_config, ChannelRealization, SystemConfig};
pub use error::{Error, Result};
pub use metrics::{closed_form_sinr, eve_capacity_bound, secrecy_rate_bound, RateReport};
pub use montecarlo::{run_ensemble, EnsembleResult, EnsembleSpec};
pub use numkernel::{CMatrix, RngStream};
pub use optimizer::{optimize_phi, PhiOptimum, PhiSearchSpec};
pub use precoder::{build_precoders, InsOptions, PrecoderSet, Scheme};
