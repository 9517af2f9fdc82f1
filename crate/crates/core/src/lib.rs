//! Capacity bounds for the discrete-time Laguerre photon-counting channel.
//!
//! The crate covers the channel law itself ([`channel`]), closed-form lower
//! and asymptotic upper bounds for the independent-noise regime
//! ([`bounds`]), the coherent optical CDMA reduction with its own lower
//! bounds ([`cdma`]), and a set of independent numerical oracles
//! ([`verify`]) that the closed forms are checked against. [`sweep`] and
//! [`suite`] back the command-line tool.
//!
//! Everything is computed in nats.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cdma;
pub mod channel;
pub mod error;
pub mod optimize;
pub mod quad;
pub mod special;
pub mod suite;
pub mod sweep;
pub mod verify;

pub use bounds::{
    entropy_ub, lower_bound, output_entropy_lb, solve_mu, upper_bound, BoundResult, InputLaw, MaxentDensity,
    MaxentRegime, MuRule, PowerConstraints, Regime,
};
pub use cdma::{
    alpha_star, cdma_lower_bound, decoder_intensity, effective_params, optimal_users, sum_capacity, CdmaBound,
    CdmaConfig, NoiseTracking, SumCapacityPoint,
};
pub use channel::{cdma_pmf_row, log_pmf, moments, pmf_row, sample, ChannelParams, Pgf, PmfRow};
pub use error::{Error, Result};
