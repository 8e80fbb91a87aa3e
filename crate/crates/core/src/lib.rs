//! Waterfall-threshold analysis of BPSK transmission schemes on quasi-static
//! Rayleigh fading channels.
//!
//! The crate measures (or evaluates analytically) the probability of successful
//! frame detection of a scheme in AWGN, condenses it into a single SNR value, the
//! waterfall threshold, and uses that value to approximate the average frame error
//! rate on a quasi-static fading channel as `1 - exp(-gamma_w / avg_snr)`.
//!
//! Module map:
//!
//! - [`numerics`]: Gaussian tail function and adaptive Gauss-Kronrod quadrature.
//! - [`channel`]: BPSK mapping, AWGN, fading-SNR sampling and density.
//! - [`codecs`]: uncoded BPSK, RSC encoder with Viterbi and log-MAP decoders, turbo code.
//! - [`montecarlo`]: reproducible FER measurement in AWGN and on the fading channel.
//! - [`threshold`]: waterfall threshold from detection curves or measured FER samples.
//! - [`fer_model`]: exact and approximate average FER, performance plots, SNR gaps.
//! - [`cli`]: configuration, subcommands and the validation table.

pub mod channel;
pub mod cli;
pub mod codecs;
pub mod error;
pub mod fer_model;
pub mod montecarlo;
pub mod numerics;
pub mod threshold;
pub mod validation;

pub use channel::Snr;
pub use error::{Error, Result};
