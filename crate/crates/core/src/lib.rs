//! Two-microphone in-car speech pick-up.
//!
//! The crate simulates a rectangular cabin with cardioid microphones, renders
//! driver/passenger speech plus spatially uncorrelated noise, and extracts
//! each talker with an adaptive frequency-domain multichannel Wiener filter
//! before the extracted signals are mixed. Metrics quantify the SNR/SIR
//! change and the comb-filter notches of the mixed output.

pub mod activity;
pub mod error;
pub mod metrics;
pub mod mwf;
pub mod noise;
pub mod room;
pub mod signal;

pub use error::{Error, Result};
pub use signal::MultichannelSignal;
