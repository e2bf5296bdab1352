//! Link-level simulation of polar coded modulation over the real AWGN channel.
//!
//! A `2^{2m}`-QAM symbol is treated as two independent `2^m`-PAM symbols, so
//! everything here works on PAM amplitudes. The crate provides:
//!
//! - [`constellation`]: PAM point sets with Gray, set-partition and hybrid labelings.
//! - [`polar`]: encoding, successive-cancellation decoding and genie-aided
//!   Monte Carlo construction.
//! - [`demod`]: exact per-level LLRs for the parallel, sequential, hybrid and
//!   kernel-transformed binary partitions, plus mutual-information estimators.
//! - [`schemes`]: transmitters and receivers for plain BI-PCM, compound BI-PCM,
//!   ML-PCM and Hybrid-PCM.
//! - [`sim`]: deterministic parallel BLER/BER estimation and SNR sweeps.
//! - [`presets`]: the 64-QAM and 256-QAM comparison setups.

pub mod constellation;
pub mod demod;
mod error;
pub mod polar;
pub mod presets;
pub mod profile;
pub mod schemes;
pub mod seeding;
pub mod sim;

pub use error::{Error, Result};
