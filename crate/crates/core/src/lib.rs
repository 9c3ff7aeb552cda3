//! Single-channel speech enhancement with a U-Net spiking neural network.
//!
//! The pipeline maps noisy log-power spectra (LPS) to clean LPS with a
//! network of leaky integrate-and-fire neurons evaluated one STFT frame per
//! timestep, trained end to end with surrogate-gradient backpropagation
//! through time. Enhanced audio is reconstructed from the estimated
//! magnitude and the noisy phase.

pub mod cli;
pub mod data;
pub mod dsp;
pub mod engine;
pub mod metrics;
pub mod model;
pub mod snn;
