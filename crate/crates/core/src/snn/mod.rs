//! Leaky integrate-and-fire dynamics, the ArcTan surrogate, and the spiking
//! layer primitives (encoder, decoder, readout) evaluated one STFT frame per
//! timestep.
//!
//! Recurrent synaptic weights are not modeled: the architecture is a
//! feedforward convolutional U-Net, and recurrence in time comes only from
//! the per-neuron `(I, U)` state.

mod layers;
mod lif;
mod stats;
pub mod surrogate;

pub use layers::{
    decoder_layer_forward, encoder_layer_forward, readout_forward, ReadoutLayer, SpikingConvLayer,
};
pub use lif::{lif_step, LifParams, LifState};
pub use stats::{spike_stats, LayerActivity, LayerStats, SpikeRecord, SpikeStats};
pub use surrogate::{arctan_sigma, arctan_surrogate_grad, SurrogateConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SnnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite drive at index {0}")]
    NonFiniteDrive(usize),
    #[error("spike record integrity: non-binary value {value} in layer `{layer}`")]
    NonBinary { layer: String, value: f64 },
}
