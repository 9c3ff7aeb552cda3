//! Tensors, reverse-mode differentiation through the time-unrolled network,
//! the log-spectral-distance loss, and the Adam optimizer.
//!
//! Forward kernels in [`kernels`] are shared between the recording graph
//! (training) and the stateful inference path in [`crate::snn`], so both
//! paths produce bit-identical values.

pub mod adam;
pub mod graph;
pub mod kernels;
pub mod loss;
pub mod tensor;

pub use adam::{adam_step, clamp_neuron_params, AdamConfig, AdamState, ParamKind};
pub use graph::{Gradients, Graph, GraphOptions, NodeId, SpikeMode};
pub use loss::{lsd_loss_value, LSD_EPS_SQRT};
pub use tensor::{Scalar, Tensor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite gradient in `{param}` at step {step}")]
    NonFiniteGradient { param: String, step: u64 },
    #[error("tape integrity error: {0}")]
    Tape(String),
}
