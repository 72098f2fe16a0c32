//! Learnable layers on multivector channels. All of them commute with the
//! sandwich action of a unit motor applied to every input channel.

mod bilinear;
mod equi;
mod many_body;

pub use bilinear::GeometricBilinear;
pub use equi::EquiLinear;
pub use many_body::ManyBodyProduct;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayerError {
    #[error("channel count mismatch: layer expects {expected}, input has {got}")]
    ChannelMismatch { expected: usize, got: usize },
}
