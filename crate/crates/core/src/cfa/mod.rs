//! Clifford frame attention: the block (invariant scores, multivector value
//! messages, relative-frame features, many-body products), the frame
//! update, and the stacked denoising network.

mod attention;
mod config;
mod network;
mod weights;

pub use attention::{
    aggregate_relative_frames, attention_scores, backbone_update, cfa_forward,
    geometric_message_pass, CfaInputs, CfaOutputs,
};
pub use config::CfaConfig;
pub use network::network_forward;
pub use weights::{
    BlockWeights, CfaBlockWeights, NetworkWeights, ParameterCounts, DIST_RBF_DIM, EDGE_EMBED_IN,
    NODE_EMBED_IN, NODE_PE_DIM, RELPOS_DIM, SELF_COND_RBF_DIM, TIME_EMB_DIM,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfaError {
    #[error("non-finite value produced at stage `{stage}`")]
    NonFinite { stage: &'static str },
    #[error("shape mismatch in {what}")]
    ShapeMismatch { what: &'static str },
    #[error("flow time {t} outside [0, 1]")]
    InvalidTime { t: f64 },
    #[error("{n} residues given, at least {min} required")]
    TooFewResidues { n: usize, min: usize },
    #[error("input frame is not a valid rotation")]
    InvalidFrame,
    #[error(transparent)]
    Layer(#[from] crate::layers::LayerError),
}
