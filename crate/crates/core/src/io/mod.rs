//! File formats: the PDB backbone subset, the weights container, and the
//! JSON run configuration.

mod config;
mod pdb;
mod weights_file;

pub use config::RunConfig;
pub use pdb::{parse_pdb_backbone, write_pdb_backbone};
pub use weights_file::{
    config_hash, load_weights, named_tensors, read_weights, save_weights, weights_to_json,
    write_weights, WeightsJson,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: malformed ATOM record ({reason})")]
    MalformedRecord { line: usize, reason: &'static str },
    #[error("residue {residue}: missing backbone atom {atom}")]
    MissingAtom { residue: i64, atom: &'static str },
    #[error("residue {residue}: duplicate atom {atom}")]
    DuplicateAtom { residue: i64, atom: String },
    #[error("multiple chains present; only single-chain files are supported")]
    MultipleChains,
    #[error("non-finite coordinate cannot be written")]
    NonFiniteCoordinate,
    #[error("coordinate {value} does not fit fixed-width PDB columns")]
    CoordinateOutOfRange { value: f64 },
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("invalid weights file: {reason}")]
    BadWeightsFile { reason: String },
    #[error("weights were saved for a different model configuration")]
    ConfigMismatch,
    #[error(transparent)]
    Backbone(#[from] crate::motor::MotorError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
