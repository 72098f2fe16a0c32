//! Motors, rigid frames, SO(3) maps, and backbone atom geometry.

mod backbone;
mod frame;
mod motor_type;
pub mod so3;

pub use backbone::{backbone_from_frames, frames_from_backbone, BackboneChain, IdealGeometry, Residue};
pub use frame::{Frame, FRAME_TOLERANCE};
pub use motor_type::{Motor, SandwichMatrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotorError {
    #[error("matrix is not a rotation (deviation {deviation:.3e})")]
    NotARotation { deviation: f64 },
    #[error("multivector has odd-grade components; motors are even")]
    OddGrade,
    #[error("motor norm {norm} is not 1 within tolerance")]
    NotUnit { norm: f64 },
    #[error("residue {index}: backbone atoms are collinear or coincident")]
    DegenerateResidue { index: usize },
}
