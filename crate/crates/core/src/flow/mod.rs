//! Flow matching on frame collections: priors, geodesic conditional flows,
//! Euler sampling, rigid superposition, and minibatch optimal transport.

mod geodesic;
mod integrate;
mod kabsch;
mod ot;
mod prior;

pub use geodesic::{
    conditional_vector_field, fm_loss, fm_loss_weighted, geodesic_interpolate, VectorFieldSample,
    T_SINGULARITY,
};
pub use integrate::integrate_flow;
pub use kabsch::kabsch_rmsd;
pub use ot::{hungarian, minibatch_ot, pair_cost, OtPlan};
pub use prior::{center_translations, sample_prior};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("flow time {t} is outside the valid range")]
    InvalidTime { t: f64 },
    #[error("at least one residue required")]
    EmptyChain,
    #[error("step count must be at least 1")]
    InvalidStepCount,
    #[error("vector field returned non-finite values at t = {t}")]
    NonFiniteField { t: f64 },
    #[error("point set with {len} points is degenerate")]
    DegeneratePointSet { len: usize },
    #[error(transparent)]
    Motor(#[from] crate::motor::MotorError),
}
