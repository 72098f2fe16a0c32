//! Projective geometric algebra Cl(3,0,1): dense multivectors, products,
//! duals, embeddings of Cartesian geometry, and metric relations.

pub mod blade;
pub mod embed;
pub mod metric;
mod multivector;

pub use embed::{embed_plane, embed_point, extract_point};
pub use multivector::{basis_blades, max_abs_diff, Multivector, UNIT_TOLERANCE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PgaError {
    #[error("input has a nonzero {blade} component; expected a pure grade-1 element")]
    NotAVector { blade: &'static str },
    #[error("versor norm {norm} is not 1 within tolerance")]
    NotUnitVersor { norm: f64 },
    #[error("ideal point (zero e123 coefficient) has no Cartesian position")]
    IdealPoint,
    #[error("{what} norm {norm} is not 1 within tolerance")]
    NotNormalized { what: &'static str, norm: f64 },
}
