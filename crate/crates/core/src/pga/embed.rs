//! Embeddings of Cartesian points and planes into Cl(3,0,1).
//!
//! Convention: a plane with unit normal `n` and offset `d` is the grade-1
//! element `n + d e0` and contains the Cartesian points with `n.x + d = 0`.
//! A point `(x, y, z)` is the grade-3 element
//! `e123 - x e023 + y e013 - z e012`, the intersection of its three
//! coordinate planes. The orientation signs are validated against Cartesian
//! closed forms by the metric-relation tests rather than assumed canonical.

use super::blade::idx;
use super::{Multivector, PgaError};

/// Embed a Cartesian point as a normalized grade-3 element.
pub fn embed_point(x: f64, y: f64, z: f64) -> Multivector {
    let mut mv = Multivector::ZERO;
    mv[idx::E123] = 1.0;
    mv[idx::E023] = -x;
    mv[idx::E013] = y;
    mv[idx::E012] = -z;
    mv
}

/// Embed a plane with normal `(nx, ny, nz)` and offset `d` as a grade-1
/// element `n + d e0`. The plane contains points with `n.p + d = 0`; callers
/// pass a unit normal when a normalized plane is required.
pub fn embed_plane(nx: f64, ny: f64, nz: f64, d: f64) -> Multivector {
    Multivector::vector(d, nx, ny, nz)
}

/// Recover Cartesian coordinates from a grade-3 point. Ideal points (zero
/// e123 coefficient) have no finite position and are rejected.
pub fn extract_point(p: &Multivector) -> Result<(f64, f64, f64), PgaError> {
    let w = p[idx::E123];
    if w == 0.0 {
        return Err(PgaError::IdealPoint);
    }
    Ok((-p[idx::E023] / w, p[idx::E013] / w, -p[idx::E012] / w))
}
