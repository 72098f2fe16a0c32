//! Metric relations between normalized planes, lines, and points.
//!
//! All inputs must be normalized: unit norm for planes and lines, unit e123
//! coefficient magnitude for points. Distances come out in the units of the
//! embedded coordinates, angles in radians.

use super::multivector::UNIT_TOLERANCE;
use super::{Multivector, PgaError};

fn check_unit(x: &Multivector, what: &'static str) -> Result<(), PgaError> {
    let n = x.norm();
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(PgaError::NotNormalized { what, norm: n });
    }
    Ok(())
}

/// Distance between two normalized points: `norm(p1 v p2)`.
pub fn dist_point_point(p1: &Multivector, p2: &Multivector) -> Result<f64, PgaError> {
    check_unit(p1, "point")?;
    check_unit(p2, "point")?;
    Ok(p1.join(p2).norm())
}

/// Distance between a normalized point and a normalized line: `norm(p v l)`.
pub fn dist_point_line(p: &Multivector, l: &Multivector) -> Result<f64, PgaError> {
    check_unit(p, "point")?;
    check_unit(l, "line")?;
    Ok(p.join(l).norm())
}

/// Distance between a normalized point and a normalized plane:
/// `infinity_norm(p ^ plane)`.
pub fn dist_point_plane(p: &Multivector, plane: &Multivector) -> Result<f64, PgaError> {
    check_unit(p, "point")?;
    check_unit(plane, "plane")?;
    Ok(p.outer_product(plane).infinity_norm())
}

/// Acute angle between two normalized planes: `asin(norm(p1 ^ p2))`.
pub fn angle_plane_plane(p1: &Multivector, p2: &Multivector) -> Result<f64, PgaError> {
    check_unit(p1, "plane")?;
    check_unit(p2, "plane")?;
    Ok(p1.outer_product(p2).norm().clamp(0.0, 1.0).asin())
}

/// Angle between a normalized plane and a normalized line:
/// `asin(norm(<p l>_3))`.
pub fn angle_plane_line(p: &Multivector, l: &Multivector) -> Result<f64, PgaError> {
    check_unit(p, "plane")?;
    check_unit(l, "line")?;
    Ok(p.geometric_product(l)
        .grade_project(3)
        .norm()
        .clamp(0.0, 1.0)
        .asin())
}
