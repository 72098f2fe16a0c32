//! Rigid-body frames: rotation matrix plus translation.

use nalgebra::{Matrix3, Vector3};

use super::MotorError;

/// Tolerance for orthonormality and determinant checks.
pub const FRAME_TOLERANCE: f64 = 1e-9;

/// A rigid transform `p -> R p + x` with `R` in SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Frame {
    pub fn identity() -> Self {
        Frame {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, MotorError> {
        let f = Frame {
            rotation,
            translation,
        };
        f.validate()?;
        Ok(f)
    }

    /// Check `R^T R = I` and `det R = +1` within [`FRAME_TOLERANCE`].
    pub fn validate(&self) -> Result<(), MotorError> {
        self.validate_with(FRAME_TOLERANCE)
    }

    pub fn validate_with(&self, tol: f64) -> Result<(), MotorError> {
        let gram = self.rotation.transpose() * self.rotation;
        let dev = (gram - Matrix3::identity()).abs().max();
        if dev > tol {
            return Err(MotorError::NotARotation { deviation: dev });
        }
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > tol {
            return Err(MotorError::NotARotation {
                deviation: (det - 1.0).abs(),
            });
        }
        Ok(())
    }

    pub fn act_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Composition: `(self . other)(p) = self(other(p))`.
    pub fn compose(&self, other: &Frame) -> Frame {
        Frame {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Frame {
        let rt = self.rotation.transpose();
        Frame {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Project the rotation back onto SO(3); used to keep long integration
    /// chains from drifting off the manifold.
    pub fn orthonormalized(&self) -> Frame {
        let svd = self.rotation.svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let mut u2 = u;
            u2.set_column(2, &(-u.column(2)));
            r = u2 * v_t;
        }
        Frame {
            rotation: r,
            translation: self.translation,
        }
    }
}
