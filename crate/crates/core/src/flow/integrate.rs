//! Euler integration of a vector field on frame collections.

use crate::motor::Frame;
use crate::motor::so3;
use nalgebra::Matrix3;

use super::{FlowError, VectorFieldSample};

/// Allowed orthonormality drift before a rotation is projected back.
const DRIFT_TOLERANCE: f64 = 1e-9;

/// Integrate `d/dt x = field(x, t)` from t = 0 to 1 in `n_steps` Euler
/// steps: `x <- x + dt v_trans`, `r <- r exp(dt v_rot)`. Rotations are
/// re-orthonormalized whenever drift exceeds 1e-9.
pub fn integrate_flow<F>(
    initial: &[Frame],
    mut field: F,
    n_steps: usize,
) -> Result<Vec<Frame>, FlowError>
where
    F: FnMut(&[Frame], f64) -> Result<VectorFieldSample, FlowError>,
{
    if n_steps == 0 {
        return Err(FlowError::InvalidStepCount);
    }
    let mut frames = initial.to_vec();
    let dt = 1.0 / n_steps as f64;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let v = field(&frames, t)?;
        if v.len() != frames.len() || v.trans.len() != frames.len() {
            return Err(FlowError::LengthMismatch {
                left: frames.len(),
                right: v.len(),
            });
        }
        if !v.is_finite() {
            return Err(FlowError::NonFiniteField { t });
        }
        for (i, frame) in frames.iter_mut().enumerate() {
            frame.translation += v.trans[i] * dt;
            frame.rotation *= so3::exp(&(v.rot[i] * dt));
            if orthonormality_drift(&frame.rotation) > DRIFT_TOLERANCE {
                *frame = frame.orthonormalized();
            }
        }
    }
    Ok(frames)
}

fn orthonormality_drift(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).abs().max()
}
