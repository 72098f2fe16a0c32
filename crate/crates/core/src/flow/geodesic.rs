//! Geodesic conditional flows on frames and their vector fields.
//!
//! Translations interpolate linearly; rotations follow the SO(3) geodesic
//! `r0 exp(t log(r0^T r1))`. Vector fields live in the body frame for
//! rotations (integrated as `r <- r exp(dt w)`) and in Cartesian space for
//! translations.

use nalgebra::Vector3;

use crate::motor::{so3, Frame};

use super::FlowError;

/// Guard band below t = 1 where the conditional field is singular.
pub const T_SINGULARITY: f64 = 1e-9;

/// Per-residue tangent sample: rotation part in radians per unit time,
/// translation part in length units per unit time.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldSample {
    pub rot: Vec<Vector3<f64>>,
    pub trans: Vec<Vector3<f64>>,
}

impl VectorFieldSample {
    pub fn len(&self) -> usize {
        self.rot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rot.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.rot
            .iter()
            .chain(self.trans.iter())
            .all(|v| v.x.is_finite() && v.y.is_finite() && v.z.is_finite())
    }

    pub fn zeros(n: usize) -> Self {
        VectorFieldSample {
            rot: vec![Vector3::zeros(); n],
            trans: vec![Vector3::zeros(); n],
        }
    }
}

fn check_lengths(a: usize, b: usize) -> Result<(), FlowError> {
    if a == b {
        Ok(())
    } else {
        Err(FlowError::LengthMismatch { left: a, right: b })
    }
}

/// Point on the geodesic from `t0` to `t1` at time `t` in [0, 1].
pub fn geodesic_interpolate(
    from: &[Frame],
    to: &[Frame],
    t: f64,
) -> Result<Vec<Frame>, FlowError> {
    check_lengths(from.len(), to.len())?;
    if !(0.0..=1.0).contains(&t) || !t.is_finite() {
        return Err(FlowError::InvalidTime { t });
    }
    let mut out = Vec::with_capacity(from.len());
    for (f0, f1) in from.iter().zip(to) {
        let omega = so3::log(&(f0.rotation.transpose() * f1.rotation))
            .map_err(FlowError::Motor)?;
        out.push(Frame {
            rotation: f0.rotation * so3::exp(&(omega * t)),
            translation: f0.translation * (1.0 - t) + f1.translation * t,
        });
    }
    Ok(out)
}

/// The conditional field pointing from the current frames toward the
/// targets: `(x1 - xt)/(1 - t)` for translations and
/// `log(rt^T r1)/(1 - t)` for rotations. Rejected near t = 1 where the
/// division blows up.
pub fn conditional_vector_field(
    current: &[Frame],
    target: &[Frame],
    t: f64,
) -> Result<VectorFieldSample, FlowError> {
    check_lengths(current.len(), target.len())?;
    if !t.is_finite() || t < 0.0 || t >= 1.0 - T_SINGULARITY {
        return Err(FlowError::InvalidTime { t });
    }
    let inv = 1.0 / (1.0 - t);
    let mut rot = Vec::with_capacity(current.len());
    let mut trans = Vec::with_capacity(current.len());
    for (ft, f1) in current.iter().zip(target) {
        let omega = so3::log(&(ft.rotation.transpose() * f1.rotation))
            .map_err(FlowError::Motor)?;
        rot.push(omega * inv);
        trans.push((f1.translation - ft.translation) * inv);
    }
    Ok(VectorFieldSample { rot, trans })
}

/// Mean squared difference over all residues and components, rotation and
/// translation parts pooled with equal weight.
pub fn fm_loss(
    predicted: &VectorFieldSample,
    target: &VectorFieldSample,
) -> Result<f64, FlowError> {
    check_lengths(predicted.len(), target.len())?;
    check_lengths(predicted.trans.len(), target.trans.len())?;
    let n = predicted.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (p, q) in predicted.rot.iter().zip(&target.rot) {
        sum += (p - q).norm_squared();
    }
    for (p, q) in predicted.trans.iter().zip(&target.trans) {
        sum += (p - q).norm_squared();
    }
    Ok(sum / (6.0 * n as f64))
}

/// `fm_loss` with separate weights on the rotation and translation parts.
pub fn fm_loss_weighted(
    predicted: &VectorFieldSample,
    target: &VectorFieldSample,
    rot_weight: f64,
    trans_weight: f64,
) -> Result<f64, FlowError> {
    check_lengths(predicted.len(), target.len())?;
    let n = predicted.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut rot = 0.0;
    for (p, q) in predicted.rot.iter().zip(&target.rot) {
        rot += (p - q).norm_squared();
    }
    let mut trans = 0.0;
    for (p, q) in predicted.trans.iter().zip(&target.trans) {
        trans += (p - q).norm_squared();
    }
    Ok((rot_weight * rot + trans_weight * trans) / (6.0 * n as f64))
}
