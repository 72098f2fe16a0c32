//! Backbone chains: N, CA, C atom coordinates and the frames they induce.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{Frame, MotorError};

/// Threshold below which backbone atom geometry counts as degenerate.
const DEGENERACY_EPS: f64 = 1e-8;

/// Backbone atoms of one residue, in angstroms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residue {
    pub n: Vector3<f64>,
    pub ca: Vector3<f64>,
    pub c: Vector3<f64>,
}

/// Idealized local atom positions used when rebuilding atoms from frames,
/// with CA at the origin and C along +x. Configurable; not a claim about
/// any particular force field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealGeometry {
    pub n: [f64; 3],
    pub ca: [f64; 3],
    pub c: [f64; 3],
}

impl Default for IdealGeometry {
    fn default() -> Self {
        IdealGeometry {
            n: [-0.572, 1.337, 0.0],
            ca: [0.0, 0.0, 0.0],
            c: [1.526, 0.0, 0.0],
        }
    }
}

/// An ordered single-chain backbone. Validated at construction: every
/// residue must have non-collinear N, CA, C so that a frame exists.
#[derive(Clone, Debug, PartialEq)]
pub struct BackboneChain {
    residues: Vec<Residue>,
}

impl BackboneChain {
    pub fn new(residues: Vec<Residue>) -> Result<Self, MotorError> {
        for (i, r) in residues.iter().enumerate() {
            residue_frame(r).map_err(|_| MotorError::DegenerateResidue { index: i })?;
        }
        Ok(BackboneChain { residues })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn residues(&self) -> &[Residue] {
        &self.residues
    }

    /// Frames of all residues; infallible because construction validated them.
    pub fn frames(&self) -> Vec<Frame> {
        self.residues
            .iter()
            .map(|r| residue_frame(r).expect("validated at construction"))
            .collect()
    }

    pub fn ca_positions(&self) -> Vec<Vector3<f64>> {
        self.residues.iter().map(|r| r.ca).collect()
    }
}

/// Gram-Schmidt frame of one residue: translation at CA, first axis along
/// `C - CA`, second axis the orthogonalized `N - CA`, third their cross
/// product. Columns of the rotation are the three axes.
fn residue_frame(r: &Residue) -> Result<Frame, MotorError> {
    let v1 = r.c - r.ca;
    let n1 = v1.norm();
    if n1 < DEGENERACY_EPS {
        return Err(MotorError::DegenerateResidue { index: 0 });
    }
    let u1 = v1 / n1;
    let v2 = r.n - r.ca;
    let v2_perp = v2 - u1 * v2.dot(&u1);
    let n2 = v2_perp.norm();
    if n2 < DEGENERACY_EPS {
        return Err(MotorError::DegenerateResidue { index: 0 });
    }
    let u2 = v2_perp / n2;
    let u3 = u1.cross(&u2);
    let rotation = nalgebra::Matrix3::from_columns(&[u1, u2, u3]);
    Ok(Frame {
        rotation,
        translation: r.ca,
    })
}

/// Frames of a whole chain; errors carry the offending residue index.
pub fn frames_from_backbone(residues: &[Residue]) -> Result<Vec<Frame>, MotorError> {
    residues
        .iter()
        .enumerate()
        .map(|(i, r)| residue_frame(r).map_err(|_| MotorError::DegenerateResidue { index: i }))
        .collect()
}

/// Place idealized residue atoms under each frame. CA lands exactly on the
/// frame translation.
pub fn backbone_from_frames(frames: &[Frame], geometry: &IdealGeometry) -> BackboneChain {
    let n_local = Vector3::from(geometry.n);
    let ca_local = Vector3::from(geometry.ca);
    let c_local = Vector3::from(geometry.c);
    let residues = frames
        .iter()
        .map(|f| Residue {
            n: f.act_point(&n_local),
            ca: f.act_point(&ca_local),
            c: f.act_point(&c_local),
        })
        .collect();
    BackboneChain { residues }
}
