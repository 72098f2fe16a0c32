//! The inference-time prior on frames: standard normal translations
//! (zero-centered) and uniform SO(3) rotations.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::motor::Frame;

use super::FlowError;

/// Subtract the mean from a set of translations so that the sequentially
/// folded mean is exactly zero. After the bulk subtraction a roundoff
/// residue of order 1e-15 remains and is not representable as a per-element
/// correction, so the last element absorbs the exact negative of the
/// partial sum; the final accumulation then cancels bit-exactly.
pub fn center_translations(points: &mut [Vector3<f64>]) {
    let n = points.len();
    if n == 0 {
        return;
    }
    let mean = points.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n as f64;
    for p in points.iter_mut() {
        *p -= mean;
    }
    if n > 1 {
        let partial = points[..n - 1]
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p);
        points[n - 1] = -partial;
    } else {
        points[0] = Vector3::zeros();
    }
}

/// Uniform rotation from four standard normals via quaternion normalization.
fn uniform_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm2 = q.iter().map(|v| v * v).sum::<f64>();
        if norm2 < 1e-12 {
            continue;
        }
        let s = 1.0 / norm2.sqrt();
        let (w, x, y, z) = (q[0] * s, q[1] * s, q[2] * s, q[3] * s);
        return Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        );
    }
}

/// Draw `n_residues` frames: translations i.i.d. standard normal per
/// coordinate then centered, rotations i.i.d. uniform on SO(3).
/// Deterministic in the seed.
pub fn sample_prior(n_residues: usize, seed: u64) -> Result<Vec<Frame>, FlowError> {
    if n_residues == 0 {
        return Err(FlowError::EmptyChain);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut translations: Vec<Vector3<f64>> = (0..n_residues)
        .map(|_| {
            Vector3::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            )
        })
        .collect();
    center_translations(&mut translations);
    Ok(translations
        .into_iter()
        .map(|translation| Frame {
            rotation: uniform_rotation(&mut rng),
            translation,
        })
        .collect())
}
