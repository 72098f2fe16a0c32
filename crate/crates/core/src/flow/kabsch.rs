//! Optimal rigid superposition of point sets (rotation only, no
//! reflection) and the resulting RMSD.

use nalgebra::{Matrix3, Vector3};

use crate::motor::Frame;

use super::FlowError;

/// Least-squares rigid alignment of `a` onto `b`: returns the minimal RMSD
/// and the frame with `b ~ R a + t`. Uses the SVD of the cross-covariance
/// with a determinant correction to exclude reflections.
pub fn kabsch_rmsd(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> Result<(f64, Frame), FlowError> {
    if a.len() != b.len() {
        return Err(FlowError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 3 {
        return Err(FlowError::DegeneratePointSet { len: a.len() });
    }
    let n = a.len() as f64;
    let ca = a.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n;
    let cb = b.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n;

    let mut h = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        h += (p - ca) * (q - cb).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.ok_or(FlowError::DegeneratePointSet { len: a.len() })?;
    let v_t = svd.v_t.ok_or(FlowError::DegeneratePointSet { len: a.len() })?;
    let d = (v_t.transpose() * u.transpose()).determinant();
    let correction = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d.signum()));
    let rotation = v_t.transpose() * correction * u.transpose();
    let translation = cb - rotation * ca;

    let mut sum = 0.0;
    for (p, q) in a.iter().zip(b) {
        sum += (rotation * p + translation - q).norm_squared();
    }
    Ok((
        (sum / n).sqrt(),
        Frame {
            rotation,
            translation,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motor::so3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_points(n: usize, rng: &mut impl Rng) -> Vec<Vector3<f64>> {
        (0..n)
            .map(|_| {
                Vector3::new(
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                )
            })
            .collect()
    }

    #[test]
    fn identical_sets_have_zero_rmsd() {
        let mut rng = ChaCha20Rng::seed_from_u64(51);
        let a = random_points(10, &mut rng);
        let (rmsd, _) = kabsch_rmsd(&a, &a).unwrap();
        assert!(rmsd < 1e-12);
    }

    #[test]
    fn rigidly_moved_sets_align_exactly() {
        let mut rng = ChaCha20Rng::seed_from_u64(52);
        for _ in 0..50 {
            let a = random_points(8, &mut rng);
            let g = Frame {
                rotation: so3::exp(&Vector3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                )),
                translation: Vector3::new(
                    rng.gen_range(-4.0..4.0),
                    rng.gen_range(-4.0..4.0),
                    rng.gen_range(-4.0..4.0),
                ),
            };
            let b: Vec<_> = a.iter().map(|p| g.act_point(p)).collect();
            let (rmsd, align) = kabsch_rmsd(&a, &b).unwrap();
            assert!(rmsd < 1e-10);
            for (p, q) in a.iter().zip(&b) {
                assert!((align.act_point(p) - q).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn no_reflection_is_used() {
        let mut rng = ChaCha20Rng::seed_from_u64(53);
        let a = random_points(6, &mut rng);
        let b: Vec<_> = a.iter().map(|p| Vector3::new(-p.x, p.y, p.z)).collect();
        let (_, align) = kabsch_rmsd(&a, &b).unwrap();
        assert!(align.rotation.determinant() > 0.0);
    }

    #[test]
    fn collinear_stretch_matches_hand_optimum() {
        // segments of length 1 and 3, with midpoints, best alignment is the
        // shared axis: rmsd^2 = (1 + 1 + 0)/3
        let a = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.5, 0.0, 0.0),
        ];
        let b = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(3.0, 0.0, 0.0),
            Vector3::new(1.5, 0.0, 0.0),
        ];
        let (rmsd, _) = kabsch_rmsd(&a, &b).unwrap();
        assert!((rmsd - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    /// Exhaustive rotation-grid oracle: no sampled rotation beats the
    /// closed-form optimum.
    #[test]
    fn no_grid_rotation_beats_the_svd_solution() {
        let mut rng = ChaCha20Rng::seed_from_u64(54);
        let a = random_points(5, &mut rng);
        let b = random_points(5, &mut rng);
        let (best, _) = kabsch_rmsd(&a, &b).unwrap();

        let n = a.len() as f64;
        let ca = a.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n;
        let cb = b.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n;
        let steps = 14;
        for ix in 0..steps {
            for iy in 0..steps {
                for iz in 0..steps {
                    let w = Vector3::new(
                        (ix as f64 / steps as f64 - 0.5) * 2.0 * std::f64::consts::PI,
                        (iy as f64 / steps as f64 - 0.5) * 2.0 * std::f64::consts::PI,
                        (iz as f64 / steps as f64 - 0.5) * 2.0 * std::f64::consts::PI,
                    );
                    let r = so3::exp(&w);
                    let mut sum = 0.0;
                    for (p, q) in a.iter().zip(&b) {
                        sum += (r * (p - ca) - (q - cb)).norm_squared();
                    }
                    let rmsd = (sum / n).sqrt();
                    assert!(rmsd >= best - 1e-9);
                }
            }
        }
    }

    #[test]
    fn too_few_points_are_rejected() {
        let a = vec![Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0)];
        assert!(matches!(
            kabsch_rmsd(&a, &a),
            Err(FlowError::DegeneratePointSet { len: 2 })
        ));
    }
}
