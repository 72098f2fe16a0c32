//! Exponential and logarithm maps on SO(3).

use nalgebra::{Matrix3, Vector3};

use super::MotorError;

fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Rodrigues formula: `exp([w]x) = I + sinc(t) [w]x + ((1-cos t)/t^2) [w]x^2`.
pub fn exp(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let theta = theta2.sqrt();
    let k = skew(omega);
    let (a, b) = if theta < 1e-5 {
        // series: sin(t)/t and (1-cos t)/t^2
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Matrix3::identity() + k * a + k * k * b
}

fn validate_rotation(r: &Matrix3<f64>) -> Result<(), MotorError> {
    let dev = (r.transpose() * r - Matrix3::identity()).abs().max();
    if dev > 1e-6 {
        return Err(MotorError::NotARotation { deviation: dev });
    }
    if r.determinant() < 0.0 {
        return Err(MotorError::NotARotation { deviation: 2.0 });
    }
    Ok(())
}

/// Principal logarithm of a rotation matrix, `|log(R)| <= pi`.
///
/// Near the angle-pi singularity the axis is recovered from the symmetric
/// part `(R + I)/2 = n n^T`, taking the column with the largest diagonal
/// entry and disambiguating the sign with the skew part when it is resolvable.
pub fn log(r: &Matrix3<f64>) -> Result<Vector3<f64>, MotorError> {
    validate_rotation(r)?;
    let cos_theta = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();

    if theta < 1e-7 {
        // first order: log(R) ~ vee(R - R^T)/2
        return Ok(vee(&(r - r.transpose())) * 0.5);
    }

    if theta < std::f64::consts::PI - 1e-6 {
        let factor = theta / (2.0 * theta.sin());
        return Ok(vee(&(r - r.transpose())) * factor);
    }

    // Stabilized branch near pi.
    let b = (r + Matrix3::identity()) * 0.5;
    let k = (0..3)
        .max_by(|&i, &j| b[(i, i)].partial_cmp(&b[(j, j)]).unwrap())
        .unwrap();
    let nk = b[(k, k)].max(0.0).sqrt();
    if nk == 0.0 {
        return Err(MotorError::NotARotation { deviation: 1.0 });
    }
    let mut axis = Vector3::zeros();
    axis[k] = nk;
    for i in 0..3 {
        if i != k {
            axis[i] = (b[(i, k)] + b[(k, i)]) * 0.5 / nk;
        }
    }
    axis.normalize_mut();

    // Align with the skew part where it still carries signal, otherwise pick
    // a canonical sign for the exact-pi double cover.
    let s = vee(&(r - r.transpose()));
    if s.norm() > 1e-12 {
        if s.dot(&axis) < 0.0 {
            axis = -axis;
        }
    } else {
        for i in 0..3 {
            if axis[i].abs() > 1e-12 {
                if axis[i] < 0.0 {
                    axis = -axis;
                }
                break;
            }
        }
    }
    // sin(theta) = |vee(R - R^T)|/2, cos(theta) < 0 in this branch
    let theta = std::f64::consts::PI - (s.norm() * 0.5).clamp(-1.0, 1.0).asin();
    Ok(axis * theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(exp(&Vector3::zeros()), Matrix3::identity());
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = exp(&Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((r - expected).abs().max() < 1e-12);
    }

    #[test]
    fn log_rejects_non_rotation() {
        let m = Matrix3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(log(&m).is_err());
    }

    #[test]
    fn near_pi_round_trip() {
        let axis = Vector3::new(1.0, -2.0, 0.5).normalize();
        for &theta in &[
            std::f64::consts::PI - 1e-3,
            std::f64::consts::PI - 1e-7,
            std::f64::consts::PI,
        ] {
            let r = exp(&(axis * theta));
            let w = log(&r).unwrap();
            assert!(w.norm() <= std::f64::consts::PI + 1e-12);
            let dev = (exp(&w) - r).abs().max();
            assert!(dev < 1e-7, "theta {theta}: deviation {dev}");
        }
    }
}
