//! Motors: unit even-grade multivectors acting as rigid transforms.

use nalgebra::{Matrix3, Vector3};

use crate::pga::blade::{idx, BLADE_COUNT, GRADE};
use crate::pga::{embed_point, extract_point, Multivector, UNIT_TOLERANCE};

use super::{Frame, MotorError};

/// A unit multivector of even grade (0, 2, 4). Applied by the sandwich
/// product `M X ~M`; represents the same rigid transform as a [`Frame`],
/// up to the overall Pin-group sign.
///
/// Rotor convention: `embed_rotor(b, c, d)` matches the Hamilton quaternion
/// `(1, b, c, d)/sqrt(1 + b^2 + c^2 + d^2)` acting as an active rotation, so
/// the bivector coefficients are `(-b, +c, -d)` on `(e23, e13, e12)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Motor {
    mv: Multivector,
}

impl Motor {
    pub fn identity() -> Self {
        Motor {
            mv: Multivector::scalar(1.0),
        }
    }

    /// Wrap a multivector, checking the even-grade and unit-norm invariants.
    pub fn try_from_multivector(mv: Multivector) -> Result<Self, MotorError> {
        for i in 0..BLADE_COUNT {
            if GRADE[i] % 2 == 1 && mv[i] != 0.0 {
                return Err(MotorError::OddGrade);
            }
        }
        let n = mv.norm();
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(MotorError::NotUnit { norm: n });
        }
        Ok(Motor { mv })
    }

    pub fn as_multivector(&self) -> &Multivector {
        &self.mv
    }

    /// Rotor about the origin from unnormalized quaternion imaginary parts:
    /// scalar part `1/sqrt(1 + b^2 + c^2 + d^2)`, bivector parts scaled alike.
    pub fn embed_rotor(b: f64, c: f64, d: f64) -> Self {
        let s = 1.0 / (1.0 + b * b + c * c + d * d).sqrt();
        let mut mv = Multivector::ZERO;
        mv[idx::SCALAR] = s;
        mv[idx::E23] = -b * s;
        mv[idx::E13] = c * s;
        mv[idx::E12] = -d * s;
        Motor { mv }
    }

    /// Translator moving every point by `t`.
    pub fn embed_translator(t: &Vector3<f64>) -> Self {
        let mut mv = Multivector::ZERO;
        mv[idx::SCALAR] = 1.0;
        mv[idx::E01] = -0.5 * t.x;
        mv[idx::E02] = -0.5 * t.y;
        mv[idx::E03] = -0.5 * t.z;
        Motor { mv }
    }

    /// Motor of a frame, factored translator * rotor so that points map as
    /// `p -> R p + x`.
    pub fn from_frame(frame: &Frame) -> Result<Self, MotorError> {
        frame.validate()?;
        let q = quaternion_from_matrix(&frame.rotation);
        let mut rotor = Multivector::ZERO;
        rotor[idx::SCALAR] = q[0];
        rotor[idx::E23] = -q[1];
        rotor[idx::E13] = q[2];
        rotor[idx::E12] = -q[3];
        let translator = Motor::embed_translator(&frame.translation).mv;
        let mut mv = translator.geometric_product(&rotor);
        // products of unit motors are unit up to roundoff
        let n = mv.norm();
        mv = mv.scale(1.0 / n);
        Ok(Motor { mv })
    }

    /// Frame of a motor. The rotor part sits in the Euclidean even
    /// coefficients; the translation is recovered from the action on the
    /// origin.
    pub fn to_frame(&self) -> Frame {
        let q = [
            self.mv[idx::SCALAR],
            -self.mv[idx::E23],
            self.mv[idx::E13],
            -self.mv[idx::E12],
        ];
        let rotation = matrix_from_quaternion(&q);
        let origin = embed_point(0.0, 0.0, 0.0);
        let moved = self.act(&origin);
        let (x, y, z) = extract_point(&moved).expect("motor action keeps points finite");
        Frame {
            rotation,
            translation: Vector3::new(x, y, z),
        }
    }

    /// Geometric product of motors; actions compose right-to-left.
    pub fn compose(&self, rhs: &Motor) -> Motor {
        let mut mv = self.mv.geometric_product(&rhs.mv);
        let n = mv.norm();
        mv = mv.scale(1.0 / n);
        Motor { mv }
    }

    /// For unit motors the inverse is the reverse.
    pub fn inverse(&self) -> Motor {
        Motor {
            mv: self.mv.reverse(),
        }
    }

    /// `a^-1 b`: the transform of `b` expressed relative to `a`.
    pub fn relative(a: &Motor, b: &Motor) -> Motor {
        a.inverse().compose(b)
    }

    /// Sandwich action on an arbitrary multivector.
    pub fn act(&self, x: &Multivector) -> Multivector {
        Multivector::sandwich_unchecked(&self.mv, x, false)
    }

    /// The sandwich action as an explicit 16x16 matrix, for applying one
    /// motor to many multivectors. `matrix.apply(x) == motor.act(x)` up to
    /// roundoff.
    pub fn sandwich_matrix(&self) -> SandwichMatrix {
        let mut rows = [[0.0f64; 16]; 16];
        for b in 0..16 {
            let col = self.act(&Multivector::basis(b));
            for (i, row) in rows.iter_mut().enumerate() {
                row[b] = col[i];
            }
        }
        SandwichMatrix { rows }
    }

    /// Action on a Cartesian point via the grade-3 embedding.
    pub fn act_cartesian(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let moved = self.act(&embed_point(p.x, p.y, p.z));
        let (x, y, z) = extract_point(&moved).expect("rigid action keeps points finite");
        Vector3::new(x, y, z)
    }

    pub fn negated(&self) -> Motor {
        Motor { mv: -self.mv }
    }
}

/// Dense matrix form of a motor's sandwich action on coefficient vectors.
#[derive(Clone, Debug)]
pub struct SandwichMatrix {
    rows: [[f64; 16]; 16],
}

impl SandwichMatrix {
    pub fn apply(&self, x: &Multivector) -> Multivector {
        let xc = x.coeffs();
        let mut out = [0.0f64; 16];
        for (slot, row) in out.iter_mut().zip(&self.rows) {
            // four partial sums so the 16-lane reduction vectorizes
            let mut acc = [0.0f64; 4];
            for c in 0..4 {
                for l in 0..4 {
                    acc[l] += row[c * 4 + l] * xc[c * 4 + l];
                }
            }
            *slot = acc[0] + acc[1] + acc[2] + acc[3];
        }
        Multivector::new(out)
    }
}

/// Row-major rotation matrix of a unit Hamilton quaternion `(w, x, y, z)`.
fn matrix_from_quaternion(q: &[f64; 4]) -> Matrix3<f64> {
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Shepperd's method: pick the numerically largest pivot.
fn quaternion_from_matrix(r: &Matrix3<f64>) -> [f64; 4] {
    let trace = r.trace();
    let mut q = [0.0f64; 4];
    if trace > 0.0 {
        let s = (trace + 1.0).sqrt() * 2.0;
        q[0] = 0.25 * s;
        q[1] = (r[(2, 1)] - r[(1, 2)]) / s;
        q[2] = (r[(0, 2)] - r[(2, 0)]) / s;
        q[3] = (r[(1, 0)] - r[(0, 1)]) / s;
    } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
        let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
        q[0] = (r[(2, 1)] - r[(1, 2)]) / s;
        q[1] = 0.25 * s;
        q[2] = (r[(0, 1)] + r[(1, 0)]) / s;
        q[3] = (r[(0, 2)] + r[(2, 0)]) / s;
    } else if r[(1, 1)] > r[(2, 2)] {
        let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
        q[0] = (r[(0, 2)] - r[(2, 0)]) / s;
        q[1] = (r[(0, 1)] + r[(1, 0)]) / s;
        q[2] = 0.25 * s;
        q[3] = (r[(1, 2)] + r[(2, 1)]) / s;
    } else {
        let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
        q[0] = (r[(1, 0)] - r[(0, 1)]) / s;
        q[1] = (r[(0, 2)] + r[(2, 0)]) / s;
        q[2] = (r[(1, 2)] + r[(2, 1)]) / s;
        q[3] = 0.25 * s;
    }
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    for v in &mut q {
        *v /= n;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motor::so3;

    #[test]
    fn identity_motor_fixes_points() {
        let m = Motor::identity();
        let p = Vector3::new(1.0, -2.0, 3.0);
        assert_eq!(m.act_cartesian(&p), p);
    }

    #[test]
    fn rotor_of_zero_is_identity() {
        assert_eq!(Motor::embed_rotor(0.0, 0.0, 0.0), Motor::identity());
    }

    #[test]
    fn rotor_matches_quaternion_action() {
        // (1,1,0,0)/sqrt(2) is a quarter turn about +x: (0,1,0) -> (0,0,1)
        let m = Motor::embed_rotor(1.0, 0.0, 0.0);
        let moved = m.act_cartesian(&Vector3::new(0.0, 1.0, 0.0));
        assert!((moved - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((m.as_multivector().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn translator_moves_points_exactly() {
        let m = Motor::embed_translator(&Vector3::new(0.0, 0.0, 2.0));
        let moved = m.act_cartesian(&Vector3::new(1.0, 1.0, 1.0));
        assert_eq!(moved, Vector3::new(1.0, 1.0, 3.0));
        assert_eq!(
            Motor::embed_translator(&Vector3::zeros()),
            Motor::identity()
        );
    }

    #[test]
    fn translators_compose_additively() {
        let u = Vector3::new(0.5, -1.0, 2.0);
        let v = Vector3::new(-0.25, 3.0, 1.0);
        let ab = Motor::embed_translator(&u).compose(&Motor::embed_translator(&v));
        let p = Vector3::new(0.1, 0.2, 0.3);
        assert!((ab.act_cartesian(&p) - (p + u + v)).norm() < 1e-12);
    }

    #[test]
    fn frame_round_trip_and_action() {
        let frame = Frame {
            rotation: so3::exp(&Vector3::new(0.4, -1.2, 2.0)),
            translation: Vector3::new(3.0, -1.0, 0.5),
        };
        let m = Motor::from_frame(&frame).unwrap();
        let back = m.to_frame();
        assert!((back.rotation - frame.rotation).abs().max() < 1e-9);
        assert!((back.translation - frame.translation).norm() < 1e-9);

        let p = Vector3::new(-0.7, 0.3, 1.9);
        assert!((m.act_cartesian(&p) - frame.act_point(&p)).norm() < 1e-10);
    }

    #[test]
    fn pure_rotation_motor_turns_x_to_y() {
        let frame = Frame {
            rotation: so3::exp(&Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2)),
            translation: Vector3::zeros(),
        };
        let m = Motor::from_frame(&frame).unwrap();
        let moved = m.act_cartesian(&Vector3::new(1.0, 0.0, 0.0));
        assert!((moved - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn relative_of_motor_with_itself_is_identity() {
        let m = Motor::from_frame(&Frame {
            rotation: so3::exp(&Vector3::new(0.1, 0.2, 0.3)),
            translation: Vector3::new(1.0, 1.0, 1.0),
        })
        .unwrap();
        let rel = Motor::relative(&m, &m);
        assert!((rel.as_multivector().scalar_part() - 1.0).abs() < 1e-12);
        let p = Vector3::new(0.4, 0.5, 0.6);
        assert!((rel.act_cartesian(&p) - p).norm() < 1e-12);
        let round = m.compose(&m.inverse());
        assert!((round.act_cartesian(&p) - p).norm() < 1e-12);
    }

    #[test]
    fn double_cover_sign_is_invisible_to_the_action() {
        let m = Motor::embed_rotor(0.3, -0.4, 0.9);
        let x = crate::pga::embed_point(1.0, 2.0, 3.0);
        assert_eq!(m.act(&x), m.negated().act(&x));
    }

    #[test]
    fn rejects_non_unit_and_odd_inputs() {
        let mut odd = Multivector::scalar(1.0);
        odd[idx::E1] = 0.5;
        assert!(matches!(
            Motor::try_from_multivector(odd),
            Err(MotorError::OddGrade)
        ));
        let scaled = Multivector::scalar(2.0);
        assert!(matches!(
            Motor::try_from_multivector(scaled),
            Err(MotorError::NotUnit { .. })
        ));
    }
}
