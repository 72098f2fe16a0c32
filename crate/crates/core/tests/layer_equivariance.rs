//! Sandwich-equivariance trials for the multivector layers: applying a
//! random unit motor to every input channel must commute with the layer.

use pgaflow::layers::{EquiLinear, GeometricBilinear, ManyBodyProduct};
use pgaflow::motor::{so3, Frame, Motor};
use pgaflow::pga::{max_abs_diff, Multivector};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const TRIALS: usize = 100;
const TOL: f64 = 1e-8;

fn random_motor(rng: &mut impl Rng) -> Motor {
    let axis = loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm() > 1e-3 {
            break v.normalize();
        }
    };
    let frame = Frame {
        rotation: so3::exp(&(axis * rng.gen_range(0.0..3.0))),
        translation: Vector3::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        ),
    };
    Motor::from_frame(&frame).unwrap()
}

fn random_channels(n: usize, rng: &mut impl Rng) -> Vec<Multivector> {
    (0..n)
        .map(|_| {
            let mut mv = Multivector::ZERO;
            for i in 0..16 {
                mv[i] = rng.gen_range(-1.0..1.0);
            }
            mv
        })
        .collect()
}

fn transform(channels: &[Multivector], m: &Motor) -> Vec<Multivector> {
    channels.iter().map(|mv| m.act(mv)).collect()
}

fn assert_equal(a: &[Multivector], b: &[Multivector], tol: f64, what: &str) {
    for (x, y) in a.iter().zip(b) {
        let d = max_abs_diff(x, y);
        assert!(d < tol, "{what}: deviation {d}");
    }
}

#[test]
fn equi_linear_commutes_with_motors() {
    let mut rng = ChaCha20Rng::seed_from_u64(401);
    for _ in 0..TRIALS {
        let layer = EquiLinear::new(4, 3, &mut rng);
        let x = random_channels(4, &mut rng);
        let m = random_motor(&mut rng);
        let moved_then_layer = layer.forward(&transform(&x, &m)).unwrap();
        let layer_then_moved = transform(&layer.forward(&x).unwrap(), &m);
        assert_equal(&moved_then_layer, &layer_then_moved, TOL, "equi_linear");
    }
}

#[test]
fn geometric_bilinear_commutes_with_joint_motors() {
    let mut rng = ChaCha20Rng::seed_from_u64(402);
    for _ in 0..TRIALS {
        let layer = GeometricBilinear::new(3, 3, 4, 3, &mut rng);
        let a = random_channels(3, &mut rng);
        let b = random_channels(3, &mut rng);
        let m = random_motor(&mut rng);
        let moved = layer
            .forward(&transform(&a, &m), &transform(&b, &m))
            .unwrap();
        let unmoved = transform(&layer.forward(&a, &b).unwrap(), &m);
        assert_equal(&moved, &unmoved, TOL, "geometric_bilinear");
    }
}

#[test]
fn many_body_product_commutes_with_motors() {
    let mut rng = ChaCha20Rng::seed_from_u64(403);
    for _ in 0..TRIALS {
        let layer = ManyBodyProduct::new(3, &mut rng);
        let a = random_channels(3, &mut rng);
        let m = random_motor(&mut rng);
        let moved = layer.forward(&transform(&a, &m)).unwrap();
        let unmoved = transform(&layer.forward(&a).unwrap(), &m);
        assert_equal(&moved, &unmoved, TOL, "many_body_product");
    }
}

/// The three-body identity behind the many-body layer: a product of
/// aggregated messages equals the explicit double sum over pairs, for both
/// bilinear products.
#[test]
fn product_of_sums_equals_double_sum() {
    let mut rng = ChaCha20Rng::seed_from_u64(404);
    let n = 3;
    let xs = random_channels(n, &mut rng);
    let ys = random_channels(n, &mut rng);
    let sum_x = xs.iter().fold(Multivector::ZERO, |acc, m| acc + *m);
    let sum_y = ys.iter().fold(Multivector::ZERO, |acc, m| acc + *m);

    let mut geo_pairs = Multivector::ZERO;
    let mut join_pairs = Multivector::ZERO;
    for x in &xs {
        for y in &ys {
            geo_pairs += x.geometric_product(y);
            join_pairs += x.join(y);
        }
    }
    assert!(max_abs_diff(&sum_x.geometric_product(&sum_y), &geo_pairs) < 1e-12);
    assert!(max_abs_diff(&sum_x.join(&sum_y), &join_pairs) < 1e-12);
}
