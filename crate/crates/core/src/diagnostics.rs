//! Self-contained invariant checks over the algebra and the equivariant
//! layers, runnable from the CLI as a pass/fail table.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::layers::{EquiLinear, GeometricBilinear, ManyBodyProduct};
use crate::motor::{so3, Frame, Motor};
use crate::pga::blade::{idx, BLADE_COUNT, GEOMETRIC, GRADE};
use crate::pga::{embed_plane, embed_point, max_abs_diff, metric, Multivector};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_mv(rng: &mut impl Rng) -> Multivector {
    let mut mv = Multivector::ZERO;
    for i in 0..BLADE_COUNT {
        mv[i] = rng.gen_range(-1.0..1.0);
    }
    mv
}

fn random_channels(n: usize, rng: &mut impl Rng) -> Vec<Multivector> {
    (0..n).map(|_| random_mv(rng)).collect()
}

fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

fn random_motor(rng: &mut impl Rng) -> Motor {
    let frame = Frame {
        rotation: so3::exp(&(random_unit(rng) * rng.gen_range(0.0..3.0))),
        translation: Vector3::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        ),
    };
    Motor::from_frame(&frame).expect("random frame is valid")
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        detail: format!("worst deviation {worst:.3e} (tolerance {tol:.0e})"),
    }
}

fn metric_rule() -> CheckResult {
    let mut ok = true;
    for i in [idx::E1, idx::E2, idx::E3] {
        let e = GEOMETRIC[i][i];
        ok &= e.target == idx::SCALAR && e.sign == 1;
    }
    ok &= GEOMETRIC[idx::E0][idx::E0].sign == 0;
    let ab = GEOMETRIC[idx::E1][idx::E2];
    let ba = GEOMETRIC[idx::E2][idx::E1];
    ok &= ab.target == idx::E12 && ab.sign == 1 && ba.sign == -1;
    CheckResult {
        name: "cayley metric rule",
        passed: ok,
        detail: "basis squares and anticommutation".into(),
    }
}

fn associativity(rng: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b, c) = (random_mv(rng), random_mv(rng), random_mv(rng));
        let left = a.geometric_product(&b).geometric_product(&c);
        let right = a.geometric_product(&b.geometric_product(&c));
        worst = worst.max(max_abs_diff(&left, &right));
    }
    check("associativity (1000 dense triples)", worst, 1e-12)
}

fn distributivity(rng: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b, c) = (random_mv(rng), random_mv(rng), random_mv(rng));
        let left = a.geometric_product(&(b + c));
        let right = a.geometric_product(&b) + a.geometric_product(&c);
        worst = worst.max(max_abs_diff(&left, &right));
    }
    check("distributivity", worst, 1e-13)
}

fn vector_squares(rng: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (w, x, y, z) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let v = Multivector::vector(w, x, y, z);
        let sq = v.geometric_product(&v);
        for i in 0..BLADE_COUNT {
            if GRADE[i] != 0 {
                worst = worst.max(sq[i].abs());
            }
        }
        worst = worst.max((sq.scalar_part() - (x * x + y * y + z * z)).abs());
    }
    check("grade-1 squares are scalars", worst, 1e-12)
}

fn grade_partition(rng: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a = random_mv(rng);
        let mut sum = Multivector::ZERO;
        for k in 0..=4 {
            sum += a.grade_project(k);
        }
        worst = worst.max(max_abs_diff(&sum, &a));
    }
    check("grade projections partition", worst, 0.0)
}

fn dual_round_trip() -> CheckResult {
    let mut ok = true;
    for i in 0..BLADE_COUNT {
        let b = Multivector::basis(i);
        ok &= b.hodge_dual().inverse_hodge_dual() == b;
    }
    CheckResult {
        name: "hodge dual round trip (16 blades)",
        passed: ok,
        detail: "inverse dual of dual is the identity".into(),
    }
}

fn outermorphism(rng: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = random_unit(rng);
        let p = embed_plane(n.x, n.y, n.z, rng.gen_range(-2.0..2.0));
        let a = Multivector::vector(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let b = Multivector::vector(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let lhs = Multivector::sandwich(&p, &a.outer_product(&b), false).unwrap();
        let ra = Multivector::sandwich(&p, &a, false).unwrap();
        let rb = Multivector::sandwich(&p, &b, false).unwrap();
        worst = worst.max(max_abs_diff(&lhs, &ra.outer_product(&rb)));
    }
    check("sandwich is an outermorphism", worst, 1e-12)
}

fn metric_relations(rng: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = Vector3::new(
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
        );
        let b = Vector3::new(
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
        );
        let pa = embed_point(a.x, a.y, a.z);
        let pb = embed_point(b.x, b.y, b.z);
        let d = metric::dist_point_point(&pa, &pb).unwrap();
        worst = worst.max((d - (a - b).norm()).abs());

        let n = random_unit(rng);
        let offset = rng.gen_range(-5.0..5.0);
        let plane = embed_plane(n.x, n.y, n.z, offset);
        let dp = metric::dist_point_plane(&pa, &plane).unwrap();
        worst = worst.max((dp - (n.dot(&a) + offset).abs()).abs());

        let dir = random_unit(rng);
        let through = b + dir;
        let line = pb.join(&embed_point(through.x, through.y, through.z));
        let line = line.scale(1.0 / line.norm());
        let rel = a - b;
        let expected = (rel - dir * rel.dot(&dir)).norm();
        let dl = metric::dist_point_line(&pa, &line).unwrap();
        worst = worst.max((dl - expected).abs());

        let n2 = random_unit(rng);
        let plane2 = embed_plane(n2.x, n2.y, n2.z, rng.gen_range(-5.0..5.0));
        let theta = n.dot(&n2).clamp(-1.0, 1.0).acos();
        let expected = theta.min(std::f64::consts::PI - theta);
        let ap = metric::angle_plane_plane(&plane, &plane2).unwrap();
        worst = worst.max((ap - expected).abs());

        let al = metric::angle_plane_line(&plane, &line).unwrap();
        worst = worst.max((al - n.dot(&dir).abs().asin()).abs());
    }
    check("metric relations vs Cartesian (1000 configs)", worst, 1e-10)
}

fn layer_equivariance(rng: &mut impl Rng) -> Vec<CheckResult> {
    let mut worst_linear: f64 = 0.0;
    let mut worst_bilinear: f64 = 0.0;
    let mut worst_many: f64 = 0.0;
    for _ in 0..100 {
        let m = random_motor(rng);
        let act = |channels: &[Multivector]| -> Vec<Multivector> {
            channels.iter().map(|mv| m.act(mv)).collect()
        };

        let layer = EquiLinear::new(3, 3, rng);
        let x = random_channels(3, rng);
        let a = layer.forward(&act(&x)).unwrap();
        let b = act(&layer.forward(&x).unwrap());
        for (u, v) in a.iter().zip(&b) {
            worst_linear = worst_linear.max(max_abs_diff(u, v));
        }

        let bilinear = GeometricBilinear::new(2, 2, 2, 2, rng);
        let y = random_channels(2, rng);
        let z = random_channels(2, rng);
        let a = bilinear.forward(&act(&y), &act(&z)).unwrap();
        let b = act(&bilinear.forward(&y, &z).unwrap());
        for (u, v) in a.iter().zip(&b) {
            worst_bilinear = worst_bilinear.max(max_abs_diff(u, v));
        }

        let many = ManyBodyProduct::new(2, rng);
        let a = many.forward(&act(&y)).unwrap();
        let b = act(&many.forward(&y).unwrap());
        for (u, v) in a.iter().zip(&b) {
            worst_many = worst_many.max(max_abs_diff(u, v));
        }
    }
    vec![
        check("equi-linear equivariance (100 motors)", worst_linear, 1e-8),
        check(
            "geometric-bilinear equivariance (100 motors)",
            worst_bilinear,
            1e-8,
        ),
        check("many-body equivariance (100 motors)", worst_many, 1e-8),
    ]
}

fn equi_linear_closure(rng: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = EquiLinear::new(3, 4, rng);
        let b = EquiLinear::new(4, 2, rng);
        let fused = a.compose(&b);
        let x = random_channels(3, rng);
        let seq = b.forward(&a.forward(&x).unwrap()).unwrap();
        let one = fused.forward(&x).unwrap();
        for (u, v) in seq.iter().zip(&one) {
            worst = worst.max(max_abs_diff(u, v));
        }
    }
    check("equi-linear closure under composition", worst, 1e-12)
}

/// Run the full invariant suite with a fixed seed.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut results = vec![
        metric_rule(),
        associativity(&mut rng),
        distributivity(&mut rng),
        vector_squares(&mut rng),
        grade_partition(&mut rng),
        dual_round_trip(),
        outermorphism(&mut rng),
        metric_relations(&mut rng),
    ];
    results.extend(layer_equivariance(&mut rng));
    results.push(equi_linear_closure(&mut rng));
    results
}
