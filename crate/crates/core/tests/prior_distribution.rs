//! Distributional check of the rotation prior: angles of uniform SO(3)
//! rotations follow the density (1 - cos t)/pi on [0, pi].

use pgaflow::flow::sample_prior;
use pgaflow::motor::so3;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// CDF of the rotation-angle density: (t - sin t)/pi.
fn angle_cdf(t: f64) -> f64 {
    (t - t.sin()) / std::f64::consts::PI
}

#[test]
fn rotation_angles_match_uniform_so3_density() {
    const SAMPLES: usize = 100_000;
    const BINS: usize = 40;

    let frames = sample_prior(SAMPLES, 2024).unwrap();
    let mut counts = [0usize; BINS];
    for f in &frames {
        let angle = so3::log(&f.rotation).unwrap().norm();
        let bin = ((angle / std::f64::consts::PI) * BINS as f64)
            .floor()
            .min(BINS as f64 - 1.0) as usize;
        counts[bin] += 1;
    }

    let mut chi2 = 0.0;
    for (b, &observed) in counts.iter().enumerate() {
        let lo = std::f64::consts::PI * b as f64 / BINS as f64;
        let hi = std::f64::consts::PI * (b + 1) as f64 / BINS as f64;
        let expected = SAMPLES as f64 * (angle_cdf(hi) - angle_cdf(lo));
        chi2 += (observed as f64 - expected).powi(2) / expected;
    }

    let dof = (BINS - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2:.2} with {dof} dof gives p = {p:.4}");
}

#[test]
fn translation_mean_is_exactly_zero() {
    let frames = sample_prior(100, 77).unwrap();
    let sum = frames.iter().fold(nalgebra::Vector3::zeros(), |acc, f| {
        acc + f.translation
    });
    let mean = sum / frames.len() as f64;
    assert_eq!(mean, nalgebra::Vector3::zeros());
}
