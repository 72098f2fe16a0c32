//! Geometric bilinear layer: channelwise geometric products and joins of
//! linearly mixed inputs, concatenated and mixed again.

use rand::Rng;

use crate::pga::Multivector;

use super::{EquiLinear, LayerError};

/// `out = EquiLinear(concat(GL(a) * GR(b), JL(a) v JR(b)))`, products and
/// joins taken channel by channel.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricBilinear {
    pub g_left: EquiLinear,
    pub g_right: EquiLinear,
    pub j_left: EquiLinear,
    pub j_right: EquiLinear,
    pub out: EquiLinear,
}

impl GeometricBilinear {
    /// `hidden` channels per branch; the final map sees `2 * hidden`.
    pub fn new(
        in_left: usize,
        in_right: usize,
        hidden: usize,
        out_channels: usize,
        rng: &mut impl Rng,
    ) -> Self {
        GeometricBilinear {
            g_left: EquiLinear::new(in_left, hidden, rng),
            g_right: EquiLinear::new(in_right, hidden, rng),
            j_left: EquiLinear::new(in_left, hidden, rng),
            j_right: EquiLinear::new(in_right, hidden, rng),
            out: EquiLinear::new(2 * hidden, out_channels, rng),
        }
    }

    pub fn hidden_channels(&self) -> usize {
        self.g_left.out_channels()
    }

    pub fn out_channels(&self) -> usize {
        self.out.out_channels()
    }

    pub fn parameter_count(&self) -> usize {
        self.g_left.parameter_count()
            + self.g_right.parameter_count()
            + self.j_left.parameter_count()
            + self.j_right.parameter_count()
            + self.out.parameter_count()
    }

    pub fn forward(
        &self,
        a: &[Multivector],
        b: &[Multivector],
    ) -> Result<Vec<Multivector>, LayerError> {
        self.forward_batch(a, b, 1)
    }

    /// Batched forward over `rows` channel groups.
    pub fn forward_batch(
        &self,
        a: &[Multivector],
        b: &[Multivector],
        rows: usize,
    ) -> Result<Vec<Multivector>, LayerError> {
        let gl = self.g_left.forward_batch(a, rows)?;
        let gr = self.g_right.forward_batch(b, rows)?;
        let jl = self.j_left.forward_batch(a, rows)?;
        let jr = self.j_right.forward_batch(b, rows)?;
        let hidden = self.hidden_channels();
        let mut concat = vec![Multivector::ZERO; rows * 2 * hidden];
        for r in 0..rows {
            let row = &mut concat[r * 2 * hidden..(r + 1) * 2 * hidden];
            for ch in 0..hidden {
                row[ch] = gl[r * hidden + ch].geometric_product(&gr[r * hidden + ch]);
                row[hidden + ch] = jl[r * hidden + ch].join(&jr[r * hidden + ch]);
            }
        }
        self.out.forward_batch(&concat, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pga::blade::BLADE_COUNT;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_channels(n: usize, rng: &mut impl Rng) -> Vec<Multivector> {
        (0..n)
            .map(|_| {
                let mut mv = Multivector::ZERO;
                for i in 0..BLADE_COUNT {
                    mv[i] = rng.gen_range(-1.0..1.0);
                }
                mv
            })
            .collect()
    }

    #[test]
    fn zero_left_input_gives_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let layer = GeometricBilinear::new(3, 3, 4, 2, &mut rng);
        let zeros = vec![Multivector::ZERO; 3];
        let b = random_channels(3, &mut rng);
        let out = layer.forward(&zeros, &b).unwrap();
        for mv in out {
            assert!(mv.norm() < 1e-14 && mv.infinity_norm() < 1e-14);
        }
    }

    #[test]
    fn bilinearity_in_each_argument() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let layer = GeometricBilinear::new(2, 2, 3, 2, &mut rng);
        let a1 = random_channels(2, &mut rng);
        let a2 = random_channels(2, &mut rng);
        let b = random_channels(2, &mut rng);
        let sum: Vec<Multivector> = a1.iter().zip(&a2).map(|(x, y)| *x + *y).collect();
        let f_sum = layer.forward(&sum, &b).unwrap();
        let f1 = layer.forward(&a1, &b).unwrap();
        let f2 = layer.forward(&a2, &b).unwrap();
        for ((s, x), y) in f_sum.iter().zip(&f1).zip(&f2) {
            assert!(crate::pga::max_abs_diff(s, &(*x + *y)) < 1e-12);
        }
    }

    /// With identity-selecting branch maps and the join branch zeroed, the
    /// layer reduces to the final linear of the channelwise products.
    #[test]
    fn reduces_to_plain_geometric_product() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let c = 2;
        let mut layer = GeometricBilinear::new(c, c, c, c, &mut rng);
        layer.g_left = EquiLinear::identity(c);
        layer.g_right = EquiLinear::identity(c);
        layer.j_left = EquiLinear {
            w: crate::tensor::Tensor::zeros(&[c, c, 5]),
            v: crate::tensor::Tensor::zeros(&[c, c, 4]),
        };
        layer.j_right = layer.j_left.clone();
        let a = random_channels(c, &mut rng);
        let b = random_channels(c, &mut rng);
        let out = layer.forward(&a, &b).unwrap();

        let mut concat: Vec<Multivector> =
            a.iter().zip(&b).map(|(x, y)| x.geometric_product(y)).collect();
        concat.extend(std::iter::repeat(Multivector::ZERO).take(c));
        let expected = layer.out.forward(&concat).unwrap();
        for (u, v) in out.iter().zip(&expected) {
            assert!(crate::pga::max_abs_diff(u, v) < 1e-13);
        }
    }
}
