//! The general equivariant linear map on multivector channels.
//!
//! Per (input channel m, output channel n) pair there are nine scalars:
//! five grade weights `w_k` (k = 0..4) and four e0-multiplication weights
//! `v_k` (k = 0..3):
//!
//!   out_n = sum_m [ sum_k w_knm <x_m>_k  +  sum_k v_knm e0 <x_m>_k ]
//!
//! Grade projection and left-multiplication by e0 both commute with the
//! sandwich action of motors, which makes this the most general linear map
//! that does.

use rand::Rng;

use crate::pga::blade::{BLADE_COUNT, E0_STRIP, GRADE};
use crate::pga::Multivector;
use crate::tensor::Tensor;

use super::LayerError;

#[derive(Clone, Debug, PartialEq)]
pub struct EquiLinear {
    /// Grade weights, shape `[out, in, 5]`.
    pub w: Tensor,
    /// e0-lift weights, shape `[out, in, 4]`.
    pub v: Tensor,
}

impl EquiLinear {
    /// Random init, uniform in `[-s, s]` with `s = 1/sqrt(9 * fan_in)`.
    pub fn new(in_channels: usize, out_channels: usize, rng: &mut impl Rng) -> Self {
        let scale = 1.0 / (9.0 * in_channels as f64).sqrt();
        EquiLinear {
            w: Tensor::uniform(&[out_channels, in_channels, 5], scale, rng),
            v: Tensor::uniform(&[out_channels, in_channels, 4], scale, rng),
        }
    }

    /// The identity map on `channels` channels: `w_k = 1` for all grades,
    /// `v = 0`, off-diagonal zero.
    pub fn identity(channels: usize) -> Self {
        let mut w = Tensor::zeros(&[channels, channels, 5]);
        for n in 0..channels {
            for k in 0..5 {
                w.data_mut()[(n * channels + n) * 5 + k] = 1.0;
            }
        }
        EquiLinear {
            w,
            v: Tensor::zeros(&[channels, channels, 4]),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.w.dims()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.w.dims()[0]
    }

    pub fn parameter_count(&self) -> usize {
        self.w.len() + self.v.len()
    }

    /// Apply the layer to `rows` independent channel groups laid out
    /// contiguously. Grade and e0-lift weights are expanded to 16 blade
    /// lanes once, so the per-row inner loop is a plain fused multiply-add.
    pub fn forward_batch(
        &self,
        xs: &[Multivector],
        rows: usize,
    ) -> Result<Vec<Multivector>, LayerError> {
        let (out_c, in_c) = (self.out_channels(), self.in_channels());
        if xs.len() != rows * in_c {
            return Err(LayerError::ChannelMismatch {
                expected: rows * in_c,
                got: xs.len(),
            });
        }
        let w = self.w.data();
        let v = self.v.data();
        // lane-expanded weights: [out][in][16] for the grade part and the
        // e0-lift part (zero on blades without e0)
        let mut wl = vec![0.0f64; out_c * in_c * BLADE_COUNT];
        let mut vl = vec![0.0f64; out_c * in_c * BLADE_COUNT];
        for nm in 0..out_c * in_c {
            let wrow = &w[nm * 5..nm * 5 + 5];
            let vrow = &v[nm * 4..nm * 4 + 4];
            let wl_row = &mut wl[nm * BLADE_COUNT..(nm + 1) * BLADE_COUNT];
            let vl_row = &mut vl[nm * BLADE_COUNT..(nm + 1) * BLADE_COUNT];
            for idx in 0..BLADE_COUNT {
                wl_row[idx] = wrow[GRADE[idx]];
                if E0_STRIP[idx].is_some() {
                    vl_row[idx] = vrow[GRADE[idx] - 1];
                }
            }
        }
        // gather indices for the e0 lift; blades without e0 read lane 0
        // and contribute nothing because their vl lane is zero
        let mut src = [0usize; BLADE_COUNT];
        for idx in 0..BLADE_COUNT {
            src[idx] = E0_STRIP[idx].unwrap_or(0);
        }

        let mut out = vec![Multivector::ZERO; rows * out_c];
        let mut gathered = vec![[0.0f64; BLADE_COUNT]; in_c];
        for r in 0..rows {
            let x_row = &xs[r * in_c..(r + 1) * in_c];
            for (g, xm) in gathered.iter_mut().zip(x_row) {
                let xc = xm.coeffs();
                for idx in 0..BLADE_COUNT {
                    g[idx] = xc[src[idx]];
                }
            }
            for n in 0..out_c {
                let mut acc = [0.0f64; BLADE_COUNT];
                for (m, xm) in x_row.iter().enumerate() {
                    let nm = n * in_c + m;
                    let wl_row = &wl[nm * BLADE_COUNT..(nm + 1) * BLADE_COUNT];
                    let vl_row = &vl[nm * BLADE_COUNT..(nm + 1) * BLADE_COUNT];
                    let xc = xm.coeffs();
                    let g = &gathered[m];
                    for idx in 0..BLADE_COUNT {
                        acc[idx] += wl_row[idx] * xc[idx] + vl_row[idx] * g[idx];
                    }
                }
                out[r * out_c + n] = Multivector::new(acc);
            }
        }
        Ok(out)
    }

    pub fn forward(&self, x: &[Multivector]) -> Result<Vec<Multivector>, LayerError> {
        if x.len() != self.in_channels() {
            return Err(LayerError::ChannelMismatch {
                expected: self.in_channels(),
                got: x.len(),
            });
        }
        let (out_c, in_c) = (self.out_channels(), self.in_channels());
        let w = self.w.data();
        let v = self.v.data();
        let mut out = vec![Multivector::ZERO; out_c];
        for (n, out_mv) in out.iter_mut().enumerate() {
            let mut acc = [0.0f64; BLADE_COUNT];
            for (m, xm) in x.iter().enumerate() {
                let wrow = &w[(n * in_c + m) * 5..(n * in_c + m) * 5 + 5];
                let vrow = &v[(n * in_c + m) * 4..(n * in_c + m) * 4 + 4];
                let xc = xm.coeffs();
                for idx in 0..BLADE_COUNT {
                    acc[idx] += wrow[GRADE[idx]] * xc[idx];
                }
                // e0 <x>_{g-1} lands on e0-carrying blades of grade g with
                // the coefficient taken from the blade with e0 removed
                for idx in 0..BLADE_COUNT {
                    if let Some(src) = E0_STRIP[idx] {
                        acc[idx] += vrow[GRADE[idx] - 1] * xc[src];
                    }
                }
            }
            *out_mv = Multivector::new(acc);
        }
        Ok(out)
    }

    /// Parameters of the composition `other . self` as a single map.
    ///
    /// The grade weights compose per grade; the e0 weights pick up two
    /// contributions because `e0 e0 = 0` kills the doubly-lifted term:
    /// `w''_k = w'_k w_k`, `v''_k = w'_{k+1} v_k + v'_k w_k`.
    pub fn compose(&self, other: &EquiLinear) -> EquiLinear {
        assert_eq!(self.out_channels(), other.in_channels());
        let (mid, in_c, out_c) = (
            self.out_channels(),
            self.in_channels(),
            other.out_channels(),
        );
        let mut w = Tensor::zeros(&[out_c, in_c, 5]);
        let mut v = Tensor::zeros(&[out_c, in_c, 4]);
        for n in 0..out_c {
            for m in 0..in_c {
                for k in 0..5 {
                    let mut acc = 0.0;
                    for p in 0..mid {
                        acc += other.w.at3(n, p, k) * self.w.at3(p, m, k);
                    }
                    w.data_mut()[(n * in_c + m) * 5 + k] = acc;
                }
                for k in 0..4 {
                    let mut acc = 0.0;
                    for p in 0..mid {
                        acc += other.w.at3(n, p, k + 1) * self.v.at3(p, m, k)
                            + other.v.at3(n, p, k) * self.w.at3(p, m, k);
                    }
                    v.data_mut()[(n * in_c + m) * 4 + k] = acc;
                }
            }
        }
        EquiLinear { w, v }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn zero_weights_give_zero_output() {
        let layer = EquiLinear {
            w: Tensor::zeros(&[2, 3, 5]),
            v: Tensor::zeros(&[2, 3, 4]),
        };
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = random_channels(3, &mut rng);
        let y = layer.forward(&x).unwrap();
        assert!(y.iter().all(Multivector::is_zero));
    }

    #[test]
    fn identity_parameters_pass_through() {
        let layer = EquiLinear::identity(1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let x = random_channels(1, &mut rng);
        let y = layer.forward(&x).unwrap();
        assert_eq!(x[0], y[0]);
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let layer = EquiLinear::new(3, 2, &mut rng);
        let x = random_channels(4, &mut rng);
        assert!(matches!(
            layer.forward(&x),
            Err(LayerError::ChannelMismatch { expected: 3, got: 4 })
        ));
    }

    #[test]
    fn composition_matches_sequential_application() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let a = EquiLinear::new(3, 5, &mut rng);
        let b = EquiLinear::new(5, 2, &mut rng);
        let composed = a.compose(&b);
        let x = random_channels(3, &mut rng);
        let seq = b.forward(&a.forward(&x).unwrap()).unwrap();
        let fused = composed.forward(&x).unwrap();
        for (u, w) in seq.iter().zip(&fused) {
            assert!(crate::pga::max_abs_diff(u, w) < 1e-12);
        }
    }
}
